"""True pose kinematics and the Rodriguez-vector form of the stochastic dynamics."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np
from numpy.typing import ArrayLike, NDArray

from ._backend import kernels
from .errors import InvalidArgument
from .lie import Pose, project_to_so3, rodriguez_to_rotation, skew

RENORMALIZE_EVERY = 1000


@dataclass(frozen=True)
class SignalSpec:
    """Sinusoidal body-frame velocities, ``amp * sin(freq * t + phase)`` per axis.

    Frequencies in rad/s, phases in rad. Amplitudes in rad/s for the angular
    part and m/s for the translational part.
    """

    omega_amp: tuple[float, float, float]
    omega_freq: tuple[float, float, float]
    omega_phase: tuple[float, float, float]
    v_amp: tuple[float, float, float]
    v_freq: tuple[float, float, float]
    v_phase: tuple[float, float, float]

    def __post_init__(self) -> None:
        for name in ("omega_amp", "omega_freq", "omega_phase", "v_amp", "v_freq", "v_phase"):
            value = tuple(float(x) for x in getattr(self, name))
            if len(value) != 3:
                raise InvalidArgument(f"{name} needs 3 components")
            object.__setattr__(self, name, value)
        if min(self.omega_freq) < 0 or min(self.v_freq) < 0:
            raise InvalidArgument("signal frequencies must be non-negative")

    @classmethod
    def reference(cls) -> SignalSpec:
        return cls(
            omega_amp=(1.0, 0.7, 0.5),
            omega_freq=(0.3, 0.25, 0.2),
            omega_phase=(0.0, np.pi, np.pi / 3),
            v_amp=(1.0, 0.6, 1.0),
            v_freq=(0.2, 0.15, 0.25),
            v_phase=(0.0, np.pi / 2, np.pi / 4),
        )

    @classmethod
    def zero(cls) -> SignalSpec:
        z = (0.0, 0.0, 0.0)
        return cls(z, z, z, z, z, z)


def true_twist(t: float, spec: SignalSpec) -> NDArray[np.float64]:
    """Body-frame twist ``[omega, v]`` at time ``t``."""
    if t < 0:
        raise InvalidArgument("t must be non-negative")
    omega = np.asarray(spec.omega_amp) * np.sin(np.asarray(spec.omega_freq) * t + np.asarray(spec.omega_phase))
    v = np.asarray(spec.v_amp) * np.sin(np.asarray(spec.v_freq) * t + np.asarray(spec.v_phase))
    return np.concatenate([omega, v])


def true_twists(times: ArrayLike, spec: SignalSpec) -> NDArray[np.float64]:
    """Vectorized :func:`true_twist`; returns shape (n, 6)."""
    t = np.asarray(times, dtype=np.float64).reshape(-1, 1)
    if np.any(t < 0):
        raise InvalidArgument("t must be non-negative")
    amp = np.array(spec.omega_amp + spec.v_amp)
    freq = np.array(spec.omega_freq + spec.v_freq)
    phase = np.array(spec.omega_phase + spec.v_phase)
    return amp * np.sin(freq * t + phase)


def propagate_truth(T: Pose, y: ArrayLike, dt: float) -> Pose:
    """Advance ``T' = T wedge(y)`` over ``dt`` with ``y`` held constant."""
    if dt <= 0:
        raise InvalidArgument("dt must be positive")
    y = np.asarray(y, dtype=np.float64)
    dR, dP = kernels.se3_exp(y[:3], y[3:], dt)
    return Pose(T.R @ dR, T.R @ dP + T.P)


class TruthPropagator:
    """Group integrator for the true pose with periodic re-orthonormalization.

    ``R`` is projected back onto SO(3) after every ``renormalize_every``
    compositions.
    """

    def __init__(self, T0: Pose, renormalize_every: int = RENORMALIZE_EVERY):
        self._R = np.array(T0.R)
        self._P = np.array(T0.P)
        self.renormalize_every = renormalize_every
        self._count = 0

    @property
    def pose(self) -> Pose:
        return Pose(self._R, self._P)

    def advance(self, twists: ArrayLike, dt: float) -> Pose:
        """Apply one constant-twist substep per row of ``twists`` (shape (n, 6))."""
        twists = np.atleast_2d(np.asarray(twists, dtype=np.float64))
        start = 0
        n = len(twists)
        while start < n:
            chunk = min(n - start, self.renormalize_every - self._count)
            self._R, self._P = kernels.integrate_truth(self._R, self._P, twists[start : start + chunk], dt)
            self._count += chunk
            start += chunk
            if self._count == self.renormalize_every:
                self._R = project_to_so3(self._R)
                self._count = 0
        return self.pose


def rodriguez_rate(rho: ArrayLike, omega: ArrayLike) -> NDArray[np.float64]:
    """``d(rho)/dt = (I + skew(rho) + rho rho^T) omega / 2``."""
    rho = np.asarray(rho, dtype=np.float64)
    return 0.5 * (np.eye(3) + skew(rho) + np.outer(rho, rho)) @ np.asarray(omega, dtype=np.float64)


def diffusion_matrix(rho: ArrayLike) -> NDArray[np.float64]:
    """Block-diagonal map from body twist to ``d[rho, P]/dt``."""
    rho = np.asarray(rho, dtype=np.float64)
    G = np.zeros((6, 6))
    G[:3, :3] = 0.5 * (np.eye(3) + skew(rho) + np.outer(rho, rho))
    G[3:, 3:] = rodriguez_to_rotation(rho)
    return G


def vector_drift(rho: ArrayLike, y: ArrayLike) -> NDArray[np.float64]:
    """Time derivative of ``[rho, P]`` under the body twist ``y``."""
    return diffusion_matrix(rho) @ np.asarray(y, dtype=np.float64)


def _diag3(Q_sq: ArrayLike) -> NDArray[np.float64]:
    Q_sq = np.asarray(Q_sq, dtype=np.float64)
    if Q_sq.shape == (3, 3):
        if np.any(np.abs(Q_sq - np.diag(np.diag(Q_sq))) > 0):
            raise InvalidArgument("noise covariance must be diagonal")
        Q_sq = np.diag(Q_sq)
    if Q_sq.shape != (3,) or np.any(Q_sq < 0):
        raise InvalidArgument("noise covariance diagonal must hold 3 non-negative entries")
    return Q_sq


def wong_zakai_correction(rho: ArrayLike, Q_omega_sq: ArrayLike) -> NDArray[np.float64]:
    """Stratonovich-to-Ito drift correction for ``[rho, P]``.

    Parameters
    ----------
    rho : array-like, shape (3,)
        Rodriguez vector.
    Q_omega_sq : array-like, shape (3,) or (3, 3)
        Diagonal of the angular-rate noise covariance (or the diagonal matrix).

    Returns
    -------
    ndarray, shape (6,)
        ``[(I + skew(rho) + rho rho^T) Q^2 rho / 4, 0, 0, 0]``; the position
        rows vanish because the position block of the diffusion does not
        depend on ``P``.
    """
    rho = np.asarray(rho, dtype=np.float64)
    q = _diag3(Q_omega_sq)
    out = np.zeros(6)
    out[:3] = 0.25 * (np.eye(3) + skew(rho) + np.outer(rho, rho)) @ (q * rho)
    return out


@dataclass
class DiffusionSpec:
    """Diagonal noise gain ``Q`` with an optional time-varying override.

    ``sigma`` is the componentwise upper bound of ``Q^2``.
    """

    q_diag: NDArray[np.float64]
    schedule: Callable[[float], ArrayLike] | None = field(default=None, repr=False)

    def __post_init__(self) -> None:
        self.q_diag = np.asarray(self.q_diag, dtype=np.float64).reshape(6)
        if np.any(self.q_diag < 0):
            raise InvalidArgument("Q diagonal must be non-negative")

    @classmethod
    def from_sample_std(cls, gyro_std: float, velocity_std: float, sensor_dt: float) -> DiffusionSpec:
        """Gain implied by a per-sample STD at sampling interval ``sensor_dt``."""
        root = np.sqrt(sensor_dt)
        return cls(np.array([gyro_std] * 3 + [velocity_std] * 3) * root)

    def Q(self, t: float = 0.0) -> NDArray[np.float64]:
        q = self.q_diag if self.schedule is None else np.asarray(self.schedule(t), dtype=np.float64)
        return np.diag(q)

    @property
    def sigma(self) -> NDArray[np.float64]:
        return self.q_diag**2
