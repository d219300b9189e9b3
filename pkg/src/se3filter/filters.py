"""Nonlinear deterministic and stochastic pose filters on SE(3).

Both filters drive ``T_hat`` towards the measured pose ``T_y`` using the
group error ``T~ = T_y T_hat^-1``. The deterministic filter adapts a rate
bias estimate; the stochastic filter additionally adapts an estimate of the
noise covariance bound and compensates for it in the pose update.

Discretization: the pose advances through the group exponential of the full
corrected twist (so ``T_hat`` never leaves SE(3)); bias and covariance-bound
estimates use explicit Euler.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from numpy.typing import ArrayLike, NDArray

from . import _kernels_py as ref
from ._backend import kernels
from .errors import InvalidArgument
from .lie import Pose, adjoint_matrix, distance_so3, pose_compose, pose_inverse, project_to_so3, rotation_to_rodriguez, upsilon, wedge

RENORMALIZE_EVERY = 1000
STOCHASTIC_GAIN_PRODUCT_MIN = 4.5


@dataclass(frozen=True)
class FilterGains:
    gamma: float = 1.0
    pi_bar: float = 1.0
    k_b: float = 0.1
    k_sigma: float = 0.1
    k_p: float = 2.0
    k_w: float = 3.0
    epsilon: float = 0.5

    def __post_init__(self) -> None:
        for name in ("gamma", "pi_bar", "k_b", "k_sigma", "k_p", "k_w", "epsilon"):
            if not getattr(self, name) > 0:
                raise InvalidArgument(f"gain {name} must be positive")

    def check_stochastic(self) -> None:
        """Raise unless ``k_p * k_w > 4.5``, required by the stochastic filter."""
        if not self.k_p * self.k_w > STOCHASTIC_GAIN_PRODUCT_MIN:
            raise InvalidArgument(
                f"k_p * k_w = {self.k_p * self.k_w:g} must exceed {STOCHASTIC_GAIN_PRODUCT_MIN} for the stochastic filter"
            )


@dataclass(frozen=True)
class FilterState:
    """Estimated pose, rate-bias estimate (6,) and covariance-bound estimate (6,)."""

    T_hat: Pose
    b_hat: NDArray[np.float64] = field(default_factory=lambda: np.zeros(6))
    sigma_hat: NDArray[np.float64] = field(default_factory=lambda: np.zeros(6))
    steps: int = 0

    def __post_init__(self) -> None:
        object.__setattr__(self, "b_hat", np.asarray(self.b_hat, dtype=np.float64).reshape(6))
        object.__setattr__(self, "sigma_hat", np.asarray(self.sigma_hat, dtype=np.float64).reshape(6))


@dataclass(frozen=True)
class ErrorDiagnostics:
    """Group error ``T~ = T_a T_b^-1`` and the scalars derived from it.

    ``V_det`` and ``V_stoch`` hold only the pose part of each potential
    function unless bias / covariance-bound errors were supplied.
    """

    T_tilde: Pose
    rho_tilde: NDArray[np.float64]
    attitude_distance: float
    position_error: NDArray[np.float64]
    upsilon: NDArray[np.float64]
    V_det: float
    V_stoch: float


def pose_error(
    T_y: Pose,
    T_hat: Pose,
    b_tilde: ArrayLike | None = None,
    sigma_tilde: ArrayLike | None = None,
    gains: FilterGains | None = None,
) -> ErrorDiagnostics:
    """Diagnostics of ``T~ = T_y T_hat^-1``.

    Raises
    ------
    SingularAttitude
        If ``R~`` is a rotation by pi (no finite Rodriguez vector).
    """
    T_t = pose_compose(T_y, pose_inverse(T_hat))
    rho = rotation_to_rodriguez(T_t.R)
    g = gains or FilterGains()
    bt = np.zeros(6) if b_tilde is None else np.asarray(b_tilde, dtype=np.float64)
    st = np.zeros(6) if sigma_tilde is None else np.asarray(sigma_tilde, dtype=np.float64)
    diag = ErrorDiagnostics(
        T_tilde=T_t,
        rho_tilde=rho,
        attitude_distance=distance_so3(T_t.R),
        position_error=np.array(T_t.P),
        upsilon=upsilon(T_t),
        V_det=0.0,
        V_stoch=0.0,
    )
    object.__setattr__(diag, "V_det", lyapunov_det(diag, bt, g))
    object.__setattr__(diag, "V_stoch", lyapunov_stoch(diag, bt, st, g))
    return diag


def det_correction(err: ErrorDiagnostics, T_hat: Pose, g: FilterGains) -> NDArray[np.float64]:
    """Innovation ``W`` of the deterministic filter.

    The ``1 / (1 - ||R~||_I)`` factor is evaluated with ``||R~||_I`` clamped to
    ``1 - 1e-6`` so the correction stays finite next to the unstable pole.
    """
    return ref.det_correction(T_hat.R, T_hat.P, err.T_tilde.R, err.T_tilde.P, g.k_p)


def stoch_correction(err: ErrorDiagnostics, T_hat: Pose, sigma_hat: ArrayLike, g: FilterGains) -> NDArray[np.float64]:
    """Innovation ``W`` of the stochastic filter (same pole clamp as above)."""
    s = np.asarray(sigma_hat, dtype=np.float64)
    return ref.stoch_correction(T_hat.R, T_hat.P, err.T_tilde.R, err.T_tilde.P, s, g.k_p, g.epsilon)


def det_rates(err: ErrorDiagnostics, state: FilterState, y_m: ArrayLike, g: FilterGains):
    """Continuous-time (corrected twist, bias rate) of the deterministic filter."""
    T_hat = state.T_hat
    W = det_correction(err, T_hat, g)
    b_dot = ref.det_bias_rate(T_hat.R, T_hat.P, err.T_tilde.R, err.T_tilde.P, state.b_hat, g.gamma, g.k_b)
    return np.asarray(y_m, dtype=np.float64) - state.b_hat + g.k_w * W, b_dot


def stoch_rates(err: ErrorDiagnostics, state: FilterState, y_m: ArrayLike, g: FilterGains):
    """Continuous-time (corrected twist, bias rate, covariance-bound rate) of the stochastic filter."""
    T_hat, R_t, P_t = state.T_hat, err.T_tilde.R, err.T_tilde.P
    W = stoch_correction(err, T_hat, state.sigma_hat, g)
    comp = ref.sigma_compensation(T_hat.R, T_hat.P, R_t, state.sigma_hat)
    b_dot = ref.stoch_bias_rate(T_hat.R, T_hat.P, R_t, P_t, state.b_hat, g.gamma, g.k_b)
    s_dot = ref.sigma_rate(R_t, state.sigma_hat, g.pi_bar, g.k_sigma, g.k_p, g.k_w)
    twist = np.asarray(y_m, dtype=np.float64) - state.b_hat + g.k_w * W + comp
    return twist, b_dot, s_dot


def _finish(R, P, steps, renormalize_every):
    if renormalize_every and steps % renormalize_every == 0:
        R = project_to_so3(R)
    return Pose(R, P)


def det_step(state: FilterState, T_y: Pose, y_m: ArrayLike, g: FilterGains, dt: float) -> FilterState:
    """Advance the deterministic filter by ``dt`` seconds."""
    if dt <= 0:
        raise InvalidArgument("dt must be positive")
    T = state.T_hat
    R, P, b = kernels.det_step(T.R, T.P, state.b_hat, T_y.R, T_y.P, y_m, g.gamma, g.k_b, g.k_p, g.k_w, dt)
    steps = state.steps + 1
    return FilterState(_finish(R, P, steps, RENORMALIZE_EVERY), b, state.sigma_hat, steps)


def stoch_step(state: FilterState, T_y: Pose, y_m: ArrayLike, g: FilterGains, dt: float) -> FilterState:
    """Advance the stochastic filter by ``dt`` seconds."""
    if dt <= 0:
        raise InvalidArgument("dt must be positive")
    T = state.T_hat
    R, P, b, s = kernels.stoch_step(
        T.R, T.P, state.b_hat, state.sigma_hat, T_y.R, T_y.P, y_m,
        g.gamma, g.pi_bar, g.k_b, g.k_sigma, g.k_p, g.k_w, g.epsilon, dt,
    )  # fmt: skip
    steps = state.steps + 1
    return FilterState(_finish(R, P, steps, RENORMALIZE_EVERY), b, s, steps)


def _attitude_potential(rho: NDArray[np.float64]) -> float:
    n2 = float(rho @ rho)
    return (n2 / (1.0 + n2)) ** 2


def lyapunov_det(err: ErrorDiagnostics, b_tilde: ArrayLike, g: FilterGains) -> float:
    """``(|rho|^2 / (1 + |rho|^2))^2 + 2 |P~|^2 + b~^T b~ / (2 gamma)``."""
    bt = np.asarray(b_tilde, dtype=np.float64)
    P = err.position_error
    return _attitude_potential(err.rho_tilde) + 2.0 * float(P @ P) + 0.5 * float(bt @ bt) / g.gamma


def lyapunov_stoch(err: ErrorDiagnostics, b_tilde: ArrayLike, sigma_tilde: ArrayLike, g: FilterGains) -> float:
    """``(|rho|^2 / (1 + |rho|^2))^2 + |P~|^4 + b~^T b~ / (2 gamma) + s~^T s~ / (2 pi)``."""
    bt = np.asarray(b_tilde, dtype=np.float64)
    st = np.asarray(sigma_tilde, dtype=np.float64)
    P = err.position_error
    return (
        _attitude_potential(err.rho_tilde)
        + float(P @ P) ** 2
        + 0.5 * float(bt @ bt) / g.gamma
        + 0.5 * float(st @ st) / g.pi_bar
    )


def lyapunov_stoch_gradients(rho: ArrayLike, P: ArrayLike):
    """Closed-form first and second partials of the stochastic potential.

    Returns
    -------
    V_rho, V_rho_rho, V_P, V_P_P : ndarray
        Shapes (3,), (3, 3), (3,), (3, 3).
    """
    rho = np.asarray(rho, dtype=np.float64)
    P = np.asarray(P, dtype=np.float64)
    n2 = float(rho @ rho)
    p2 = float(P @ P)
    V_rho = 4.0 * n2 / (1.0 + n2) ** 3 * rho
    V_rho_rho = 4.0 * ((1.0 + n2) * n2 * np.eye(3) + (2.0 - 4.0 * n2) * np.outer(rho, rho)) / (1.0 + n2) ** 4
    V_P = 4.0 * p2 * P
    V_P_P = 4.0 * p2 * np.eye(3) + 8.0 * np.outer(P, P)
    return V_rho, V_rho_rho, V_P, V_P_P


def det_envelope_constants(g: FilterGains, bias: ArrayLike) -> tuple[float, float]:
    """Decay rate ``c1`` and offset ``c2`` of the deterministic potential bound.

    ``V(t) <= V(0) exp(-c1 t) + c2 / c1`` with
    ``c1 = min(4 k_p k_w, gamma k_b)`` and ``c2 = k_b |b|^2 / 2``.
    """
    b = np.asarray(bias, dtype=np.float64)
    c1 = min(4.0 * g.k_p * g.k_w, g.gamma * g.k_b)
    return c1, 0.5 * g.k_b * float(b @ b)


def det_error_rate(T_tilde: Pose, T_hat: Pose, b_tilde: ArrayLike, W: ArrayLike, k_w: float) -> NDArray[np.float64]:
    """Closed-form ``d(T~)/dt = -T~ wedge(Ad(T_hat) (b~ + k_w W))`` as a 4x4 matrix."""
    y = adjoint_matrix(T_hat) @ (np.asarray(b_tilde, dtype=np.float64) + k_w * np.asarray(W, dtype=np.float64))
    return -T_tilde.matrix() @ wedge(y)
