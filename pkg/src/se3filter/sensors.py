"""Synthetic landmark, direction-vector and velocity measurements.

All corruption follows ``measured = true + bias + noise`` with a constant
bias and zero-mean Gaussian noise drawn fresh per sample. Each sensor draws
from its own random stream, derived from the master seed and the sensor
name, so adding or reordering sensors never changes another sensor's noise.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass, field

import numpy as np
from numpy.typing import ArrayLike, NDArray

from .errors import DegenerateGeometry, InvalidArgument
from .lie import Pose

_COLLINEAR_TOL = 1e-9


def _as_points(points: ArrayLike, name: str) -> NDArray[np.float64]:
    arr = np.asarray(points, dtype=np.float64)
    if arr.ndim == 1:
        arr = arr.reshape(1, -1)
    if arr.ndim != 2 or arr.shape[1] != 3:
        raise InvalidArgument(f"{name} must have shape (n, 3)")
    return arr


@dataclass(frozen=True)
class LandmarkSet:
    """Inertial feature points (m) and their positive confidence weights."""

    points: NDArray[np.float64]
    weights: NDArray[np.float64] | None = None

    def __post_init__(self) -> None:
        pts = _as_points(self.points, "landmark points")
        if len(pts) < 1:
            raise InvalidArgument("at least one landmark is required")
        w = np.ones(len(pts)) if self.weights is None else np.asarray(self.weights, dtype=np.float64).reshape(-1)
        if w.shape != (len(pts),) or np.any(w <= 0):
            raise InvalidArgument("landmark weights must be positive, one per landmark")
        object.__setattr__(self, "points", pts)
        object.__setattr__(self, "weights", w)

    @classmethod
    def reference(cls) -> LandmarkSet:
        return cls(np.array([[0.5, np.sqrt(2.0), 1.0]]))


@dataclass(frozen=True)
class DirectionSet:
    """Inertial reference directions; two non-collinear members at minimum."""

    vectors: NDArray[np.float64]

    def __post_init__(self) -> None:
        vecs = _as_points(self.vectors, "direction vectors")
        if len(vecs) < 2:
            raise InvalidArgument("at least two reference directions are required")
        object.__setattr__(self, "vectors", vecs)

    @classmethod
    def reference(cls) -> DirectionSet:
        return cls(np.vstack([np.array([1.0, -1.0, 1.0]) / np.sqrt(3.0), [0.0, 0.0, 1.0]]))


def _sensor_entropy(name: str) -> list[int]:
    digest = hashlib.blake2b(name.encode(), digest_size=8).digest()
    value = int.from_bytes(digest, "little")
    return [value & 0xFFFFFFFF, value >> 32]


@dataclass
class CorruptionSpec:
    """Biases, noise levels and the random streams of every sensor.

    Parameters
    ----------
    gyro_bias, velocity_bias : array-like, shape (3,)
        Constant rate biases (rad/s, m/s).
    gyro_std, velocity_std : float
        Per-sample noise STD at the sensor rate.
    landmark_bias, direction_bias : array-like, shape (n, 3)
        One body-frame bias per landmark / per reference direction. Missing
        rows count as zero.
    landmark_std, direction_std : float
        Per-axis noise STD of body-frame vector measurements.
    seed : int
        Master seed for all streams.
    """

    gyro_bias: NDArray[np.float64] = field(default_factory=lambda: np.zeros(3))
    gyro_std: float = 0.0
    velocity_bias: NDArray[np.float64] = field(default_factory=lambda: np.zeros(3))
    velocity_std: float = 0.0
    landmark_bias: NDArray[np.float64] = field(default_factory=lambda: np.zeros((0, 3)))
    landmark_std: float = 0.0
    direction_bias: NDArray[np.float64] = field(default_factory=lambda: np.zeros((0, 3)))
    direction_std: float = 0.0
    seed: int = 0
    _streams: dict = field(default_factory=dict, init=False, repr=False, compare=False)

    def __post_init__(self) -> None:
        self.gyro_bias = np.asarray(self.gyro_bias, dtype=np.float64).reshape(3)
        self.velocity_bias = np.asarray(self.velocity_bias, dtype=np.float64).reshape(3)
        self.landmark_bias = np.asarray(self.landmark_bias, dtype=np.float64).reshape(-1, 3)
        self.direction_bias = np.asarray(self.direction_bias, dtype=np.float64).reshape(-1, 3)
        for name in ("gyro_std", "velocity_std", "landmark_std", "direction_std"):
            if getattr(self, name) < 0:
                raise InvalidArgument(f"{name} must be non-negative")

    @classmethod
    def reference(cls, seed: int = 0) -> CorruptionSpec:
        return cls(
            gyro_bias=0.1 * np.array([1.0, -1.0, 1.0]),
            gyro_std=0.15,
            velocity_bias=0.1 * np.array([2.0, 5.0, 1.0]),
            velocity_std=0.15,
            landmark_bias=0.1 * np.array([[1.5, 1.0, -1.0]]),
            landmark_std=0.1,
            direction_bias=0.1 * np.array([[-1.0, 1.0, 0.5], [0.0, 0.0, 1.0]]),
            direction_std=0.1,
            seed=seed,
        )

    @property
    def rate_bias(self) -> NDArray[np.float64]:
        return np.concatenate([self.gyro_bias, self.velocity_bias])

    def stream(self, sensor: str) -> np.random.Generator:
        """The generator owned by ``sensor``; created on first use."""
        gen = self._streams.get(sensor)
        if gen is None:
            ss = np.random.SeedSequence([int(self.seed) & 0xFFFFFFFF, int(self.seed) >> 32] + _sensor_entropy(sensor))
            gen = self._streams[sensor] = np.random.Generator(np.random.PCG64(ss))
        return gen

    def reset(self) -> None:
        self._streams.clear()

    def noise(self, sensor: str, std: float, size: int = 3) -> NDArray[np.float64]:
        # Draw even when std == 0 so streams stay aligned across configurations.
        return std * self.stream(sensor).standard_normal(size)

    def _bias_row(self, table: NDArray[np.float64], i: int) -> NDArray[np.float64]:
        return table[i] if i < len(table) else np.zeros(3)


@dataclass(frozen=True)
class MeasurementFrame:
    """Everything sampled at one sensor instant."""

    t: float
    landmarks_body: NDArray[np.float64]
    directions_body: NDArray[np.float64]
    directions_inertial: NDArray[np.float64]
    omega_m: NDArray[np.float64]
    v_m: NDArray[np.float64]
    directions_raw: NDArray[np.float64] | None = None

    @property
    def twist_m(self) -> NDArray[np.float64]:
        return np.concatenate([self.omega_m, self.v_m])


def measure_landmarks(T: Pose, landmarks: LandmarkSet, c: CorruptionSpec) -> NDArray[np.float64]:
    """Body-frame landmark vectors ``R^T (v_I - P) + b + noise``, shape (n, 3)."""
    out = (landmarks.points - T.P) @ T.R
    for i in range(len(out)):
        out[i] += c._bias_row(c.landmark_bias, i) + c.noise(f"landmark/{i}", c.landmark_std)
    return out


def _check_span(vectors: NDArray[np.float64]) -> None:
    norms = np.linalg.norm(vectors, axis=1)
    if np.any(norms == 0):
        raise DegenerateGeometry("zero-length direction vector")
    s = np.linalg.svd(vectors / norms[:, None], compute_uv=False)
    if s[1] <= _COLLINEAR_TOL * s[0]:
        raise DegenerateGeometry("reference directions are collinear")


def _normalize_rows(vectors: NDArray[np.float64]) -> NDArray[np.float64]:
    norms = np.linalg.norm(vectors, axis=1)
    if np.any(norms == 0):
        raise DegenerateGeometry("cannot normalize a zero-length direction")
    return vectors / norms[:, None]


def measure_direction_vectors(T: Pose, directions: DirectionSet, c: CorruptionSpec) -> NDArray[np.float64]:
    """Corrupted body-frame directions ``R^T v_I + b + noise`` before normalization."""
    body = directions.vectors @ T.R
    for i in range(len(body)):
        body[i] += c._bias_row(c.direction_bias, i) + c.noise(f"direction/{i}", c.direction_std)
    return body


def direction_pairs(
    body: ArrayLike, inertial: ArrayLike
) -> tuple[NDArray[np.float64], NDArray[np.float64]]:
    """Normalized pairs, with a synthesized cross-product pair when only two are given."""
    body = np.asarray(body, dtype=np.float64).reshape(-1, 3)
    inertial = np.asarray(inertial, dtype=np.float64).reshape(-1, 3)
    if len(inertial) == 2:
        inertial = np.vstack([inertial, np.cross(inertial[0], inertial[1])])
        body = np.vstack([body, np.cross(body[0], body[1])])
    return _normalize_rows(body), _normalize_rows(inertial)


def measure_directions(
    T: Pose, directions: DirectionSet, c: CorruptionSpec
) -> tuple[NDArray[np.float64], NDArray[np.float64]]:
    """Normalized (body, inertial) direction pairs.

    With exactly two references a third pair is appended: ``v1 x v2`` on the
    inertial side and the cross product of the two *corrupted* body vectors
    on the body side.

    Raises
    ------
    DegenerateGeometry
        If the inertial references are collinear.
    """
    _check_span(directions.vectors)
    return direction_pairs(measure_direction_vectors(T, directions, c), directions.vectors)


def weighted_center(vectors: ArrayLike, weights: ArrayLike) -> NDArray[np.float64]:
    """``sum(k_i v_i) / sum(k_i)``."""
    v = np.asarray(vectors, dtype=np.float64)
    k = np.asarray(weights, dtype=np.float64).reshape(-1)
    if v.size == 0 or k.size == 0:
        raise InvalidArgument("weighted_center needs at least one vector")
    v = v.reshape(-1, 3)
    if len(v) != len(k):
        raise InvalidArgument("vectors and weights differ in length")
    if np.any(k <= 0):
        raise InvalidArgument("weights must be positive")
    return (k @ v) / k.sum()


def measure_velocity(t: float, truth: ArrayLike, c: CorruptionSpec, dt: float) -> NDArray[np.float64]:
    """Measured twist ``[Omega + b_Omega + n, V + b_V + n]`` for one sample.

    ``c.gyro_std`` and ``c.velocity_std`` are per-sample STDs at the sampling
    interval ``dt``; ``t`` is only validated.
    """
    if dt <= 0:
        raise InvalidArgument("dt must be positive")
    if t < 0:
        raise InvalidArgument("t must be non-negative")
    y = np.asarray(truth, dtype=np.float64).reshape(6)
    omega = y[:3] + c.gyro_bias + c.noise("gyro", c.gyro_std)
    v = y[3:] + c.velocity_bias + c.noise("velocity", c.velocity_std)
    return np.concatenate([omega, v])


def measure_frame(
    t: float,
    T: Pose,
    twist: ArrayLike,
    landmarks: LandmarkSet,
    directions: DirectionSet,
    c: CorruptionSpec,
    dt: float,
) -> MeasurementFrame:
    """Sample every sensor at the true pose ``T`` and twist."""
    lm = measure_landmarks(T, landmarks, c)
    _check_span(directions.vectors)
    raw = measure_direction_vectors(T, directions, c)
    body, inertial = direction_pairs(raw, directions.vectors)
    y_m = measure_velocity(t, twist, c, dt)
    return MeasurementFrame(t, lm, body, inertial, y_m[:3], y_m[3:], raw)
