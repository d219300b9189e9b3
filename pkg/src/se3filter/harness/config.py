"""Scenario configuration: an INI document of flat key/value sections.

Vectors are comma-separated; lists of vectors separate rows with ``;``.
Angles are written in degrees and converted when the domain objects are
built. Every key is optional and defaults to the bundled reference
scenario, but unknown sections and keys are rejected.
"""

from __future__ import annotations

import configparser
import dataclasses
import io
import re
from dataclasses import dataclass
from importlib import resources
from pathlib import Path

import numpy as np

from ..errors import ConfigError, InvalidArgument
from ..filters import STOCHASTIC_GAIN_PRODUCT_MIN, FilterGains
from ..lie import Pose, angle_axis_to_rotation
from ..sensors import CorruptionSpec, DirectionSet, LandmarkSet
from ..truth import SignalSpec

Vec = tuple[float, ...]
FILTER_CHOICES = ("det", "stoch", "both")


@dataclass(frozen=True)
class SimConfig:
    # [simulation]
    duration: float = 30.0
    truth_dt: float = 1e-3
    sensor_rate: float = 100.0
    seeds: tuple[int, ...] = (0,)
    filters: str = "both"
    # [signals]
    omega_amplitude: Vec = (1.0, 0.7, 0.5)
    omega_frequency: Vec = (0.3, 0.25, 0.2)
    omega_phase_deg: Vec = (0.0, 180.0, 60.0)
    velocity_amplitude: Vec = (1.0, 0.6, 1.0)
    velocity_frequency: Vec = (0.2, 0.15, 0.25)
    velocity_phase_deg: Vec = (0.0, 90.0, 45.0)
    # [landmarks]
    landmark_points: tuple[Vec, ...] = ((0.5, 2.0**0.5, 1.0),)
    landmark_weights: Vec = (1.0,)
    # [directions]
    direction_vectors: tuple[Vec, ...] = ((1 / 3.0**0.5, -1 / 3.0**0.5, 1 / 3.0**0.5), (0.0, 0.0, 1.0))
    wahba_weights: Vec = ()
    # [corruption]
    gyro_bias: Vec = (0.1, -0.1, 0.1)
    gyro_std: float = 0.15
    velocity_bias: Vec = (0.2, 0.5, 0.1)
    velocity_std: float = 0.15
    landmark_bias: tuple[Vec, ...] = ((0.15, 0.1, -0.1),)
    landmark_std: float = 0.1
    direction_bias: tuple[Vec, ...] = ((-0.1, 0.1, 0.05), (0.0, 0.0, 0.1))
    direction_std: float = 0.1
    # [gains]
    gamma: float = 1.0
    pi_bar: float = 1.0
    k_b: float = 0.1
    k_sigma: float = 0.1
    k_p: float = 2.0
    k_w: float = 3.0
    epsilon: float = 0.5
    # [initial]
    attitude_angle_deg: float = 0.0
    attitude_axis: Vec = (0.0, 0.0, 1.0)
    position: Vec = (0.0, 0.0, 0.0)
    estimate_angle_deg: float = 170.0
    estimate_axis: Vec = (3.0, 10.0, 8.0)
    estimate_position: Vec = (2.0, 3.0, 1.0)

    # ---- derived domain objects -------------------------------------------------

    @property
    def sensor_dt(self) -> float:
        return 1.0 / self.sensor_rate

    @property
    def substeps(self) -> int:
        return int(round(self.sensor_dt / self.truth_dt))

    @property
    def n_samples(self) -> int:
        return int(round(self.duration * self.sensor_rate))

    @property
    def filter_names(self) -> tuple[str, ...]:
        return ("det", "stoch") if self.filters == "both" else (self.filters,)

    def signal_spec(self) -> SignalSpec:
        return SignalSpec(
            self.omega_amplitude, self.omega_frequency, np.radians(self.omega_phase_deg),
            self.velocity_amplitude, self.velocity_frequency, np.radians(self.velocity_phase_deg),
        )  # fmt: skip

    def landmark_set(self) -> LandmarkSet:
        return LandmarkSet(np.array(self.landmark_points), np.array(self.landmark_weights))

    def direction_set(self) -> DirectionSet:
        return DirectionSet(np.array(self.direction_vectors))

    def corruption(self, seed: int) -> CorruptionSpec:
        return CorruptionSpec(
            gyro_bias=self.gyro_bias,
            gyro_std=self.gyro_std,
            velocity_bias=self.velocity_bias,
            velocity_std=self.velocity_std,
            landmark_bias=np.array(self.landmark_bias).reshape(-1, 3),
            landmark_std=self.landmark_std,
            direction_bias=np.array(self.direction_bias).reshape(-1, 3),
            direction_std=self.direction_std,
            seed=seed,
        )

    def gains(self) -> FilterGains:
        return FilterGains(self.gamma, self.pi_bar, self.k_b, self.k_sigma, self.k_p, self.k_w, self.epsilon)

    @staticmethod
    def _pose(angle_deg: float, axis: Vec, position: Vec) -> Pose:
        u = np.asarray(axis, dtype=np.float64)
        return Pose(angle_axis_to_rotation(np.radians(angle_deg), u / np.linalg.norm(u)), position)

    def initial_pose(self) -> Pose:
        return self._pose(self.attitude_angle_deg, self.attitude_axis, self.position)

    def initial_estimate(self) -> Pose:
        return self._pose(self.estimate_angle_deg, self.estimate_axis, self.estimate_position)

    @property
    def rate_bias(self) -> np.ndarray:
        return np.array(self.gyro_bias + self.velocity_bias)

    @property
    def sigma_bound(self) -> np.ndarray:
        """Upper bound of the rate-noise covariance implied by the per-sample STDs."""
        return np.array([self.gyro_std**2] * 3 + [self.velocity_std**2] * 3) * self.sensor_dt

    def replace(self, **changes) -> SimConfig:
        cfg = dataclasses.replace(self, **changes)
        validate(cfg)
        return cfg


# Field name -> (section, kind). Kinds: float, int_list, str, vec, vec_list, vec_any.
SCHEMA: dict[str, tuple[str, str]] = {
    "duration": ("simulation", "float"),
    "truth_dt": ("simulation", "float"),
    "sensor_rate": ("simulation", "float"),
    "seeds": ("simulation", "int_list"),
    "filters": ("simulation", "str"),
    "omega_amplitude": ("signals", "vec"),
    "omega_frequency": ("signals", "vec"),
    "omega_phase_deg": ("signals", "vec"),
    "velocity_amplitude": ("signals", "vec"),
    "velocity_frequency": ("signals", "vec"),
    "velocity_phase_deg": ("signals", "vec"),
    "landmark_points": ("landmarks", "vec_list"),
    "landmark_weights": ("landmarks", "vec_any"),
    "direction_vectors": ("directions", "vec_list"),
    "wahba_weights": ("directions", "vec_any"),
    "gyro_bias": ("corruption", "vec"),
    "gyro_std": ("corruption", "float"),
    "velocity_bias": ("corruption", "vec"),
    "velocity_std": ("corruption", "float"),
    "landmark_bias": ("corruption", "vec_list"),
    "landmark_std": ("corruption", "float"),
    "direction_bias": ("corruption", "vec_list"),
    "direction_std": ("corruption", "float"),
    "gamma": ("gains", "float"),
    "pi_bar": ("gains", "float"),
    "k_b": ("gains", "float"),
    "k_sigma": ("gains", "float"),
    "k_p": ("gains", "float"),
    "k_w": ("gains", "float"),
    "epsilon": ("gains", "float"),
    "attitude_angle_deg": ("initial", "float"),
    "attitude_axis": ("initial", "vec"),
    "position": ("initial", "vec"),
    "estimate_angle_deg": ("initial", "float"),
    "estimate_axis": ("initial", "vec"),
    "estimate_position": ("initial", "vec"),
}
SECTIONS = tuple(dict.fromkeys(sec for sec, _ in SCHEMA.values()))
# Keys are written without the section prefix where it is redundant.
_KEY_ALIASES = {"landmark_points": "points", "landmark_weights": "weights", "direction_vectors": "vectors"}
_FIELD_FOR_KEY = {(SCHEMA[f][0], _KEY_ALIASES.get(f, f)): f for f in SCHEMA}


def _floats(text: str) -> tuple[float, ...]:
    text = text.strip()
    if not text:
        return ()
    return tuple(float(x) for x in text.split(","))


def _parse(kind: str, text: str):
    if kind == "float":
        return float(text)
    if kind == "str":
        return text.strip()
    if kind == "int_list":
        text = text.strip()
        if re.fullmatch(r"\d+", text):
            return tuple(range(int(text)))
        return tuple(int(x) for x in text.split(",") if x.strip())
    if kind == "vec":
        v = _floats(text)
        if len(v) != 3:
            raise ValueError(f"expected 3 comma-separated numbers, got {len(v)}")
        return v
    if kind == "vec_any":
        return _floats(text)
    if kind == "vec_list":
        rows = tuple(_floats(row) for row in text.split(";") if row.strip())
        if any(len(r) != 3 for r in rows):
            raise ValueError("each ';'-separated row needs 3 numbers")
        return rows
    raise AssertionError(kind)


def _format(kind: str, value) -> str:
    if kind == "float":
        return repr(float(value))
    if kind == "str":
        return value
    if kind == "int_list":
        # A bare integer n means seeds 0..n-1, so a single seed keeps a trailing comma.
        return ", ".join(str(int(x)) for x in value) + ("," if len(value) == 1 else "")
    if kind in ("vec", "vec_any"):
        return ", ".join(repr(float(x)) for x in value)
    return "; ".join(", ".join(repr(float(x)) for x in row) for row in value)


def _line_of(text: str, section: str, key: str) -> int | None:
    current = None
    for lineno, line in enumerate(text.splitlines(), 1):
        stripped = line.strip()
        m = re.fullmatch(r"\[(.+)\]", stripped)
        if m:
            current = m.group(1).strip()
        elif current == section and re.match(rf"{re.escape(key)}\s*[=:]", stripped):
            return lineno
    return None


def loads(text: str, source: str = "<string>") -> SimConfig:
    """Parse and validate a configuration document."""
    parser = configparser.ConfigParser(interpolation=None, inline_comment_prefixes=("#",))
    parser.optionxform = str  # keep key case
    try:
        parser.read_string(text, source=source)
    except configparser.Error as exc:
        raise ConfigError(f"{source}: parse error: {exc}") from exc
    if not parser.sections():
        raise ConfigError(f"{source}: parse error: no sections found (empty configuration)")

    values = {}
    for section in parser.sections():
        if section not in SECTIONS:
            raise ConfigError(f"{source}: unknown section [{section}]")
        for key, raw in parser.items(section):
            name = _FIELD_FOR_KEY.get((section, key))
            if name is None:
                line = _line_of(text, section, key)
                where = f" (line {line})" if line else ""
                raise ConfigError(f"{source}{where}: unknown key '{key}' in [{section}]")
            try:
                values[name] = _parse(SCHEMA[name][1], raw)
            except ValueError as exc:
                line = _line_of(text, section, key)
                where = f" (line {line})" if line else ""
                raise ConfigError(f"{source}{where}: [{section}] {key}: {exc}") from exc
    cfg = SimConfig(**values)
    validate(cfg)
    return cfg


def load_config(path: str | Path) -> SimConfig:
    """Read and validate a configuration file."""
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ConfigError(f"{path}: cannot read configuration: {exc}") from exc
    return loads(text, source=str(path))


def dumps(cfg: SimConfig) -> str:
    """Serialize; ``loads(dumps(cfg)) == cfg`` exactly."""
    parser = configparser.ConfigParser(interpolation=None)
    parser.optionxform = str
    for section in SECTIONS:
        parser.add_section(section)
    for name, (section, kind) in SCHEMA.items():
        parser.set(section, _KEY_ALIASES.get(name, name), _format(kind, getattr(cfg, name)))
    buf = io.StringIO()
    parser.write(buf)
    return buf.getvalue()


def reference_config_text() -> str:
    return resources.files("se3filter").joinpath("data/reference.ini").read_text()


def reference_config() -> SimConfig:
    """The bundled reference scenario."""
    return loads(reference_config_text(), source="reference.ini")


def _fail(name: str, message: str) -> ConfigError:
    section, _ = SCHEMA[name]
    return ConfigError(f"[{section}] {_KEY_ALIASES.get(name, name)}: {message}")


def validate(cfg: SimConfig) -> None:
    """Check every cross-field invariant; raise :class:`ConfigError` naming the field."""
    for name in ("duration", "truth_dt", "sensor_rate"):
        if not getattr(cfg, name) > 0:
            raise _fail(name, "must be positive")
    ratio = cfg.sensor_dt / cfg.truth_dt
    if abs(ratio - round(ratio)) > 1e-9 * ratio or round(ratio) < 1:
        raise _fail("sensor_rate", "sensor period must be an integer multiple of truth_dt")
    steps = cfg.duration * cfg.sensor_rate
    if abs(steps - round(steps)) > 1e-9 * max(steps, 1.0):
        raise _fail("duration", "must be a whole number of sensor periods")
    if not cfg.seeds:
        raise _fail("seeds", "at least one seed is required")
    if any(s < 0 for s in cfg.seeds):
        raise _fail("seeds", "seeds must be non-negative")
    if len(set(cfg.seeds)) != len(cfg.seeds):
        raise _fail("seeds", "seeds must be distinct")
    if cfg.filters not in FILTER_CHOICES:
        raise _fail("filters", f"must be one of {', '.join(FILTER_CHOICES)}")
    for name in ("gyro_std", "velocity_std", "landmark_std", "direction_std"):
        if getattr(cfg, name) < 0:
            raise _fail(name, "must be non-negative")
    for name in ("omega_frequency", "velocity_frequency"):
        if min(getattr(cfg, name)) < 0:
            raise _fail(name, "frequencies must be non-negative")
    if not cfg.landmark_points:
        raise _fail("landmark_points", "at least one landmark is required")
    if len(cfg.landmark_weights) != len(cfg.landmark_points) or min(cfg.landmark_weights) <= 0:
        raise _fail("landmark_weights", "one positive weight per landmark is required")
    if len(cfg.direction_vectors) < 2:
        raise _fail("direction_vectors", "at least two reference directions are required")
    n_pairs = len(cfg.direction_vectors) + (1 if len(cfg.direction_vectors) == 2 else 0)
    if cfg.wahba_weights and (len(cfg.wahba_weights) != n_pairs or min(cfg.wahba_weights) <= 0):
        raise _fail("wahba_weights", f"needs {n_pairs} positive weights (synthesized third pair included)")
    if len(cfg.landmark_bias) > len(cfg.landmark_points):
        raise _fail("landmark_bias", "more bias rows than landmarks")
    if len(cfg.direction_bias) > len(cfg.direction_vectors):
        raise _fail("direction_bias", "more bias rows than reference directions")
    for name in ("attitude_axis", "estimate_axis"):
        if np.linalg.norm(getattr(cfg, name)) == 0:
            raise _fail(name, "rotation axis must be non-zero")
    try:
        gains = cfg.gains()
    except InvalidArgument as exc:
        raise ConfigError(f"[gains] {exc}") from exc
    if cfg.filters in ("stoch", "both") and not gains.k_p * gains.k_w > STOCHASTIC_GAIN_PRODUCT_MIN:
        raise ConfigError(
            f"[gains] k_p * k_w = {gains.k_p * gains.k_w:g} must exceed {STOCHASTIC_GAIN_PRODUCT_MIN} "
            "when the stochastic filter is selected"
        )
    try:
        from ..sensors import _check_span

        _check_span(np.array(cfg.direction_vectors))
    except Exception as exc:  # DegenerateGeometry
        raise _fail("direction_vectors", str(exc)) from exc
