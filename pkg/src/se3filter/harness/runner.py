"""Seeded end-to-end runs and Monte Carlo aggregation."""

from __future__ import annotations

from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np
from numpy.typing import NDArray

from ..errors import DegenerateGeometry, SingularAttitude
from ..filters import FilterState, det_step, stoch_step
from ..recon import reconstruct_pose
from ..sensors import measure_frame
from ..truth import TruthPropagator, true_twist, true_twists
from .config import SimConfig

STEPPERS = {"det": det_step, "stoch": stoch_step}
WINDOW = (1.0, 30.0)


def euler_zyx(R: NDArray[np.float64]) -> NDArray[np.float64]:
    """(roll, pitch, yaw) with ``R = Rz(yaw) Ry(pitch) Rx(roll)``; R may be stacked (..., 3, 3)."""
    R = np.asarray(R, dtype=np.float64)
    roll = np.arctan2(R[..., 2, 1], R[..., 2, 2])
    pitch = -np.arcsin(np.clip(R[..., 2, 0], -1.0, 1.0))
    yaw = np.arctan2(R[..., 1, 0], R[..., 0, 0])
    return np.stack([roll, pitch, yaw], axis=-1)


def rotation_from_euler_zyx(angles) -> NDArray[np.float64]:
    """Inverse of :func:`euler_zyx`; ``angles`` may be stacked (..., 3)."""
    a = np.asarray(angles, dtype=np.float64)
    r, p, y = a[..., 0], a[..., 1], a[..., 2]
    cr, sr, cp, sp, cy, sy = np.cos(r), np.sin(r), np.cos(p), np.sin(p), np.cos(y), np.sin(y)
    R = np.stack([
        cy * cp, cy * sp * sr - sy * cr, cy * sp * cr + sy * sr,
        sy * cp, sy * sp * sr + cy * cr, sy * sp * cr - cy * sr,
        -sp, cp * sr, cp * cr,
    ], axis=-1)  # fmt: skip
    return R.reshape(a.shape[:-1] + (3, 3))


def attitude_distance(R: NDArray[np.float64], R_hat: NDArray[np.float64]) -> NDArray[np.float64]:
    """``||R R_hat^T||_I`` for stacked rotations."""
    return (3.0 - np.einsum("...ij,...ij->...", R, R_hat)) / 4.0


@dataclass
class Track:
    """One filter's estimates along a run, sampled at the sensor rate."""

    name: str
    R_hat: NDArray[np.float64]
    P_hat: NDArray[np.float64]
    b_hat: NDArray[np.float64]
    sigma_hat: NDArray[np.float64]
    attdist: NDArray[np.float64] = field(init=False)
    pos_error: NDArray[np.float64] = field(init=False)
    V_det: NDArray[np.float64] = field(init=False)
    V_stoch: NDArray[np.float64] = field(init=False)

    @property
    def euler_hat(self) -> NDArray[np.float64]:
        return euler_zyx(self.R_hat)


@dataclass
class RunRecord:
    """Truth, measurements and per-filter estimates of one seeded run.

    Every filter in ``tracks`` consumed the same measurement stream.
    ``vectors_true`` / ``vectors_meas`` hold the body-frame landmark vectors
    followed by the (unnormalized) direction vectors, labelled by
    ``vector_labels``.
    """

    seed: int
    t: NDArray[np.float64]
    R: NDArray[np.float64]
    P: NDArray[np.float64]
    twist: NDArray[np.float64]
    twist_m: NDArray[np.float64]
    vectors_true: NDArray[np.float64]
    vectors_meas: NDArray[np.float64]
    vector_labels: tuple[str, ...]
    tracks: dict[str, Track]

    @property
    def euler(self) -> NDArray[np.float64]:
        return euler_zyx(self.R)


def _finish_track(track: Track, rec: RunRecord, cfg: SimConfig) -> None:
    g = cfg.gains()
    R_t = np.einsum("nij,nkj->nik", rec.R, track.R_hat)
    track.attdist = attitude_distance(rec.R, track.R_hat)
    track.pos_error = rec.P - track.P_hat
    P_t = rec.P - np.einsum("nij,nj->ni", R_t, track.P_hat)
    p2 = np.sum(P_t**2, axis=1)
    b_t = cfg.rate_bias - track.b_hat
    s_t = cfg.sigma_bound - track.sigma_hat
    bb = 0.5 * np.sum(b_t**2, axis=1) / g.gamma
    # The attitude potential (|rho|^2 / (1 + |rho|^2))^2 equals ||R~||_I^2.
    track.V_det = track.attdist**2 + 2.0 * p2 + bb
    track.V_stoch = track.attdist**2 + p2**2 + bb + 0.5 * np.sum(s_t**2, axis=1) / g.pi_bar


def run_once(cfg: SimConfig, seed: int, filters: tuple[str, ...] | None = None) -> RunRecord:
    """Simulate truth, sensors, reconstruction and the selected filters for one seed.

    Truth is integrated at ``cfg.truth_dt`` with the twist held over each
    substep; sensors and filters run at ``cfg.sensor_rate``. Row ``k`` holds
    the state at ``t = k / rate`` before the filter consumes sample ``k``.

    Raises
    ------
    DegenerateGeometry, SingularAttitude
        Re-raised with the simulation time prepended to the message.
    """
    names = tuple(filters or cfg.filter_names)
    spec, lms, dirs, g = cfg.signal_spec(), cfg.landmark_set(), cfg.direction_set(), cfg.gains()
    corruption = cfg.corruption(seed)
    weights = np.array(cfg.wahba_weights) if cfg.wahba_weights else None
    n, m, dt_s, dt_t = cfg.n_samples, cfg.substeps, cfg.sensor_dt, cfg.truth_dt
    n_lm, n_dir = len(lms.points), len(dirs.vectors)
    rows = n + 1

    t = np.arange(rows) * dt_s
    R, P = np.empty((rows, 3, 3)), np.empty((rows, 3))
    twist, twist_m = np.empty((rows, 6)), np.empty((rows, 6))
    v_true, v_meas = np.empty((rows, n_lm + n_dir, 3)), np.empty((rows, n_lm + n_dir, 3))
    est = {k: (np.empty((rows, 3, 3)), np.empty((rows, 3)), np.empty((rows, 6)), np.empty((rows, 6))) for k in names}

    truth = TruthPropagator(cfg.initial_pose())
    states = {k: FilterState(cfg.initial_estimate()) for k in names}
    sub_t = np.arange(m) * dt_t
    for k in range(rows):
        T = truth.pose
        y = true_twist(t[k], spec)
        try:
            frame = measure_frame(t[k], T, y, lms, dirs, corruption, dt_s)
            T_y = reconstruct_pose(frame, lms, weights)
        except (DegenerateGeometry, SingularAttitude) as exc:
            raise type(exc)(f"t = {t[k]:.6f} s: {exc}") from exc
        R[k], P[k], twist[k], twist_m[k] = T.R, T.P, y, frame.twist_m
        v_true[k, :n_lm] = (lms.points - T.P) @ T.R
        v_true[k, n_lm:] = dirs.vectors @ T.R
        v_meas[k, :n_lm] = frame.landmarks_body
        v_meas[k, n_lm:] = frame.directions_raw
        for name in names:
            s = states[name]
            buf = est[name]
            buf[0][k], buf[1][k], buf[2][k], buf[3][k] = s.T_hat.R, s.T_hat.P, s.b_hat, s.sigma_hat
        if k == n:
            break
        for name in names:
            states[name] = STEPPERS[name](states[name], T_y, frame.twist_m, g, dt_s)
        truth.advance(true_twists(t[k] + sub_t, spec), dt_t)

    labels = tuple(f"landmark{i + 1}" for i in range(n_lm)) + tuple(f"direction{i + 1}" for i in range(n_dir))
    tracks = {name: Track(name, *est[name]) for name in names}
    rec = RunRecord(int(seed), t, R, P, twist, twist_m, v_true, v_meas, labels, tracks)
    for tr in tracks.values():
        _finish_track(tr, rec, cfg)
    return rec


# ---- statistics -----------------------------------------------------------------------


def window_mask(t: NDArray[np.float64], window: tuple[float, float] = WINDOW) -> NDArray[np.bool_]:
    """Samples with ``window[0] <= t <= window[1]``, robust to float rounding of the grid."""
    eps = 1e-9
    return (t >= window[0] - eps) & (t <= window[1] + eps)


@dataclass
class MomentPair:
    mean: NDArray[np.float64]
    std: NDArray[np.float64]

    @classmethod
    def of(cls, samples: NDArray[np.float64]) -> MomentPair:
        if len(samples) == 0:
            nan = np.full(samples.shape[1:] or (1,), np.nan)
            return cls(nan, nan.copy())
        return cls(np.atleast_1d(samples.mean(axis=0)), np.atleast_1d(samples.std(axis=0)))


@dataclass
class SummaryStats:
    """Table-style statistics of one run (or of pooled runs).

    ``inputs`` maps a measurement label (``landmark1``, ``direction1``,
    ``omega``, ``velocity``) to the moments of its error ``measured - true``
    over the whole run. ``attdist`` and ``pos_error`` map a filter name to
    the moments of ``||R~||_I`` and ``P - P_hat`` over the summary window.
    """

    seed: int | None
    inputs: dict[str, MomentPair]
    attdist: dict[str, MomentPair]
    pos_error: dict[str, MomentPair]
    samples: int


def _input_samples(rec: RunRecord) -> dict[str, NDArray[np.float64]]:
    err = rec.vectors_meas - rec.vectors_true
    out = {label: err[:, i] for i, label in enumerate(rec.vector_labels)}
    dy = rec.twist_m - rec.twist
    out["omega"], out["velocity"] = dy[:, :3], dy[:, 3:]
    return out


def _output_samples(rec: RunRecord, window) -> dict[str, tuple[NDArray[np.float64], NDArray[np.float64]]]:
    mask = window_mask(rec.t, window)
    return {name: (tr.attdist[mask], tr.pos_error[mask]) for name, tr in rec.tracks.items()}


def _stats(seed, inputs, outputs) -> SummaryStats:
    return SummaryStats(
        seed,
        {k: MomentPair.of(v) for k, v in inputs.items()},
        {k: MomentPair.of(a) for k, (a, _) in outputs.items()},
        {k: MomentPair.of(p) for k, (_, p) in outputs.items()},
        int(next(iter(outputs.values()))[0].size) if outputs else 0,
    )


def summarize(rec: RunRecord, window: tuple[float, float] = WINDOW) -> SummaryStats:
    return _stats(rec.seed, _input_samples(rec), _output_samples(rec, window))


def pool(records: list[RunRecord], window: tuple[float, float] = WINDOW) -> SummaryStats:
    """Moments of all samples of all runs taken together."""
    if not records:
        raise ValueError("nothing to pool")
    ins = [_input_samples(r) for r in records]
    outs = [_output_samples(r, window) for r in records]
    inputs = {k: np.concatenate([d[k] for d in ins]) for k in ins[0]}
    outputs = {
        k: (np.concatenate([o[k][0] for o in outs]), np.concatenate([o[k][1] for o in outs])) for k in outs[0]
    }
    return _stats(None, inputs, outputs)


@dataclass
class MonteCarloResult:
    records: list[RunRecord]
    per_seed: list[SummaryStats]
    pooled: SummaryStats | None
    failures: dict[int, str]

    @property
    def ok(self) -> bool:
        return not self.failures


def _run_seed(args):
    cfg, seed, filters = args
    try:
        return seed, run_once(cfg, seed, filters), None
    except Exception as exc:  # reported per seed, the rest still run
        return seed, None, f"{type(exc).__name__}: {exc}"


def run_montecarlo(
    cfg: SimConfig,
    seeds=None,
    filters: tuple[str, ...] | None = None,
    workers: int = 1,
    window: tuple[float, float] = WINDOW,
) -> MonteCarloResult:
    """Run every seed, then reduce in seed order.

    Seeds run in ``workers`` processes when ``workers > 1``. A failing seed
    is recorded in ``failures`` and excluded from the pooled statistics.
    """
    seeds = list(cfg.seeds if seeds is None else seeds)
    if not seeds:
        raise ValueError("at least one seed is required")
    jobs = [(cfg, s, filters) for s in seeds]
    if workers > 1 and len(seeds) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool_:
            results = list(pool_.map(_run_seed, jobs))
    else:
        results = [_run_seed(j) for j in jobs]
    records = [r for _, r, _ in results if r is not None]
    failures = {s: msg for s, _, msg in results if msg is not None}
    per_seed = [summarize(r, window) for r in records]
    pooled = pool(records, window) if records else None
    return MonteCarloResult(records, per_seed, pooled, failures)
