"""CSV writers: per-run time series, the summary table and plot-ready data."""

from __future__ import annotations

import csv
import io
import re
from pathlib import Path
from typing import Sequence

import numpy as np

from .runner import WINDOW, MomentPair, RunRecord, SummaryStats, window_mask

TIMESERIES_COLUMNS = (
    ["t", "x", "y", "z", "xh", "yh", "zh", "roll", "pitch", "yaw", "rollh", "pitchh", "yawh"]
    + ["attdist", "ex", "ey", "ez"]
    + [f"bh{i}" for i in range(1, 7)]
    + [f"sh{i}" for i in range(1, 7)]
)
SUMMARY_COLUMNS = ["scope", "filter", "quantity", "statistic", "c1", "c2", "c3"]
PLOT_FILES = ("velocities.csv", "body_vectors.csv", "euler_angles.csv", "trajectory.csv", "errors.csv")
FLOAT_FMT = "%.12g"
_RUN_NAME = re.compile(r"run_(?P<filter>[a-z]+)_seed(?P<seed>\d+)\.csv$")


class OutputError(OSError):
    """A file could not be written or read; the message names the path."""


def run_filename(filter_name: str, seed: int) -> str:
    return f"run_{filter_name}_seed{seed}.csv"


def _table(header: Sequence[str], columns: Sequence[np.ndarray]) -> str:
    data = np.column_stack([np.asarray(c, dtype=np.float64).reshape(len(columns[0]), -1) for c in columns])
    if data.shape[1] != len(header):
        raise AssertionError("column count does not match header")
    buf = io.StringIO()
    np.savetxt(buf, data, fmt=FLOAT_FMT, delimiter=",", header=",".join(header), comments="")
    return buf.getvalue()


def timeseries_table(rec: RunRecord, filter_name: str) -> str:
    tr = rec.tracks[filter_name]
    cols = [rec.t, rec.P, tr.P_hat, rec.euler, tr.euler_hat, tr.attdist, tr.pos_error, tr.b_hat, tr.sigma_hat]
    return _table(TIMESERIES_COLUMNS, cols)


def _plot_tables(rec: RunRecord) -> dict[str, str]:
    names = list(rec.tracks)
    tw, twm = rec.twist, rec.twist_m
    vel = _table(
        ["t", "wx", "wy", "wz", "wxm", "wym", "wzm", "vx", "vy", "vz", "vxm", "vym", "vzm"],
        [rec.t, tw[:, :3], twm[:, :3], tw[:, 3:], twm[:, 3:]],
    )
    vec_header, vec_cols = ["t"], [rec.t]
    for i, label in enumerate(rec.vector_labels):
        vec_header += [f"{label}_{a}" for a in "xyz"] + [f"{label}_{a}m" for a in "xyz"]
        vec_cols += [rec.vectors_true[:, i], rec.vectors_meas[:, i]]
    eul_header = ["t", "roll", "pitch", "yaw"] + [f"{a}_{n}" for n in names for a in ("roll", "pitch", "yaw")]
    eul = _table(eul_header, [rec.t, rec.euler] + [rec.tracks[n].euler_hat for n in names])
    traj_header = ["t", "x", "y", "z"] + [f"{a}_{n}" for n in names for a in "xyz"]
    traj = _table(traj_header, [rec.t, rec.P] + [rec.tracks[n].P_hat for n in names])
    err_header = ["t"] + [f"{q}_{n}" for n in names for q in ("attdist", "poserr")]
    err_cols = [rec.t]
    for n in names:
        err_cols += [rec.tracks[n].attdist, np.linalg.norm(rec.tracks[n].pos_error, axis=1)]
    return dict(
        zip(PLOT_FILES, [vel, _table(vec_header, vec_cols), eul, traj, _table(err_header, err_cols)])
    )


def _fmt(x: float) -> str:
    return FLOAT_FMT % x


def _moment_rows(scope: str, filt: str, quantity: str, m: MomentPair) -> list[list[str]]:
    rows = []
    for stat, v in (("mean", m.mean), ("std", m.std)):
        vals = [_fmt(x) for x in np.atleast_1d(v)]
        rows.append([scope, filt, quantity, stat] + vals + [""] * (3 - len(vals)))
    return rows


def summary_rows(stats: Sequence[SummaryStats], outputs_only: bool = False) -> list[list[str]]:
    """Long-format table: one row per (scope, filter, quantity, statistic)."""
    rows = []
    for s in stats:
        scope = "pooled" if s.seed is None else f"seed{s.seed}"
        if not outputs_only:
            for label, m in s.inputs.items():
                rows += _moment_rows(scope, "", f"input_{label}", m)
        for name in s.attdist:
            rows += _moment_rows(scope, name, "attdist", s.attdist[name])
            rows += _moment_rows(scope, name, "position_error", s.pos_error[name])
    return rows


def summary_table(rows: list[list[str]]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(SUMMARY_COLUMNS)
    writer.writerows(rows)
    return buf.getvalue()


def _write(path: Path, text: str) -> None:
    try:
        with open(path, "w", newline="") as fh:
            fh.write(text)
    except OSError as exc:
        raise OutputError(f"{path}: {exc.strerror or exc}") from exc


def emit_outputs(records: Sequence[RunRecord], stats: Sequence[SummaryStats], outdir, plots: bool = False) -> list[Path]:
    """Write every output file and return their paths.

    Produces one time-series CSV per (filter, seed), ``summary.csv``, and
    the plot-ready files of the first record. All content is rendered
    before anything touches the disk.

    Raises
    ------
    ValueError
        If ``records`` is empty (nothing is written).
    OutputError
        On any I/O failure, naming the path.
    """
    if not records:
        raise ValueError("no run records to write")
    outdir = Path(outdir)
    files = {}
    for rec in records:
        for name in rec.tracks:
            files[run_filename(name, rec.seed)] = timeseries_table(rec, name)
    files["summary.csv"] = summary_table(summary_rows(stats))
    files.update(_plot_tables(records[0]))

    try:
        outdir.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        raise OutputError(f"{outdir}: {exc.strerror or exc}") from exc
    paths = []
    for fname, text in files.items():
        _write(outdir / fname, text)
        paths.append(outdir / fname)
    if plots:
        from .plots import render_plots

        paths += render_plots(outdir)
    return paths


def read_csv(path) -> tuple[list[str], np.ndarray]:
    path = Path(path)
    try:
        with open(path) as fh:
            header = fh.readline().strip().split(",")
            data = np.loadtxt(fh, delimiter=",", ndmin=2)
    except (OSError, ValueError) as exc:
        raise OutputError(f"{path}: {exc}") from exc
    return header, data


def report(outdir, window: tuple[float, float] = WINDOW) -> str:
    """Recompute the output rows of ``summary.csv`` from stored run CSVs.

    Input-error rows cannot be recovered from the time series; they are
    carried over from an existing ``summary.csv``. Returns the new table.
    """
    outdir = Path(outdir)
    runs = sorted(
        (int(m["seed"]), m["filter"], p) for p in outdir.glob("run_*.csv") if (m := _RUN_NAME.search(p.name))
    )
    if not runs:
        raise OutputError(f"{outdir}: no run_*.csv files found")
    per_seed: dict[int, dict] = {}
    pooled: dict[str, list] = {}
    for seed, filt, path in runs:
        header, data = read_csv(path)
        if header != TIMESERIES_COLUMNS:
            raise OutputError(f"{path}: unexpected header")
        mask = window_mask(data[:, 0], window)
        att = data[mask, header.index("attdist")]
        pe = data[mask][:, [header.index(c) for c in ("ex", "ey", "ez")]]
        per_seed.setdefault(seed, {})[filt] = (att, pe)
        pooled.setdefault(filt, []).append((att, pe))

    def stats_of(seed, by_filter):
        return SummaryStats(
            seed,
            {},
            {f: MomentPair.of(a) for f, (a, _) in by_filter.items()},
            {f: MomentPair.of(p) for f, (_, p) in by_filter.items()},
            0,
        )

    stats = [stats_of(s, per_seed[s]) for s in sorted(per_seed)]
    stats.append(
        stats_of(None, {f: (np.concatenate([a for a, _ in v]), np.concatenate([p for _, p in v])) for f, v in pooled.items()})
    )
    rows = summary_rows(stats, outputs_only=True)
    old = outdir / "summary.csv"
    if old.exists():
        with open(old, newline="") as fh:
            kept = [r for r in csv.reader(fh)][1:]
        rows = [r for r in kept if r[2].startswith("input_")] + rows
    text = summary_table(rows)
    _write(old, text)
    return text
