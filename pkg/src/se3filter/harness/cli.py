"""Command-line entry point: ``se3filter simulate | validate | report``."""

from __future__ import annotations

import argparse
import sys
import time
from pathlib import Path

from ..errors import ConfigError, DegenerateGeometry, InvalidArgument, SingularAttitude
from .config import load_config, reference_config
from .outputs import OutputError, emit_outputs, report
from .runner import run_montecarlo

EXIT_OK, EXIT_CONFIG, EXIT_RUNTIME, EXIT_IO = 0, 1, 2, 3
# Names that select the bundled reference scenario when no such file exists.
BUNDLED = ("reference", "paper_sec5")


def _seeds(text: str) -> tuple[int, ...]:
    text = text.strip()
    try:
        if "," not in text:
            n = int(text)
            if n < 1:
                raise ValueError
            return tuple(range(n))
        return tuple(int(x) for x in text.split(",") if x.strip())
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected a count n >= 1 or a comma-separated list, got {text!r}")


def _load(path: str):
    if path in BUNDLED and not Path(path).exists():
        return reference_config()
    return load_config(path)


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="se3filter", description="Pose filter simulation harness.")
    sub = p.add_subparsers(dest="command", required=True)

    sim = sub.add_parser("simulate", help="run seeded simulations and write CSV outputs")
    sim.add_argument("--config", required=True, help="scenario INI file, or 'reference' for the bundled one")
    sim.add_argument("--seeds", type=_seeds, help="count n (seeds 0..n-1) or list '3,5,8'; overrides the config")
    sim.add_argument("--out", required=True, help="output directory")
    sim.add_argument("--filter", choices=("det", "stoch", "both"), help="overrides the config")
    sim.add_argument("--plots", action="store_true", help="also render PNG figures (needs matplotlib)")
    sim.add_argument("--workers", type=int, default=1, help="parallel processes (default 1)")

    val = sub.add_parser("validate", help="parse and validate a configuration")
    val.add_argument("--config", required=True)

    rep = sub.add_parser("report", help="recompute summary.csv from stored run CSVs")
    rep.add_argument("--out", required=True)
    return p


def _simulate(args) -> int:
    cfg = _load(args.config)
    changes = {}
    if args.seeds is not None:
        changes["seeds"] = args.seeds
    if args.filter is not None:
        changes["filters"] = args.filter
    if changes:
        cfg = cfg.replace(**changes)
    t0 = time.perf_counter()
    mc = run_montecarlo(cfg, workers=max(1, args.workers))
    for seed, msg in mc.failures.items():
        print(f"seed {seed} failed: {msg}", file=sys.stderr)
    if not mc.records:
        return EXIT_RUNTIME
    stats = mc.per_seed + [mc.pooled]
    paths = emit_outputs(mc.records, stats, args.out, plots=args.plots)
    p = mc.pooled
    for name in p.attdist:
        print(
            f"{name}: mean attdist {p.attdist[name].mean[0]:.3e} (std {p.attdist[name].std[0]:.3e}); "
            f"position error mean {p.pos_error[name].mean.round(4)} std {p.pos_error[name].std.round(4)}"
        )
    print(f"{len(mc.records)} run(s) in {time.perf_counter() - t0:.1f} s; wrote {len(paths)} files to {args.out}")
    return EXIT_RUNTIME if mc.failures else EXIT_OK


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.command == "simulate":
            return _simulate(args)
        if args.command == "validate":
            cfg = _load(args.config)
            print(f"ok: {cfg.duration:g} s at {cfg.sensor_rate:g} Hz, {len(cfg.seeds)} seed(s), filters={cfg.filters}")
            return EXIT_OK
        print(report(args.out), end="")
        return EXIT_OK
    except (ConfigError, InvalidArgument) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (SingularAttitude, DegenerateGeometry) as exc:
        print(f"runtime error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME
    except OSError as exc:
        print(f"I/O error: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
