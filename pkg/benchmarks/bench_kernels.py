"""Per-step cost of the compiled kernels against the numpy fallback.

Run with ``python benchmarks/bench_kernels.py``. Prints microseconds per call
and the speed ratio for each kernel.
"""

import argparse
import timeit

import numpy as np

from se3filter import _backend
from se3filter.lie import Pose, rodriguez_to_rotation

GAINS_DET = (1.0, 0.1, 2.0, 3.0)
GAINS_STOCH = (1.0, 1.0, 0.1, 0.1, 2.0, 3.0, 0.5)


def cases():
    rng = np.random.default_rng(0)
    T_hat = Pose(rodriguez_to_rotation(rng.standard_normal(3)), rng.standard_normal(3))
    T_y = Pose(rodriguez_to_rotation(rng.standard_normal(3)), rng.standard_normal(3))
    b, s, y = 0.1 * rng.standard_normal(6), rng.uniform(0, 0.1, 6), rng.standard_normal(6)
    twists = rng.standard_normal((10, 6))
    return {
        "se3_exp": lambda k: k.se3_exp(y[:3], y[3:], 1e-3),
        "integrate_truth (10 substeps)": lambda k: k.integrate_truth(T_hat.R, T_hat.P, twists, 1e-3),
        "det_step": lambda k: k.det_step(T_hat.R, T_hat.P, b, T_y.R, T_y.P, y, *GAINS_DET, 0.01),
        "stoch_step": lambda k: k.stoch_step(T_hat.R, T_hat.P, b, s, T_y.R, T_y.P, y, *GAINS_STOCH, 0.01),
    }


def per_call_us(fn, kernels, number):
    return min(timeit.repeat(lambda: fn(kernels), number=number, repeat=5)) / number * 1e6


def main():
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--number", type=int, default=2000, help="calls per timing repeat")
    args = p.parse_args()
    if _backend.compiled_kernels is None:
        raise SystemExit("compiled extension not available; build with `pip install -e . --no-build-isolation`")
    print(f"{'kernel':32s} {'python us':>10s} {'compiled us':>12s} {'speedup':>8s}")
    for name, fn in cases().items():
        slow = per_call_us(fn, _backend.python_kernels, args.number)
        fast = per_call_us(fn, _backend.compiled_kernels, args.number)
        print(f"{name:32s} {slow:10.2f} {fast:12.2f} {slow / fast:7.1f}x")


if __name__ == "__main__":
    main()
