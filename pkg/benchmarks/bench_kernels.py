#!/usr/bin/env python3
"""Timing comparison of the pure NumPy and compiled kernel backends.

Run from the repository root after an editable install:

    python3 benchmarks/bench_kernels.py [--repeats 5] [--iters 2000]

For each problem size the two hot loops are timed on identical inputs
(best wall-clock of --repeats runs) and the deviation between the
backends is reported alongside the speedup. The descent loop is expected
to deviate by exactly 0.0 (same BLAS calls in the same order); the RK4
loop uses plain C loops and agrees to rounding error only.
"""

import argparse
import time

import numpy as np

from ctrlgrad import kernels


def best_of(fn, repeats):
    best = float("inf")
    for _ in range(repeats):
        t0 = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - t0)
    return best


def bench_descent(pure, fast, n, iters, repeats, rng):
    G = rng.standard_normal((n, n))
    A = G @ G.T / n
    b = rng.standard_normal(n)
    B = rng.standard_normal((n, 2))
    gain = 0.1 * rng.standard_normal((2, n))
    x0 = rng.standard_normal(n)
    gamma = 1.0 / np.linalg.eigvalsh(A)[-1]
    args = (A, b, 0.0, B, x0, gamma, gamma, kernels.POLICY_GRAD_FB,
            np.zeros(2), gain, np.zeros((0, 2)), iters, 0.0, None)
    t_pure = best_of(lambda: pure.descent_loop(*args), repeats)
    t_fast = best_of(lambda: fast.descent_loop(*args), repeats)
    diff = np.max(np.abs(pure.descent_loop(*args)[4] - fast.descent_loop(*args)[4]))
    return t_pure, t_fast, diff


def bench_rk4(pure, fast, n, steps, repeats, rng):
    M = -np.abs(rng.standard_normal((n, n))) / n
    W = rng.standard_normal((3 * steps, n))
    x0 = rng.standard_normal(n)
    h = 1.0 / steps
    t_pure = best_of(lambda: pure.rk4_lti(M, W, x0, h, steps), repeats)
    t_fast = best_of(lambda: fast.rk4_lti(M, W, x0, h, steps), repeats)
    diff = np.max(np.abs(pure.rk4_lti(M, W, x0, h, steps)
                         - fast.rk4_lti(M, W, x0, h, steps)))
    return t_pure, t_fast, diff


def _row(n, t_pure, t_fast, diff):
    print(f"{n:6d}  {1e3 * t_pure:10.2f}  {1e3 * t_fast:10.2f}  "
          f"{t_pure / t_fast:7.1f}x  {diff:9.1e}")


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeats", type=int, default=5)
    ap.add_argument("--iters", type=int, default=2000,
                    help="descent iterations / RK4 steps per timing")
    ap.add_argument("--sizes", default="4,16,64,256",
                    help="comma-separated state dimensions")
    args = ap.parse_args()

    print(f"backend selected at import: {kernels.BACKEND}")
    try:
        fast = kernels.get_backend("compiled")
    except ImportError:
        raise SystemExit("compiled extension not built; nothing to compare "
                         "(run pip install -e . first)")
    pure = kernels.get_backend("pure")
    sizes = [int(s) for s in args.sizes.split(",")]
    rng = np.random.default_rng(0)

    header = f"{'n':>6}  {'pure (ms)':>10}  {'fast (ms)':>10}  {'speedup':>8}  {'max|diff|':>9}"
    print(f"\ndescent_loop  (iters={args.iters}, m=2, gradient feedback)")
    print(header)
    for n in sizes:
        _row(n, *bench_descent(pure, fast, n, args.iters, args.repeats, rng))

    print(f"\nrk4_lti  (steps={args.iters})")
    print(header)
    for n in sizes:
        _row(n, *bench_rk4(pure, fast, n, args.iters, args.repeats, rng))


if __name__ == "__main__":
    main()
