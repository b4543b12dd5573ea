"""Compiled LLL kernel against the pure-Python fallback on solver-sized lattices.

    python benchmarks/bench_jit.py [--dims 12 24 36] [--reps 3]

Both paths reduce the same bases; outputs are compared before timings are shown.
Setting INTRECOVER_DISABLE_JIT=1 makes the kernel path fall back as well.
"""
import argparse
import time

import numpy as np

from intrecover._jit import JIT_ENABLED
from intrecover.lattice import BetaParams, build_lattice_basis, subproblem_from_signal
from intrecover.lll import lll_reduce


def solver_basis(D, seed):
    x = np.random.default_rng(seed).integers(0, 2, D)
    return build_lattice_basis(subproblem_from_signal(x, 1, L=1), BetaParams(beta2=1e12)).basis


def best_of(fn, reps):
    best = float("inf")
    for _ in range(reps):
        t0 = time.perf_counter()
        out = fn()
        best = min(best, time.perf_counter() - t0)
    return best, out


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--dims", type=int, nargs="+", default=[12, 24, 36])
    ap.add_argument("--reps", type=int, default=3)
    args = ap.parse_args()

    t0 = time.perf_counter()
    lll_reduce(solver_basis(6, 0), backend="kernel")
    print(f"jit enabled: {JIT_ENABLED}; first kernel call (compile or cache load) {time.perf_counter() - t0:.2f}s")
    print(f"{'D':>4} {'kernel s':>10} {'python s':>10} {'speedup':>8}")
    for D in args.dims:
        B = solver_basis(D, D)
        tk, rk = best_of(lambda: lll_reduce(B, backend="kernel"), args.reps)
        tp, rp = best_of(lambda: lll_reduce(B, backend="python"), args.reps)
        assert np.array_equal(np.asarray(rk, dtype=object), np.asarray(rp, dtype=object)), "backends disagree"
        print(f"{D:>4} {tk:>10.4f} {tp:>10.4f} {tp / tk:>7.1f}x")


if __name__ == "__main__":
    main()
