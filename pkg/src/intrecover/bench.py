"""Benchmark suites reproducing the experiments at desk scale.

Every trial draws from its own counter-based stream (Philox keyed by the run
seed, counter set to the trial index), so any single trial can be replayed.
"""
from __future__ import annotations

import math
import time
from dataclasses import replace

import numpy as np

from .inversion import invert_2d
from .lattice import (BetaParams, SubproblemFailure, build_guess, estimate_K, estimate_beta2, known_spectrum,
                      solve_subproblem, subproblem_from_signal)
from .numtheory import totient
from .sampling import enumerate_classes, sample_minimal, subsignal_geometry

SUITES = ("percentile", "precision", "recover2d", "kmc")


def trial_rng(seed: int, trial: int) -> np.random.Generator:
    return np.random.Generator(np.random.Philox(key=seed, counter=[0, 0, 0, trial]))


def top_level_recovered(x, M: int, params: BetaParams, L) -> bool:
    sub = subproblem_from_signal(x, M, params.digits, L=L)
    try:
        return bool(np.array_equal(solve_subproblem(sub, params), x))
    except SubproblemFailure:
        return False


def kmc(N: int = 30, Ms=(1, 2, 3), trials: int = 10_000, seed: int = 0, L=None, p: float = 0.5):
    """Distance between binomial signals and their zero-filled top-level guesses."""
    L = N if L is None else L
    rows = []
    for M in Ms:
        for t in range(trials):
            x = trial_rng(seed, t).binomial(L, p, N)
            sub = subproblem_from_signal(x, M, 16, L=L)
            g = build_guess(known_spectrum(sub), N)
            rows.append((M, t, float(np.linalg.norm(x - np.asarray(g, dtype=float)))))
    return rows


def kmc_summary(rows, N: int = 30, L=None, p: float = 0.5):
    L = N if L is None else L
    out = {}
    for M in sorted({r[0] for r in rows}):
        vals = [r[2] for r in rows if r[0] == M]
        out[M] = (float(np.mean(vals)), estimate_K(totient(N), M, L, p))
    return out


def recovery_rate(signals, M: int, params: BetaParams, L) -> float:
    return sum(top_level_recovered(x, M, params, L) for x in signals) / len(signals)


def percentile_search(signals, M: int, q: float, params: BetaParams, L, iters: int = 30,
                      start: float | None = None) -> float:
    """Smallest beta2 recovering a fraction >= q of the signals.

    Exponential search by factors of 100 brackets the value, geometric bisection
    spends the remaining iterations.
    """
    N = len(signals[0])
    if start is None:
        start = estimate_beta2(totient(N), M, estimate_K(totient(N), M, L, params.p), params.beta0)

    def ok(b2):
        return recovery_rate(signals, M, replace(params, beta2=b2), L) >= q

    lo = hi = None
    b = start
    it = 0
    while it < iters and (lo is None or hi is None):
        it += 1
        if ok(b):
            hi = b
            b /= 100
        else:
            lo = b
            b *= 100
    if hi is None:
        return math.inf
    if lo is None:
        return hi
    while it < iters:
        it += 1
        mid = math.sqrt(lo * hi)
        if ok(mid):
            hi = mid
        else:
            lo = mid
    return hi


def percentile(N: int, M: int, trials: int, seed: int, params: BetaParams, L=None, qs=(0.5, 0.9, 1.0), iters=30):
    L = N if L is None else L
    signals = [trial_rng(seed, t).binomial(L, params.p, N) for t in range(trials)]
    theory = estimate_beta2(totient(N), M, estimate_K(totient(N), M, L, params.p), params.beta0)
    return [(N, M, q, percentile_search(signals, M, q, params, L, iters), theory) for q in qs]


def precision(Ns, Ms, digits_list, trials: int, seed: int, params: BetaParams, beta2=None):
    rows = []
    for digits in digits_list:
        b2 = beta2 if beta2 is not None else (1e14 if digits >= 16 else 1e7)
        for N in Ns:
            for M in Ms:
                if 2 * M >= totient(N):
                    rows.append((N, M, digits, b2, trials, None))
                    continue
                P = replace(params, digits=digits, beta2=b2)
                signals = [trial_rng(seed, t).binomial(N, params.p, N) for t in range(trials)]
                rows.append((N, M, digits, b2, trials, 100.0 * recovery_rate(signals, M, P, N)))
    return rows


def max_theory_beta2(n1: int, n2: int, M: int, L: float = 1, beta0: float = 0.1, p: float = 0.5) -> float:
    best = 1.0
    for c in enumerate_classes(n1, n2):
        g = subsignal_geometry(n1, n2, *c.rep)
        phi = totient(g.D)
        m = min(M, (phi + 1) // 2)
        best = max(best, estimate_beta2(phi, m, estimate_K(phi, m, L, p, g.coset_size), beta0))
    return best


def recover2d(shape, M: int, trials: int, seed: int, params: BetaParams, L: int = 1):
    n1, n2 = shape
    ok, t_ok, t_fail = 0, [], []
    coeffs = None
    for t in range(trials):
        X = trial_rng(seed, t).integers(0, L + 1, (n1, n2))
        spec = sample_minimal(X, M, params.digits)
        coeffs = spec.num_coefficients
        t0 = time.perf_counter()
        img, _ = invert_2d(spec, params, L=L, raise_on_failure=False)
        dt = time.perf_counter() - t0
        if img is not None and np.array_equal(img, X):
            ok += 1
            t_ok.append(dt)
        else:
            t_fail.append(dt)
    mean = (lambda v: float(np.mean(v)) if v else float("nan"))
    return (n1, n2, M, coeffs, trials, 100.0 * ok / trials, mean(t_ok), mean(t_fail),
            max_theory_beta2(n1, n2, M, L, params.beta0, params.p))
