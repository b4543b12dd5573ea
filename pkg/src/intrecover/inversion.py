"""Memoized inversion over the divisor lattice of coefficient classes.

Classes are solved layer by layer in nested divisor order of (D1, D2). Once a
class is solved, its subsignal is written to the memo under every orbit
member (a permutation of the representative's subsignal) together with the
matching DFT values. Later classes read their decimated subsignals from the
memo. A 1D signal is the 1 x N special case.
"""
from __future__ import annotations

import json
import math
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace

import numpy as np

from .lattice import (BetaParams, DataIncompleteError, SubproblemData, SubproblemFailure, coefficient_error,
                      solve_subproblem)
from .numtheory import coprimes, divisors, prime_factors
from .sampling import MinimalSpectrum, enumerate_classes, subsignal_geometry
from .transform import PrecisionContext, dft_1d, idft_2d, to_complex128

REPORT_SCHEMA = "intrecover.report/1"


class InversionError(RuntimeError):
    def __init__(self, key, report: "InversionReport", cause: Exception):
        self.key = key
        self.report = report
        super().__init__(f"inversion failed at class {key}: {cause}")


@dataclass
class KeyReport:
    key: tuple[int, int]
    D: int
    status: str
    seconds: float
    m_supplied: int
    params: dict = field(default_factory=dict)


@dataclass
class InversionReport:
    shape: tuple[int, int]
    digits: int
    keys: list[KeyReport] = field(default_factory=list)
    success: bool = False
    failed_key: tuple[int, int] | None = None
    message: str = ""
    seconds: float = 0.0
    solve_counts: dict = field(default_factory=dict)
    memo: dict = field(default_factory=dict, repr=False, compare=False)  # subsignal per frequency, not serialized

    def to_dict(self, timings: bool = True) -> dict:
        def key_dict(r: KeyReport):
            d = {"key": list(r.key), "D": r.D, "status": r.status, "m": r.m_supplied, "params": r.params}
            if timings:
                d["seconds"] = round(r.seconds, 6)
            return d
        out = {"schema": REPORT_SCHEMA, "shape": list(self.shape), "digits": self.digits,
               "success": self.success, "failed_key": list(self.failed_key) if self.failed_key else None,
               "message": self.message, "subproblems": [key_dict(r) for r in self.keys]}
        if timings:
            out["seconds"] = round(self.seconds, 6)
        return out

    def to_json(self, timings: bool = True) -> str:
        return json.dumps(self.to_dict(timings), indent=1, sort_keys=True, default=float)


def schedule(n1: int, n2: int) -> list[list[tuple[int, int]]]:
    """Batches of class representatives; classes in one batch never depend on each other."""
    layers: dict[tuple[int, int], list] = {}
    for c in enumerate_classes(n1, n2):
        g = subsignal_geometry(n1, n2, *c.rep)
        layers.setdefault((g.D1, g.D2), []).append(c.rep)
    return [layers[(a, b)] for a in divisors(n1) for b in divisors(n2) if (a, b) in layers]


def dependencies(n1: int, n2: int, k: int, l: int) -> list[tuple[int, int]]:
    """Frequencies (pk, pl) whose subsignals are the decimations of the (k, l) subsignal."""
    D = subsignal_geometry(n1, n2, k, l).D
    return [(p * k % n1, p * l % n2) for p in prime_factors(D)]


def _clean_params(info: dict) -> dict:
    keep = ("K", "beta1", "beta2", "eps", "beta2_auto")
    return {k: (float(info[k]) if isinstance(info[k], float) else info[k]) for k in keep if k in info}


def invert_2d(spec: MinimalSpectrum, params: BetaParams | None = None, L: float | None = None,
              threads: int = 1, retry: bool = False, m: int | None = None,
              raise_on_failure: bool = True) -> tuple[np.ndarray | None, InversionReport]:
    """Recover the integer image behind a minimal spectrum.

    m caps the number of coefficients used per class (default: all supplied);
    with retry, a failing class is re-solved with one more coefficient while the
    spectrum has spare entries.
    """
    t_start = time.perf_counter()
    n1, n2 = spec.n1, spec.n2
    params = replace(params or BetaParams(), digits=spec.digits)
    ctx = PrecisionContext(spec.digits)
    report = InversionReport((n1, n2), spec.digits)
    samples = spec.class_map()
    memo: dict[tuple[int, int], np.ndarray] = report.memo
    Xt = np.zeros((n1, n2), dtype=object if ctx.extended else np.complex128)
    counts: dict[tuple[int, int], int] = {}

    def solve_one(rep):
        g = subsignal_geometry(n1, n2, *rep)
        sample = samples.get(rep)
        if sample is None:
            raise DataIncompleteError(f"spectrum has no entry for class {rep}")
        decs = {p: memo[(p * rep[0] % n1, p * rep[1] % n2)] for p in prime_factors(g.D)}
        available = sample.entries
        use = len(available) if m is None else min(m, len(available))
        while True:
            coeffs = [(lam % g.D if g.D > 1 else 0, v) for lam, v in available[:use]]
            sub = SubproblemData(g.D, decs, coeffs, L=L, scale=g.coset_size, key=rep, digits=spec.digits)
            info: dict = {}
            t0 = time.perf_counter()
            try:
                counts[rep] = counts.get(rep, 0) + 1
                y = solve_subproblem(sub, params, info)
                if retry and use < len(available):
                    # spare coefficients expose a solution that fits the used data only by accident
                    spare = replace(sub, coeffs=[(lam % g.D, v) for lam, v in available[use:]])
                    if coefficient_error(y, spare) > info["eps"]:
                        raise SubproblemFailure(rep, {"spare_mismatch": True})
                return rep, y, KeyReport(rep, g.D, info["status"], time.perf_counter() - t0, use, _clean_params(info))
            except SubproblemFailure as exc:
                if retry and use < len(available):
                    use += 1
                    continue
                if retry:
                    exc.diagnostics["retry"] = "data-insufficient"
                kr = KeyReport(rep, g.D, "failed", time.perf_counter() - t0, use,
                               {**_clean_params(info), **{k: v for k, v in exc.diagnostics.items()}})
                return rep, exc, kr

    def publish(rep, y):
        k, l = rep
        D = len(y)
        yt = dft_1d(y, ctx)
        for lam in coprimes(D):
            inv = pow(lam, -1, D) if D > 1 else 0
            member = (lam * k % n1, lam * l % n2)
            memo[member] = y[(inv * np.arange(D)) % D] if D > 1 else y.copy()
            Xt[member] = yt[lam % D]

    pool = ThreadPoolExecutor(threads) if threads > 1 else None
    try:
        for batch in schedule(n1, n2):
            results = []
            try:
                # results are consumed in batch order, so the first failure stops the run
                stream = pool.map(solve_one, batch) if pool else (solve_one(r) for r in batch)
                for res in stream:
                    results.append(res)
                    if isinstance(res[1], Exception):
                        break
            except (DataIncompleteError, ValueError) as exc:
                report.message = str(exc)
                report.seconds = time.perf_counter() - t_start
                if raise_on_failure:
                    raise
                return None, report
            for rep, y, kr in results:
                report.keys.append(kr)
                if isinstance(y, Exception):
                    report.failed_key = rep
                    report.message = str(y)
                    report.seconds = time.perf_counter() - t_start
                    report.solve_counts = {str(k): v for k, v in counts.items() if k in {r.key for r in report.keys}}
                    if raise_on_failure:
                        raise InversionError(rep, report, y)
                    return None, report
            # publish the whole layer only after every member has been solved
            for rep, y, _ in results:
                publish(rep, y)
    finally:
        if pool:
            pool.shutdown(cancel_futures=True)

    img = idft_2d(Xt, ctx)
    img = to_complex128(img)
    out = np.rint(img.real).astype(np.int64)
    resid = float(np.max(np.abs(img - out))) if out.size else 0.0
    report.solve_counts = {str(k): v for k, v in counts.items()}
    report.seconds = time.perf_counter() - t_start
    tol = 10.0 ** -(min(spec.digits, 16) - 6) * max(1.0, float(np.abs(out).max(initial=0)))
    if resid > tol:
        report.message = f"inverse transform residue {resid:.3g} exceeds {tol:.3g}"
        if raise_on_failure:
            raise InversionError(None, report, ValueError(report.message))
        return None, report
    report.success = True
    return out, report


def sample_1d(x, M: int = 1, ctx=None) -> MinimalSpectrum:
    from .sampling import sample_minimal
    return sample_minimal(np.asarray(x)[None, :], M, ctx)


def invert_1d(spec: MinimalSpectrum, params: BetaParams | None = None, **kw) -> tuple[np.ndarray | None, InversionReport]:
    """1D inversion: the 1 x N case of the 2D driver, one subproblem per divisor."""
    if spec.n1 != 1:
        raise ValueError("a 1D spectrum has n1 = 1")
    img, report = invert_2d(spec, params, **kw)
    return (img[0] if img is not None else None), report
