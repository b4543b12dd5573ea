"""Subproblem lattices: guess, parameter heuristics, basis, solver and brute-force oracle.

A subproblem asks for an integer signal x of length D given its frequency
decimations by every prime p | D (exact integer signals of length D/p) and M
DFT values at frequencies coprime to D. The decimations pin down every DFT
coefficient whose frequency shares a factor with D, so the unknown part lives
in a space of dimension phi(D); the M coprime values (and their conjugates)
cut it down further and the shortest-vector search resolves the rest.
"""
from __future__ import annotations

import math
import time
from dataclasses import dataclass, field, replace
from itertools import product

import gmpy2
import numpy as np

from .lll import LLLPrecisionError, lll_reduce
from .numtheory import coprimes, log_unit_ball_volume, prime_factors, totient
from .transform import PrecisionContext, decimate_freq, dft_1d, idft_1d, real_part, roots, to_complex128


class DataIncompleteError(ValueError):
    pass


class InconsistentDataError(ValueError):
    pass


class SubproblemFailure(RuntimeError):
    def __init__(self, key, diagnostics: dict):
        self.key = key
        self.diagnostics = diagnostics
        super().__init__(f"no candidate passed the checks for subproblem {key}: {diagnostics}")


@dataclass(frozen=True)
class BetaParams:
    beta0: float = 0.1
    beta1: float | None = None
    beta2: float | None = None
    beta3: float = 100.0
    delta: float = 0.9972
    eps: float | None = None
    digits: int = 16
    p: float = 0.5

    def __post_init__(self):
        if not 0.25 < self.delta <= 1:
            raise ValueError(f"delta must lie in (1/4, 1], got {self.delta}")
        if self.beta3 < 1:
            raise ValueError("beta3 must be at least 1")
        for name in ("beta0", "beta1", "beta2"):
            v = getattr(self, name)
            if v is not None and not v > 0:
                raise ValueError(f"{name} must be positive")
        if not 0 < self.p < 1:
            raise ValueError("p must lie in (0, 1)")

    @property
    def ctx(self) -> PrecisionContext:
        return PrecisionContext(self.digits)


# --- heuristics -----------------------------------------------------------------

def estimate_K(phi: int, M: int, L: float, p: float = 0.5, scale: float = 1) -> float:
    """Expected distance between the signal and its zero-filled guess."""
    if phi <= 2 * M:
        return 0.0
    return math.sqrt((phi - 2 * M) * scale * L * p * (1 - p))


def gamma_max(K: float, beta0: float) -> int:
    if beta0 <= 0:
        raise ValueError("beta0 must be positive")
    return max(1, math.isqrt(int(math.floor(K * K / (beta0 * beta0) + 1))))


def beta1_min(K: float, beta0: float, D: int, delta: float) -> float:
    """Smallest decimation penalty for which LLL cannot trade a decimation error for length."""
    return (4 / (4 * delta - 1)) ** (D / 2) * math.sqrt(K * K + beta0 * beta0)


def _log_ratio(phi: int) -> float:
    # log of (phi+1) V_phi / (2 phi V_{phi-1})
    return math.log(phi + 1) + log_unit_ball_volume(phi) - math.log(2 * phi) - log_unit_ball_volume(phi - 1)


def _log_rho_parts(phi, M, K, beta0):
    """log of the two beta2-free numerators: spurious gamma = 0 and gamma != 0 counts."""
    lv = log_unit_ball_volume(phi)
    a = lv + 0.5 * (phi + M) * math.log(K * K + beta0 * beta0) + M * _log_ratio(phi)
    if K > 0:
        gm = gamma_max(K, beta0)
        s = math.fsum(g ** -M for g in range(1, gm + 1))
        c = lv + (phi + M) * math.log(K) + math.log(s)
    else:
        c = -math.inf
    return a, c


def estimate_beta2(phi: int, M: int, K: float, beta0: float = 0.1) -> float:
    """DFT penalty at which about two lattice vectors (the target and its negative) pass."""
    if phi < 1 or M < 1:
        raise ValueError("phi and M must be positive")
    if phi <= 2 * M and K == 0:
        return 1.0
    a, c = _log_rho_parts(phi, M, K, beta0)
    return math.exp(np.logaddexp(a - math.log(2), c) / (2 * M))


def rho(beta2: float, gamma: int, phi: int, M: int, K: float, beta0: float = 0.1) -> float:
    """Modeled count of spurious vectors with a fixed multiplier gamma of the guess column."""
    lv = log_unit_ball_volume(phi)
    if gamma == 0:
        return math.exp(lv + 0.5 * (phi + M) * math.log(K * K + beta0 * beta0)
                        + M * (_log_ratio(phi) - 2 * math.log(beta2)))
    if K == 0:
        return 0.0
    g = abs(gamma)
    return math.exp(lv + phi * math.log(K) + M * (math.log(K) - math.log(g) - 2 * math.log(beta2)))


def rho_total(beta2: float, phi: int, M: int, K: float, beta0: float = 0.1) -> float:
    gm = gamma_max(K, beta0) if K > 0 else 0
    return rho(beta2, 0, phi, M, K, beta0) + 2 * math.fsum(
        rho(beta2, g, phi, M, K, beta0) for g in range(1, gm + 1))


def recommended_digits(beta2: float, beta3: float) -> int:
    return math.ceil(math.log10(beta2 * beta3))


# --- subproblem data ------------------------------------------------------------

@dataclass
class SubproblemData:
    D: int
    decimations: dict[int, np.ndarray]
    coeffs: list[tuple[int, complex]]
    L: float | None = None
    scale: int = 1
    key: object = None
    digits: int = 16

    @property
    def M(self) -> int:
        return len(self.coeffs)

    def validate(self):
        D = self.D
        primes = prime_factors(D)
        if set(self.decimations) != set(primes):
            raise DataIncompleteError(f"{self.key}: need decimations for primes {primes}, got {sorted(self.decimations)}")
        for p, v in self.decimations.items():
            if len(v) != D // p:
                raise InconsistentDataError(f"{self.key}: decimation by {p} has length {len(v)}, expected {D // p}")
        for p in primes:
            for q in primes:
                if p < q and (D // p) % q == 0:
                    a = decimate_freq(self.decimations[p], q)
                    b = decimate_freq(self.decimations[q], p)
                    if not np.array_equal(a, b):
                        raise InconsistentDataError(f"{self.key}: decimations by {p} and {q} disagree")
        if not self.coeffs:
            raise DataIncompleteError(f"{self.key}: no DFT coefficient supplied")
        for k, _ in self.coeffs:
            if D > 1 and math.gcd(k, D) != 1:
                raise InconsistentDataError(f"{self.key}: frequency {k} shares a factor with D={D}")


def subproblem_from_signal(x, M: int = 1, digits: int = 16, L=None, scale: int = 1, key=None) -> SubproblemData:
    """Top-level subproblem with decimations computed straight from the signal."""
    x = np.asarray(x, dtype=np.int64)
    D = len(x)
    ctx = PrecisionContext(digits)
    xt = dft_1d(x, ctx)
    units = coprimes(D)
    lams = units[: min(M, (len(units) + 1) // 2)]
    coeffs = [(k, xt[k] if ctx.extended else complex(xt[k])) for k in lams]
    decs = {p: decimate_freq(x, p) for p in prime_factors(D)}
    return SubproblemData(D, decs, coeffs, L=L, scale=scale, key=key, digits=digits)


def known_spectrum(sub: SubproblemData) -> dict[int, complex]:
    """Every DFT value the data fix: non-coprime frequencies via decimation, sampled ones and conjugates."""
    ctx = PrecisionContext(sub.digits)
    D = sub.D
    known = {}
    dec_dft = {p: dft_1d(v, ctx) for p, v in sub.decimations.items()}
    for k in range(D):
        g = math.gcd(k, D)
        if g > 1:
            p = prime_factors(g)[0]
            known[k] = dec_dft[p][k // p]
    for k, v in sub.coeffs:
        known[k % D] = v
        known[(-k) % D] = v.conjugate()
    return known


def build_guess(known: dict[int, complex], D: int, ctx=None) -> np.ndarray:
    """Zero-filled inverse DFT of the known coefficients (real part)."""
    ctx = ctx if isinstance(ctx, PrecisionContext) else PrecisionContext(ctx or 16)
    for k in range(D):
        if math.gcd(k, D) > 1 and k not in known:
            raise DataIncompleteError(f"frequency {k} of a length-{D} signal is missing")
    for k in list(known):
        if (-k) % D not in known:
            raise DataIncompleteError(f"frequency {k} is known but its conjugate {(-k) % D} is not")
    if ctx.extended:
        with ctx.mp():
            spec = np.array([gmpy2.mpc(known[k]) if k in known else gmpy2.mpc(0) for k in range(D)], dtype=object)
    else:
        spec = np.array([known.get(k, 0) for k in range(D)], dtype=np.complex128)
    return real_part(idft_1d(spec, ctx))


# --- lattice ----------------------------------------------------------------------

@dataclass
class LatticeInstance:
    basis: np.ndarray
    D: int
    blocks: dict[str, tuple[int, int]]
    beta: dict[str, float]
    weights: dict[str, int]
    guess: np.ndarray

    @property
    def ambient_dim(self) -> int:
        return self.basis.shape[1]

    def designated_vector(self, x) -> np.ndarray:
        """B [x; 1] for an integer signal x: the vector the reduction should find."""
        coeff = np.array(list(np.asarray(x, dtype=object)) + [1], dtype=object)
        return coeff @ self.basis.astype(object)


@dataclass
class Resolved:
    beta0: float
    beta1: float
    beta2: float
    beta3: float
    delta: float
    eps: float
    K: float
    L: float
    beta2_auto: bool


def _trunc_int(v, ctx) -> int:
    if ctx.extended:
        with ctx.mp():
            return int(gmpy2.mpfr(v))
    return int(math.trunc(float(v)))


def infer_L(sub: SubproblemData, known) -> float:
    # mean entry of a binomial(L, 1/2) image is L/2; a crude stand-in when L is not declared
    mean = float(abs(complex(known.get(0, 0)))) / (sub.D * sub.scale)
    return max(1.0, math.ceil(2 * mean))


def resolve_params(sub: SubproblemData, params: BetaParams, known=None) -> Resolved:
    known = known_spectrum(sub) if known is None else known
    D, M = sub.D, sub.M
    phi = totient(D)
    L = sub.L if sub.L is not None else infer_L(sub, known)
    K = estimate_K(phi, M, L, params.p, sub.scale)
    b1 = params.beta1 if params.beta1 is not None else max(100.0, beta1_min(K, params.beta0, D, params.delta))
    if params.beta2 is not None:
        b2, auto = params.beta2, False
    else:
        b2 = min(estimate_beta2(phi, M, K, params.beta0), 10.0 ** (params.digits - 2) / params.beta3)
        auto = True
    if params.eps is not None:
        eps = params.eps
    else:
        eps = 1e-4 * max(1.0, max(abs(complex(v)) for v in known.values()))
    return Resolved(params.beta0, b1, b2, params.beta3, params.delta, eps, K, L, auto)


def build_lattice_basis(sub: SubproblemData, params: BetaParams, known=None, guess=None,
                        resolved: Resolved | None = None) -> LatticeInstance:
    sub.validate()
    ctx = PrecisionContext(sub.digits)
    known = known_spectrum(sub) if known is None else known
    guess = build_guess(known, sub.D, ctx) if guess is None else guess
    r = resolve_params(sub, params, known) if resolved is None else resolved
    D = sub.D
    primes = prime_factors(D)
    M = sub.M
    nb1 = sum(D // p for p in primes)
    dim = D + 1 + nb1 + 2 * M
    w3 = _trunc_int(r.beta3, ctx)
    w0 = _trunc_int(r.beta3 * r.beta0, ctx)
    # integer weight keeps the decimation equalities exact after truncation
    w1 = _trunc_int(r.beta3 * r.beta1, ctx)
    if w0 < 1 or w1 < 1:
        raise ValueError("beta3*beta0 and beta3*beta1 must be at least 1")
    rows = [[0] * dim for _ in range(D + 1)]
    for j in range(D):
        rows[j][j] = w3
    last = rows[D]
    for j in range(D):
        last[j] = -_trunc_int(r.beta3 * guess[j] if not ctx.extended else guess[j] * gmpy2.mpfr(r.beta3), ctx)
    last[D] = w0
    off = D + 1
    for p in primes:
        size = D // p
        for j in range(D):
            rows[j][off + j % size] = w1
        for i, v in enumerate(sub.decimations[p]):
            last[off + i] = -w1 * int(v)
        off += size
    eta = roots(D, ctx)
    scale2 = r.beta3 * r.beta2
    for m, (k, val) in enumerate(sub.coeffs):
        re_row, im_row = off + m, off + M + m
        if ctx.extended:
            with ctx.mp():
                s = gmpy2.mpfr(scale2)
                for j in range(D):
                    z = eta[(j * k) % D]
                    rows[j][re_row] = int(z.real * s)
                    rows[j][im_row] = int(z.imag * s)
                v = gmpy2.mpc(val)
                last[re_row] = -int(v.real * s)
                last[im_row] = -int(v.imag * s)
        else:
            for j in range(D):
                z = eta[(j * k) % D]
                rows[j][re_row] = int(math.trunc(z.real * scale2))
                rows[j][im_row] = int(math.trunc(z.imag * scale2))
            v = complex(val)
            last[re_row] = -int(math.trunc(v.real * scale2))
            last[im_row] = -int(math.trunc(v.imag * scale2))
    blocks = {"A": (0, D), "B0": (D, D + 1), "B1": (D + 1, D + 1 + nb1), "B2": (D + 1 + nb1, dim)}
    beta = {"beta0": r.beta0, "beta1": r.beta1, "beta2": r.beta2, "beta3": r.beta3}
    basis = np.array(rows, dtype=object)
    if all(abs(v) < 2**62 for row in rows for v in row):
        basis = basis.astype(np.int64)
    return LatticeInstance(basis, D, blocks, beta, {"A": w3, "B0": w0, "B1": w1}, guess)


# --- solver ---------------------------------------------------------------------

def _round_vec(v) -> np.ndarray:
    a = np.asarray(v)
    if a.dtype == object:
        return np.array([int(gmpy2.rint(x)) if not isinstance(x, int) else x for x in a], dtype=np.int64)
    return np.rint(a.astype(np.float64)).astype(np.int64)


def coefficient_error(y, sub: SubproblemData) -> float:
    """max |dft(y)_k - value_k| over the supplied coprime coefficients."""
    ctx = PrecisionContext(sub.digits)
    yt = dft_1d(np.asarray(y, dtype=np.int64), ctx)
    if ctx.extended:
        with ctx.mp():
            return max(float(abs(yt[k % sub.D] - v)) for k, v in sub.coeffs)
    return max(abs(complex(yt[k % sub.D]) - complex(v)) for k, v in sub.coeffs)


def satisfies_data(y, sub: SubproblemData, eps: float) -> bool:
    y = np.asarray(y, dtype=np.int64)
    for p, v in sub.decimations.items():
        if not np.array_equal(decimate_freq(y, p), np.asarray(v, dtype=np.int64)):
            return False
    return coefficient_error(y, sub) <= eps


def solve_subproblem(sub: SubproblemData, params: BetaParams | None = None, info: dict | None = None) -> np.ndarray:
    """Recover the length-D signal: rounded guess if it already fits, else scan an LLL-reduced basis."""
    params = params or BetaParams(digits=sub.digits)
    if params.digits != sub.digits:
        params = replace(params, digits=sub.digits)
    info = {} if info is None else info
    t0 = time.perf_counter()
    sub.validate()
    ctx = PrecisionContext(sub.digits)
    known = known_spectrum(sub)
    guess = build_guess(known, sub.D, ctx)
    r = resolve_params(sub, params, known)
    info.update(D=sub.D, M=sub.M, K=r.K, beta1=r.beta1, beta2=r.beta2, eps=r.eps, beta2_auto=r.beta2_auto)

    y = _round_vec(guess)
    if satisfies_data(y, sub, r.eps):
        info.update(status="trivial" if sub.D == 1 else "guess-path", seconds=time.perf_counter() - t0)
        return y

    inst = build_lattice_basis(sub, params, known, guess, r)
    lstats = {}
    reduced = lll_reduce(inst.basis, r.delta, sub.digits, stats=lstats)
    info.update(lll=lstats)
    D, w0 = sub.D, inst.weights["B0"]
    gf = to_complex128(guess).real if ctx.extended else np.asarray(guess, dtype=np.float64)
    norms = [math.sqrt(float(sum(int(v) * int(v) for v in row))) for row in reduced]
    order = sorted(range(len(reduced)), key=lambda i: norms[i])
    for i in order:
        row = reduced[i]
        if abs(int(row[D])) != w0:
            continue
        a = np.array([int(v) for v in row[:D]], dtype=np.float64) / r.beta3
        passing = []
        for s in (1, -1):
            cand = np.rint(s * a + gf).astype(np.int64)
            if satisfies_data(cand, sub, r.eps):
                passing.append((float(np.linalg.norm(cand - gf)), s, cand))
        if passing:
            passing.sort(key=lambda t: t[0])
            info.update(status="lattice-solved", seconds=time.perf_counter() - t0, rank=order.index(i))
            return passing[0][2]
    info.update(status="failed", seconds=time.perf_counter() - t0)
    diag = {"shortest_norm": norms[order[0]] / r.beta3 if norms else None,
            "predicted_norm": math.sqrt(r.K ** 2 + r.beta0 ** 2), "beta2": r.beta2, "D": D, "M": sub.M}
    raise SubproblemFailure(sub.key, diag)


# --- brute force oracle -------------------------------------------------------------

def brute_force_oracle(sub: SubproblemData, L: int, eps: float | None = None, budget: int = 10**7,
                       chunk: int = 1 << 16) -> list[np.ndarray]:
    """Every vector in [0, L]^D matching the decimations exactly and the coefficients within eps."""
    sub.validate()
    D = sub.D
    total = (L + 1) ** D
    if total > budget:
        raise ValueError(f"search space (L+1)^D = {total} exceeds budget {budget}")
    if eps is None:
        eps = 1e-4 * max(1.0, max(abs(complex(v)) for v in known_spectrum(sub).values()))
    eta = to_complex128(roots(D, PrecisionContext(sub.digits)))
    ks = [k for k, _ in sub.coeffs]
    W = np.array([[eta[(j * k) % D] for k in ks] for j in range(D)])
    vals = np.array([complex(v) for _, v in sub.coeffs])
    place = (L + 1) ** np.arange(D - 1, -1, -1)
    out = []
    for start in range(0, total, chunk):
        idx = np.arange(start, min(total, start + chunk), dtype=np.int64)
        Y = (idx[:, None] // place[None, :]) % (L + 1)
        ok = np.ones(len(idx), dtype=bool)
        for p, v in sub.decimations.items():
            ok &= (Y.reshape(len(idx), p, D // p).sum(axis=1) == np.asarray(v)[None, :]).all(axis=1)
        if not ok.any():
            continue
        Yk = Y[ok]
        err = np.abs(Yk @ W - vals[None, :]).max(axis=1)
        for yrow in Yk[err <= eps]:
            out.append(yrow.astype(np.int64))
    return out
