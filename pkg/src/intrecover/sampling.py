"""DFT coefficient classes, subsignals, minimal sampling and ambiguity witnesses."""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from functools import lru_cache
from itertools import combinations

import gmpy2
import numpy as np

from .numtheory import coprimes, divisors, num_divisors, prime_factors, totient
from .transform import PrecisionContext, dft_2d

SPECTRUM_SCHEMA = "intrecover.spectrum/1"


@dataclass(frozen=True)
class SubsignalGeometry:
    n1: int
    n2: int
    k: int
    l: int
    N: int
    n1p: int
    n2p: int
    d1: int
    d2: int
    D1: int
    D2: int
    D: int
    d: int
    coset_size: int


def _check_freq(n1, n2, k, l):
    if n1 < 1 or n2 < 1:
        raise ValueError(f"grid must be positive, got {n1}x{n2}")
    if not (0 <= k < n1 and 0 <= l < n2):
        raise ValueError(f"frequency ({k},{l}) outside {n1}x{n2} grid")


@lru_cache(maxsize=1 << 14)
def subsignal_geometry(n1: int, n2: int, k: int, l: int) -> SubsignalGeometry:
    _check_freq(n1, n2, k, l)
    g = math.gcd(n1, n2)
    N = n1 * n2 // g
    d1, d2 = math.gcd(k, n1), math.gcd(l, n2)
    D1, D2 = n1 // d1, n2 // d2
    D = D1 * D2 // math.gcd(D1, D2)
    return SubsignalGeometry(n1, n2, k, l, N, n1 // g, n2 // g, d1, d2, D1, D2, D, N // D, n1 * n2 // D)


def orbit(n1: int, n2: int, k: int, l: int) -> set[tuple[int, int]]:
    D = subsignal_geometry(n1, n2, k, l).D
    return {(lam * k % n1, lam * l % n2) for lam in coprimes(D)}


def orbit_members(n1: int, n2: int, k: int, l: int) -> list[tuple[int, tuple[int, int]]]:
    """(lambda, (lambda*k, lambda*l)) for every unit lambda mod D, ascending."""
    D = subsignal_geometry(n1, n2, k, l).D
    return [(lam, (lam * k % n1, lam * l % n2)) for lam in coprimes(D)]


@dataclass(frozen=True)
class CoefficientClass:
    rep: tuple[int, int]
    orbit: tuple[tuple[int, int], ...]
    D: int


@lru_cache(maxsize=64)
def _classes(n1: int, n2: int) -> tuple[CoefficientClass, ...]:
    seen = np.zeros((n1, n2), dtype=bool)
    out = []
    # scanning in lexicographic order makes the first unseen member the canonical one
    for k in range(n1):
        for l in range(n2):
            if seen[k, l]:
                continue
            orb = sorted(orbit(n1, n2, k, l))
            for a, b in orb:
                seen[a, b] = True
            out.append(CoefficientClass((k, l), tuple(orb), subsignal_geometry(n1, n2, k, l).D))
    return tuple(out)


def enumerate_classes(n1: int, n2: int) -> list[CoefficientClass]:
    if n1 < 1 or n2 < 1:
        raise ValueError(f"grid must be positive, got {n1}x{n2}")
    return list(_classes(int(n1), int(n2)))


def count_classes(n1: int, n2: int) -> int:
    return sum(totient(math.gcd(a, b)) for a in divisors(n1) for b in divisors(n2))


def canonical_rep(n1: int, n2: int, k: int, l: int) -> tuple[int, int]:
    return min(orbit(n1, n2, k % n1, l % n2))


@lru_cache(maxsize=1 << 12)
def _index_matrix(n1: int, n2: int, k: int, l: int) -> np.ndarray:
    g = subsignal_geometry(n1, n2, k, l)
    m = np.arange(n1)[:, None]
    n = np.arange(n2)[None, :]
    S = ((m * k * g.n2p + n * l * g.n1p) % g.N) // g.d
    S.setflags(write=False)
    return S


def index_matrix(n1: int, n2: int, k: int, l: int) -> np.ndarray:
    """S[m, n] = subsignal slot that X[m, n] contributes to."""
    return _index_matrix(int(n1), int(n2), int(k), int(l))


def extract_subsignal(X, k: int, l: int) -> np.ndarray:
    X = np.asarray(X)
    n1, n2 = X.shape
    g = subsignal_geometry(n1, n2, k, l)
    S = index_matrix(n1, n2, k, l)
    dtype = X.dtype if X.dtype == object else np.int64
    out = np.zeros(g.D, dtype=dtype)
    np.add.at(out, S.ravel(), X.ravel().astype(dtype))
    return out


@dataclass
class ClassSample:
    rep: tuple[int, int]
    D: int
    entries: list[tuple[int, complex]]


@dataclass
class MinimalSpectrum:
    n1: int
    n2: int
    digits: int
    classes: list[ClassSample]
    requested_m: int = 1
    clamped: list[tuple[int, int]] = field(default_factory=list)

    @property
    def num_coefficients(self) -> int:
        return sum(len(c.entries) for c in self.classes)

    def class_map(self) -> dict[tuple[int, int], ClassSample]:
        return {c.rep: c for c in self.classes}

    def to_json(self) -> str:
        ctx = PrecisionContext(self.digits)
        classes = []
        for c in self.classes:
            entries = [{"lambda": int(lam), "re": _fmt(v.real, ctx), "im": _fmt(v.imag, ctx)}
                       for lam, v in c.entries]
            classes.append({"rep": [int(c.rep[0]), int(c.rep[1])], "D": int(c.D), "entries": entries})
        doc = {"schema": SPECTRUM_SCHEMA, "n1": self.n1, "n2": self.n2, "digits": self.digits,
               "requested_m": self.requested_m, "classes": classes}
        return json.dumps(doc, indent=1)

    @classmethod
    def from_json(cls, text: str) -> "MinimalSpectrum":
        doc = json.loads(text)
        n1, n2, digits = int(doc["n1"]), int(doc["n2"]), int(doc["digits"])
        ctx = PrecisionContext(digits)
        classes = []
        for c in doc["classes"]:
            rep = (int(c["rep"][0]), int(c["rep"][1]))
            D = subsignal_geometry(n1, n2, *rep).D
            if int(c["D"]) != D:
                raise ValueError(f"class {rep}: stated D={c['D']} but geometry gives {D}")
            entries = []
            for e in c["entries"]:
                lam = int(e["lambda"])
                if math.gcd(lam, D) != 1 and D > 1:
                    raise ValueError(f"class {rep}: lambda={lam} not coprime to D={D}")
                entries.append((lam, _parse(e["re"], e["im"], ctx)))
            if not entries:
                raise ValueError(f"class {rep} has no entries")
            classes.append(ClassSample(rep, D, entries))
        return cls(n1, n2, digits, classes, int(doc.get("requested_m", 1)))


def _fmt(v, ctx: PrecisionContext) -> str:
    if not ctx.extended:
        return repr(float(v))
    with ctx.mp():
        m, e, _ = gmpy2.mpfr(v).digits(10, ctx.digits + 3)
    sign, m = ("-", m[1:]) if m.startswith("-") else ("", m)
    if not m.strip("0"):
        return "0"
    return f"{sign}{m[0]}.{m[1:]}e{e - 1}"


def _parse(re: str, im: str, ctx: PrecisionContext):
    if ctx.extended:
        with ctx.mp():
            return gmpy2.mpc(gmpy2.mpfr(re), gmpy2.mpfr(im))
    return complex(float(re), float(im))


def sample_lambdas(D: int, M: int) -> list[int]:
    """First min(M, ceil(phi(D)/2)) units mod D; none of them conjugate to another."""
    units = coprimes(D)
    return units[: min(M, (len(units) + 1) // 2)]


def sample_minimal(X, M: int = 1, ctx=None, m_for=None) -> MinimalSpectrum:
    """One to M DFT values per coefficient class.

    `m_for(cls) -> int` may override M per class (e.g. extra data for long subsignals).
    """
    if M < 1:
        raise ValueError("M must be at least 1")
    ctx = ctx if isinstance(ctx, PrecisionContext) else PrecisionContext(ctx or 16)
    X = np.asarray(X)
    n1, n2 = X.shape
    Xt = dft_2d(X, ctx)
    classes, clamped = [], []
    for c in enumerate_classes(n1, n2):
        m = M if m_for is None else max(1, int(m_for(c)))
        lams = sample_lambdas(c.D, m)
        if len(lams) < m:
            clamped.append(c.rep)
        k, l = c.rep
        entries = [(lam, Xt[lam * k % n1, lam * l % n2]) for lam in lams]
        if not ctx.extended:
            entries = [(lam, complex(v)) for lam, v in entries]
        classes.append(ClassSample(c.rep, c.D, entries))
    return MinimalSpectrum(n1, n2, ctx.digits, classes, M, clamped)


def amb1d_witness(N: int) -> np.ndarray:
    """Signal in {-1, 0, 1} whose DFT is nonzero exactly at frequencies coprime to N."""
    if N < 1:
        raise ValueError("N must be positive")
    ps = prime_factors(N)
    x = np.zeros(N, dtype=np.int64)
    for r in range(len(ps) + 1):
        for T in combinations(ps, r):
            np.add.at(x, sum(N // p for p in T) % N, (-1) ** r)
    return x


def amb2d_witness(n1: int, n2: int, k: int, l: int) -> np.ndarray:
    """Matrix in {-1, 0, 1} whose DFT is nonzero exactly on the class of (k, l)."""
    g = subsignal_geometry(n1, n2, k, l)
    return amb1d_witness(g.D)[index_matrix(n1, n2, k, l)]


def binary_pair_witness(n1: int, n2: int, k: int, l: int) -> tuple[np.ndarray, np.ndarray]:
    """Two binary matrices whose spectra agree everywhere except the class of (k, l)."""
    _check_freq(n1, n2, k, l)
    if (k, l) == (0, 0):
        raise ValueError("no binary pair differs only at (0,0): the mean separates them")
    X = amb2d_witness(n1, n2, k, l)
    return (X == 1).astype(np.int64), (X == -1).astype(np.int64)


def searchspace_dims(N: int) -> tuple[int, int]:
    """Search-space dimension of the plain and the decimation-reduced integer programs."""
    if N < 3:
        raise ValueError("N must be at least 3")
    tau = num_divisors(N)
    baseline = N - 2 * tau + (1 if N % 2 else 2)
    return baseline, totient(N) - 2
