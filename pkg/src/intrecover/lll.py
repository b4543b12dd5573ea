"""Floating-point LLL on exact integer bases.

Basis vectors are rows. The integer basis is always exact; only the
Gram-Schmidt data is approximate. Dot products and Gram-Schmidt run in one of
three tiers picked from the requested decimal digits:

* up to 15 digits: float64 (numba kernel)
* up to 31 digits: double-double, about 106 bits (numba kernel)
* beyond: gmpy2 mpfr at the requested precision (pure Python)

Rows of Gram-Schmidt data are recomputed from exact dot products each time the
main loop visits them, and every REFRESH swaps the whole prefix is rebuilt.
The kernel works on int64 and bails out to the Python tier before any entry
could leave (-2^62, 2^62).
"""
from __future__ import annotations

import math

import gmpy2
import numpy as np

from ._jit import JIT_ENABLED, njit

REFRESH = 64
_LIMIT = float(2**62)

OK, OVERFLOW, PRECISION = 0, 1, 2


class LLLPrecisionError(ArithmeticError):
    """Gram-Schmidt lost all significant digits at the working precision."""

    def __init__(self, msg: str, required_digits: int):
        super().__init__(f"{msg}; retry with at least {required_digits} digits")
        self.required_digits = required_digits


def gso_digits(digits: int) -> int:
    """Gram-Schmidt precision used for data carrying `digits` significant digits."""
    return math.ceil(1.5 * digits)


# --- double-double arithmetic -------------------------------------------------

@njit(cache=True, inline="always")
def _two_sum(a, b):
    s = a + b
    bb = s - a
    return s, (a - (s - bb)) + (b - bb)


@njit(cache=True, inline="always")
def _quick_two_sum(a, b):
    s = a + b
    return s, b - (s - a)


@njit(cache=True, inline="always")
def _split(a):
    t = 134217729.0 * a
    hi = t - (t - a)
    return hi, a - hi


@njit(cache=True, inline="always")
def _two_prod(a, b):
    p = a * b
    ah, al = _split(a)
    bh, bl = _split(b)
    return p, ((ah * bh - p) + ah * bl + al * bh) + al * bl


@njit(cache=True, inline="always")
def _dd_add(ah, al, bh, bl):
    s, e = _two_sum(ah, bh)
    t, f = _two_sum(al, bl)
    e += t
    s, e = _quick_two_sum(s, e)
    e += f
    return _quick_two_sum(s, e)


@njit(cache=True, inline="always")
def _dd_mul(ah, al, bh, bl):
    p, e = _two_prod(ah, bh)
    e += ah * bl + al * bh
    return _quick_two_sum(p, e)


@njit(cache=True, inline="always")
def _dd_div(ah, al, bh, bl):
    q1 = ah / bh
    ph, pl = _dd_mul(q1, 0.0, bh, bl)
    rh, rl = _dd_add(ah, al, -ph, -pl)
    q2 = rh / bh
    ph, pl = _dd_mul(q2, 0.0, bh, bl)
    rh, rl = _dd_add(rh, rl, -ph, -pl)
    q3 = rh / bh
    q1, q2 = _quick_two_sum(q1, q2)
    return _dd_add(q1, q2, q3, 0.0)


# --- kernel -------------------------------------------------------------------

@njit(cache=True)
def _load_row(B, Bh, Bl, i):
    mx = 0.0
    for c in range(B.shape[1]):
        v = B[i, c]
        h = float(v)
        Bh[i, c] = h
        Bl[i, c] = float(v - np.int64(h))
        a = abs(h)
        if a > mx:
            mx = a
    return mx


@njit(cache=True)
def _dot(Bh, Bl, i, j, dd):
    sh = 0.0
    sl = 0.0
    m = Bh.shape[1]
    if not dd:
        for c in range(m):
            sh += Bh[i, c] * Bh[j, c]
        return sh, 0.0
    for c in range(m):
        ah = Bh[i, c]
        bh = Bh[j, c]
        if ah == 0.0 or bh == 0.0:
            continue
        p, e = _two_prod(ah, bh)
        e += ah * Bl[j, c] + Bl[i, c] * bh
        sh, sl = _dd_add(sh, sl, p, e)
    return sh, sl


@njit(cache=True)
def _gso_row(Bh, Bl, gh, gl, gv, rh, rl, muh, mul, k, dd):
    """Gram-Schmidt row k from (cached) exact dot products and rows 0..k-1."""
    for j in range(k + 1):
        if not gv[k, j]:
            gh[k, j], gl[k, j] = _dot(Bh, Bl, k, j, dd)
            gh[j, k] = gh[k, j]
            gl[j, k] = gl[k, j]
            gv[k, j] = True
            gv[j, k] = True
        sh = gh[k, j]
        sl = gl[k, j]
        for i in range(j):
            if dd:
                th, tl = _dd_mul(muh[j, i], mul[j, i], rh[k, i], rl[k, i])
                sh, sl = _dd_add(sh, sl, -th, -tl)
            else:
                sh -= muh[j, i] * rh[k, i]
        rh[k, j] = sh
        rl[k, j] = sl
        if j < k:
            if dd:
                qh, ql = _dd_div(sh, sl, rh[j, j], rl[j, j])
            else:
                qh, ql = sh / rh[j, j], 0.0
            muh[k, j] = qh
            mul[k, j] = ql


@njit(cache=True)
def _swap_rows(a, i, j):
    for c in range(a.shape[1]):
        t = a[i, c]
        a[i, c] = a[j, c]
        a[j, c] = t


@njit(cache=True)
def _swap_cols(a, i, j):
    for r in range(a.shape[0]):
        t = a[r, i]
        a[r, i] = a[r, j]
        a[r, j] = t


@njit(cache=True)
def _lll_kernel(B, delta, dd, max_loops):
    """Reduce the rows of B in place. Returns (status, swaps, loops)."""
    n = B.shape[0]
    m = B.shape[1]
    Bh = np.zeros((n, m))
    Bl = np.zeros((n, m))
    rowmax = np.zeros(n)
    for i in range(n):
        rowmax[i] = _load_row(B, Bh, Bl, i)
        if rowmax[i] >= _LIMIT:
            return OVERFLOW, 0, 0
    rh = np.zeros((n, n))
    rl = np.zeros((n, n))
    muh = np.zeros((n, n))
    mul = np.zeros((n, n))
    gh = np.zeros((n, n))
    gl = np.zeros((n, n))
    gv = np.zeros((n, n), dtype=np.bool_)
    if n < 2:
        return OK, 0, 0
    _gso_row(Bh, Bl, gh, gl, gv, rh, rl, muh, mul, 0, dd)
    if not rh[0, 0] > 0.0:
        return PRECISION, 0, 0
    k = 1
    swaps = 0
    since_refresh = 0
    loops = 0
    while k < n:
        loops += 1
        if loops > max_loops:
            return PRECISION, swaps, loops
        # size reduction, recomputing the row until it is stable
        rounds = 0
        while True:
            rounds += 1
            if rounds > 200:
                return PRECISION, swaps, loops
            _gso_row(Bh, Bl, gh, gl, gv, rh, rl, muh, mul, k, dd)
            changed = False
            for j in range(k - 1, -1, -1):
                mh = muh[k, j]
                ml = mul[k, j]
                if abs(mh) < 0.5 or (abs(mh) == 0.5 and (ml == 0.0 or (ml > 0.0) != (mh > 0.0))):
                    continue
                q = np.floor(mh + 0.5)
                rem = (mh - q) + ml
                if rem > 0.5:
                    q += 1.0
                elif rem < -0.5:
                    q -= 1.0
                if q == 0.0:
                    continue
                if abs(q) * rowmax[j] + rowmax[k] >= _LIMIT:
                    return OVERFLOW, swaps, loops
                qi = np.int64(q)
                for c in range(m):
                    B[k, c] -= qi * B[j, c]
                rowmax[k] = _load_row(B, Bh, Bl, k)
                for c in range(n):
                    gv[k, c] = False
                    gv[c, k] = False
                for i in range(j):
                    if dd:
                        th, tl = _dd_mul(q, 0.0, muh[j, i], mul[j, i])
                        muh[k, i], mul[k, i] = _dd_add(muh[k, i], mul[k, i], -th, -tl)
                    else:
                        muh[k, i] -= q * muh[j, i]
                muh[k, j], mul[k, j] = _dd_add(mh, ml, -q, 0.0)
                changed = True
            if not changed:
                break
        if not rh[k, k] > 0.0:
            return PRECISION, swaps, loops
        # Lovasz condition: delta*|b*_{k-1}|^2 <= |b*_k|^2 + mu^2 |b*_{k-1}|^2
        if dd:
            m2h, m2l = _dd_mul(muh[k, k - 1], mul[k, k - 1], muh[k, k - 1], mul[k, k - 1])
            th, tl = _dd_mul(m2h, m2l, rh[k - 1, k - 1], rl[k - 1, k - 1])
            rhs_h, rhs_l = _dd_add(rh[k, k], rl[k, k], th, tl)
            lhs_h, lhs_l = _dd_mul(delta, 0.0, rh[k - 1, k - 1], rl[k - 1, k - 1])
            dh, dl = _dd_add(lhs_h, lhs_l, -rhs_h, -rhs_l)
            swap = dh + dl > 0.0
        else:
            swap = delta * rh[k - 1, k - 1] > rh[k, k] + muh[k, k - 1] ** 2 * rh[k - 1, k - 1]
        if swap:
            _swap_rows(B, k, k - 1)
            _swap_rows(Bh, k, k - 1)
            _swap_rows(Bl, k, k - 1)
            for a in (gh, gl):
                _swap_rows(a, k, k - 1)
                _swap_cols(a, k, k - 1)
            _swap_rows(gv, k, k - 1)
            _swap_cols(gv, k, k - 1)
            t3 = rowmax[k]
            rowmax[k] = rowmax[k - 1]
            rowmax[k - 1] = t3
            swaps += 1
            since_refresh += 1
            k = max(k - 1, 1)
            if k == 1:
                _gso_row(Bh, Bl, gh, gl, gv, rh, rl, muh, mul, 0, dd)
            if since_refresh >= REFRESH:
                since_refresh = 0
                for i in range(k):
                    _gso_row(Bh, Bl, gh, gl, gv, rh, rl, muh, mul, i, dd)
        else:
            k += 1
    return OK, swaps, loops


# --- exact Python tier --------------------------------------------------------

def _lll_python(rows: list[list[int]], delta: float, bits: int, max_loops: int) -> tuple[int, int]:
    """Same loop as the kernel: Python ints for the basis, mpfr for Gram-Schmidt."""
    n = len(rows)
    if n < 2:
        return OK, 0
    with gmpy2.context(precision=bits):
        mpfr = gmpy2.mpfr
        half = mpfr(0.5)
        dlt = mpfr(delta)
        r = [[mpfr(0)] * n for _ in range(n)]
        mu = [[mpfr(0)] * n for _ in range(n)]

        def dot(i, j):
            return sum(a * b for a, b in zip(rows[i], rows[j]))

        def gso_row(k):
            rk, muk = r[k], mu[k]
            for j in range(k + 1):
                s = mpfr(dot(k, j))
                muj = mu[j]
                for i in range(j):
                    s -= muj[i] * rk[i]
                rk[j] = s
                if j < k:
                    muk[j] = s / r[j][j]

        gso_row(0)
        if not r[0][0] > 0:
            return PRECISION, 0
        k, swaps, since, loops = 1, 0, 0, 0
        while k < n:
            loops += 1
            if loops > max_loops:
                return PRECISION, swaps
            for _ in range(200):
                gso_row(k)
                changed = False
                for j in range(k - 1, -1, -1):
                    if abs(mu[k][j]) <= half:
                        continue
                    q = int(gmpy2.rint(mu[k][j]))
                    if q == 0:
                        continue
                    bj = rows[j]
                    rows[k] = [a - q * b for a, b in zip(rows[k], bj)]
                    for i in range(j):
                        mu[k][i] -= q * mu[j][i]
                    mu[k][j] -= q
                    changed = True
                if not changed:
                    break
            else:
                return PRECISION, swaps
            if not r[k][k] > 0:
                return PRECISION, swaps
            m1 = mu[k][k - 1]
            if dlt * r[k - 1][k - 1] > r[k][k] + m1 * m1 * r[k - 1][k - 1]:
                rows[k - 1], rows[k] = rows[k], rows[k - 1]
                swaps += 1
                since += 1
                k = max(k - 1, 1)
                if k == 1:
                    gso_row(0)
                if since >= REFRESH:
                    since = 0
                    for i in range(k):
                        gso_row(i)
            else:
                k += 1
    return OK, swaps


# --- public entry -------------------------------------------------------------

def _as_rows(basis) -> list[list[int]]:
    return [[int(v) for v in row] for row in np.asarray(basis, dtype=object)]


def _fits_int64(basis) -> bool:
    a = np.asarray(basis)
    if a.dtype.kind in "iu":
        return a.size == 0 or float(np.abs(a.astype(np.float64)).max()) < _LIMIT
    return all(abs(int(v)) < 2**62 for v in a.ravel())


def _pack(rows) -> np.ndarray:
    if all(abs(v) < 2**63 for row in rows for v in row):
        return np.array(rows, dtype=np.int64).reshape(len(rows), -1)
    out = np.empty((len(rows), len(rows[0]) if rows else 0), dtype=object)
    for i, row in enumerate(rows):
        out[i, :] = row
    return out


def lll_reduce(basis, delta: float = 0.9972, digits: int = 16, stats: dict | None = None,
               backend: str = "auto") -> np.ndarray:
    """LLL-reduce the rows of an integer matrix.

    `digits` is the precision of the data behind the basis; Gram-Schmidt runs
    at gso_digits(digits). backend: "auto", "kernel" or "python".
    Returns an int64 array when every entry fits, an object array otherwise.
    """
    if not 0.25 < delta <= 1:
        raise ValueError(f"delta must lie in (1/4, 1], got {delta}")
    basis = np.asarray(basis)
    if basis.ndim != 2:
        raise ValueError("basis must be a 2D array of row vectors")
    n = basis.shape[0]
    gd = gso_digits(digits)
    max_loops = 10_000 + 2000 * n * n
    stats = {} if stats is None else stats
    use_kernel = backend == "kernel" or (backend == "auto" and JIT_ENABLED)
    if use_kernel and gd <= 31 and _fits_int64(basis):
        B = np.array(basis, dtype=np.int64)
        status, swaps, loops = _lll_kernel(B, float(delta), gd > 15, max_loops)
        stats.update(tier="double-double" if gd > 15 else "float64", swaps=int(swaps))
        if status == OK:
            return B
        if status == PRECISION:
            raise LLLPrecisionError("Gram-Schmidt breakdown in the LLL kernel", 2 * digits)
    bits = max(53, math.ceil(gd * math.log2(10)) + 8)
    rows = _as_rows(basis)
    status, swaps = _lll_python(rows, float(delta), bits, max_loops)
    stats.update(tier=f"mpfr-{bits}", swaps=int(swaps))
    if status != OK:
        raise LLLPrecisionError("Gram-Schmidt breakdown in the mpfr path", 2 * digits)
    return _pack(rows)
