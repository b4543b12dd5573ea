"""Direct DFTs at a configurable working precision, plus decimation and stacking.

Forward kernel is exp(-2*pi*i*n*k/N) in both 1D and 2D. Up to 16 digits the
transforms run in complex128; beyond that they run on object arrays of gmpy2
mpc numbers at ceil(digits*log2(10)) + 8 bits.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import gmpy2
import numpy as np

MAX_DIGITS = 50


@dataclass(frozen=True)
class PrecisionContext:
    digits: int = 16

    def __post_init__(self):
        if not 7 <= self.digits <= MAX_DIGITS:
            raise ValueError(f"digits must be in [7, {MAX_DIGITS}], got {self.digits}")

    @property
    def extended(self) -> bool:
        return self.digits > 16

    @property
    def bits(self) -> int:
        return math.ceil(self.digits * math.log2(10)) + 8

    @property
    def tol(self) -> float:
        return 10.0 ** -(self.digits - 4)

    def mp(self):
        """gmpy2 context manager for extended-precision arithmetic."""
        return gmpy2.context(precision=self.bits)


DOUBLE = PrecisionContext(16)


def _ctx(ctx):
    if ctx is None:
        return DOUBLE
    if isinstance(ctx, int):
        return PrecisionContext(ctx)
    return ctx


def quantize(values: np.ndarray, digits: int) -> np.ndarray:
    """Round real and imaginary parts to `digits` significant decimal digits."""
    if digits >= 16:
        return values

    def q(a):
        a = np.asarray(a, dtype=np.float64)
        with np.errstate(divide="ignore"):
            e = np.floor(np.log10(np.abs(a)))
        e = np.where(np.isfinite(e), e, 0.0)
        scale = 10.0 ** (digits - 1 - e)
        return np.round(a * scale) / scale

    values = np.asarray(values)
    if np.iscomplexobj(values):
        return q(values.real) + 1j * q(values.imag)
    return q(values)


@lru_cache(maxsize=256)
def _root_table(n: int, digits: int) -> np.ndarray:
    """eta_n^j for j in [0, n), eta_n = exp(-2*pi*i/n)."""
    ctx = PrecisionContext(digits)
    if not ctx.extended:
        j = np.arange(n)
        table = np.exp(-2j * np.pi * j / n)
        # exact values at the quarter turns keep integer inputs clean
        for jj in range(n):
            if (4 * jj) % n == 0:
                table[jj] = (1, -1j, -1, 1j)[(4 * jj) // n]
        table.setflags(write=False)
        return table
    with ctx.mp():
        table = np.array([gmpy2.root_of_unity(n, (n - j) % n) for j in range(n)], dtype=object)
    table.setflags(write=False)
    return table


def roots(n: int, ctx=None) -> np.ndarray:
    return _root_table(int(n), _ctx(ctx).digits)


@lru_cache(maxsize=256)
def _dft_matrix(n: int, digits: int) -> np.ndarray:
    table = _root_table(n, digits)
    idx = np.outer(np.arange(n), np.arange(n)) % n
    mat = table[idx]
    mat.setflags(write=False)
    return mat


def dft_matrix(n: int, ctx=None) -> np.ndarray:
    return _dft_matrix(int(n), _ctx(ctx).digits)


def _prepare(x, ctx):
    x = np.asarray(x)
    if ctx.extended and x.dtype != object:
        with ctx.mp():
            if np.iscomplexobj(x):
                x = np.array([gmpy2.mpc(complex(v)) for v in x.ravel()], dtype=object).reshape(x.shape)
            else:
                x = np.array([int(v) if float(v).is_integer() else gmpy2.mpfr(float(v)) for v in x.ravel()],
                             dtype=object).reshape(x.shape)
    return x


def dft_1d(x, ctx=None) -> np.ndarray:
    ctx = _ctx(ctx)
    x = _prepare(x, ctx)
    n = x.shape[-1]
    if ctx.extended:
        with ctx.mp():
            return x @ _dft_matrix(n, ctx.digits).T
    return quantize(x.astype(np.complex128) @ _dft_matrix(n, ctx.digits).T, ctx.digits)


def _conj(a):
    if a.dtype == object:
        return np.vectorize(lambda v: v.conjugate() if hasattr(v, "conjugate") else v, otypes=[object])(a)
    return a.conj()


def idft_1d(xt, ctx=None) -> np.ndarray:
    ctx = _ctx(ctx)
    xt = _prepare(xt, ctx)
    n = xt.shape[-1]
    if ctx.extended:
        with ctx.mp():
            return (xt @ _conj(_dft_matrix(n, ctx.digits)).T) / n
    return (xt.astype(np.complex128) @ _dft_matrix(n, ctx.digits).conj().T) / n


def dft_2d(X, ctx=None) -> np.ndarray:
    ctx = _ctx(ctx)
    X = _prepare(X, ctx)
    n1, n2 = X.shape
    F1, F2 = _dft_matrix(n1, ctx.digits), _dft_matrix(n2, ctx.digits)
    if ctx.extended:
        with ctx.mp():
            return F1 @ X @ F2
    return quantize(F1 @ X.astype(np.complex128) @ F2, ctx.digits)


def idft_2d(Xt, ctx=None) -> np.ndarray:
    ctx = _ctx(ctx)
    Xt = _prepare(Xt, ctx)
    n1, n2 = Xt.shape
    F1, F2 = _dft_matrix(n1, ctx.digits), _dft_matrix(n2, ctx.digits)
    if ctx.extended:
        with ctx.mp():
            return _conj(F1) @ Xt @ _conj(F2) / (n1 * n2)
    return F1.conj() @ Xt.astype(np.complex128) @ F2.conj() / (n1 * n2)


def to_complex128(a) -> np.ndarray:
    a = np.asarray(a)
    if a.dtype == object:
        return np.vectorize(complex, otypes=[np.complex128])(a)
    return a.astype(np.complex128)


def real_part(a) -> np.ndarray:
    """Real part, kept at extended precision for object arrays."""
    a = np.asarray(a)
    if a.dtype == object:
        return np.vectorize(lambda v: v.real if hasattr(v, "real") else v, otypes=[object])(a)
    return a.real.copy()


def decimate_freq(x, d: int) -> np.ndarray:
    """Sum x over the d translates by N/d; keeps every d-th DFT coefficient."""
    x = np.asarray(x)
    n = x.shape[-1]
    if d < 1 or n % d:
        raise ValueError(f"decimation factor {d} does not divide length {n}")
    return x.reshape(d, n // d).sum(axis=0)


def stack_time(x, d: int) -> np.ndarray:
    if d < 1:
        raise ValueError("stack factor must be positive")
    return np.tile(np.asarray(x), d)


def stack_freq(x, d: int) -> np.ndarray:
    if d < 1:
        raise ValueError("stack factor must be positive")
    x = np.asarray(x)
    y = np.zeros(d * len(x), dtype=x.dtype)
    y[::d] = d * x
    return y
