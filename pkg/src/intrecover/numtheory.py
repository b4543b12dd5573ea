"""Integer helpers: factorization, divisors, totients and unit-ball volumes."""
from __future__ import annotations

import math
from functools import lru_cache

Factorization = list[tuple[int, int]]

_WHEEL = (2, 3, 5, 7, 11, 13)


@lru_cache(maxsize=4096)
def _factor_cached(n: int) -> tuple[tuple[int, int], ...]:
    out = []
    for p in _WHEEL:
        if n % p == 0:
            e = 0
            while n % p == 0:
                n //= p
                e += 1
            out.append((p, e))
    # 2*3*5 wheel over the remaining candidates
    step = (2, 4, 6, 2, 6, 4, 2, 4)
    p, i = 17, 0
    while p * p <= n:
        if n % p == 0:
            e = 0
            while n % p == 0:
                n //= p
                e += 1
            out.append((p, e))
        p += step[i]
        i = (i + 1) % 8
    if n > 1:
        out.append((n, 1))
    return tuple(out)


def factorize(n: int) -> Factorization:
    """Prime factorization of n as sorted (prime, exponent) pairs; [] for n = 1."""
    n = int(n)
    if n < 1:
        raise ValueError(f"factorize needs n >= 1, got {n}")
    return list(_factor_cached(n))


def prime_factors(n: int) -> list[int]:
    return [p for p, _ in _factor_cached(int(n))]


@lru_cache(maxsize=4096)
def _divisors_cached(n: int) -> tuple[int, ...]:
    divs = [1]
    for p, e in _factor_cached(n):
        divs = [d * p**i for d in divs for i in range(e + 1)]
    return tuple(sorted(divs))


def divisors(n: int) -> list[int]:
    n = int(n)
    if n < 1:
        raise ValueError(f"divisors needs n >= 1, got {n}")
    return list(_divisors_cached(n))


def num_divisors(n: int) -> int:
    return math.prod(e + 1 for _, e in _factor_cached(int(n)))


def totient(n: int) -> int:
    n = int(n)
    if n < 1:
        raise ValueError(f"totient needs n >= 1, got {n}")
    result = n
    for p, _ in _factor_cached(n):
        result -= result // p
    return result


def coprimes(n: int) -> list[int]:
    """Residues in [0, n) coprime to n (just [0] when n = 1)."""
    if n == 1:
        return [0]
    return [k for k in range(1, n) if math.gcd(k, n) == 1]


def log_unit_ball_volume(n: int) -> float:
    return 0.5 * n * math.log(math.pi) - math.lgamma(0.5 * n + 1)


def unit_ball_volume(n: int) -> float:
    """Volume of the n-dimensional unit ball, pi^(n/2) / Gamma(n/2 + 1)."""
    if n < 0:
        raise ValueError("dimension must be nonnegative")
    return math.exp(log_unit_ball_volume(n))
