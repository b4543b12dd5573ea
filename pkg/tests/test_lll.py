import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from intrecover.lll import LLLPrecisionError, gso_digits, lll_reduce
from lll_check import gram_det, is_size_reduced, lovasz_holds, same_lattice

DELTA = 0.9972


def rows(a):
    return [[int(v) for v in r] for r in np.asarray(a)]


def certify(B, R, delta=DELTA):
    B, R = rows(B), rows(R)
    assert is_size_reduced(R)
    assert lovasz_holds(R, delta)
    assert gram_det(R) == gram_det(B)
    assert same_lattice(B, R)


def test_identity_unchanged():
    assert np.array_equal(lll_reduce(np.eye(6, dtype=int)), np.eye(6, dtype=int))


def test_skewed_plane_basis():
    R = lll_reduce([[1, 0], [10, 1]])
    bound = (4 / (4 * DELTA - 1)) ** 0.5
    assert np.linalg.norm(R[0]) <= bound
    certify([[1, 0], [10, 1]], R)


@pytest.mark.parametrize("backend", ["kernel", "python"])
def test_random_20x20(rng, backend):
    B = rng.integers(-1000, 1001, (20, 20))
    certify(B, lll_reduce(B, backend=backend))


def test_backends_agree(rng):
    for _ in range(5):
        B = rng.integers(-50, 51, (12, 15))
        assert np.array_equal(lll_reduce(B, backend="kernel"), lll_reduce(B, backend="python"))


def test_rectangular_and_knapsack(rng):
    # a knapsack-style basis: identity plus one large column
    a = rng.integers(10**6, 10**7, 10)
    B = np.hstack([np.eye(10, dtype=np.int64), 10**4 * a[:, None]])
    certify(B, lll_reduce(B))


def test_large_entries_leave_int64():
    big = 10**18
    B = np.array([[1, 0, big], [0, 1, big + 1], [0, 0, 3 * big]], dtype=object)
    R = lll_reduce(B, digits=40)
    certify(B, R)


def test_bad_arguments():
    with pytest.raises(ValueError):
        lll_reduce([[1, 0], [0, 1]], delta=0.2)
    with pytest.raises(ValueError):
        lll_reduce([1, 2, 3])


def test_precision_tiers():
    assert gso_digits(8) <= 15 < gso_digits(16) <= 31 < gso_digits(30)
    assert issubclass(LLLPrecisionError, ArithmeticError)


@settings(max_examples=30, deadline=None)
@given(st.integers(2, 10), st.integers(0, 3), st.integers(1, 1000), st.integers(0, 2**32 - 1))
def test_reduction_certificates(n, extra, bound, seed):
    B = np.random.default_rng(seed).integers(-bound, bound + 1, (n, n + extra))
    if np.linalg.matrix_rank(B) < n:
        return
    certify(B, lll_reduce(B))


def test_pure_python_mode_solves():
    import os
    import subprocess
    import sys
    code = ("import numpy as np; from intrecover._jit import JIT_ENABLED; "
            "from intrecover.lattice import BetaParams, solve_subproblem, subproblem_from_signal; "
            "x = np.random.default_rng(1).integers(0, 2, 15); info = {}; "
            "y = solve_subproblem(subproblem_from_signal(x, 1, L=1), BetaParams(beta2=1e12), info); "
            "assert not JIT_ENABLED and np.array_equal(x, y) and info['lll']['tier'].startswith('mpfr'), info")
    env = dict(os.environ, INTRECOVER_DISABLE_JIT="1")
    subprocess.run([sys.executable, "-c", code], env=env, check=True)
