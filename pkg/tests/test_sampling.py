import math
from itertools import product

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from intrecover.numtheory import num_divisors
from intrecover.sampling import (MinimalSpectrum, amb1d_witness, amb2d_witness, binary_pair_witness, canonical_rep,
                                 count_classes, enumerate_classes, extract_subsignal, orbit, sample_lambdas,
                                 sample_minimal, searchspace_dims, subsignal_geometry)
from intrecover.transform import dft_1d, dft_2d, to_complex128


def cyclic_subgroups(n1, n2):
    """Brute force: distinct cyclic subgroups of Z_n1 x Z_n2."""
    seen = set()
    for k, l in product(range(n1), range(n2)):
        g, cur = set(), (0, 0)
        while True:
            g.add(cur)
            cur = ((cur[0] + k) % n1, (cur[1] + l) % n2)
            if cur == (0, 0):
                break
        seen.add(frozenset(g))
    return len(seen)


def test_geometry_examples():
    g = subsignal_geometry(4, 6, 2, 2)
    assert (g.d1, g.d2, g.D1, g.D2, g.D, g.d) == (2, 2, 2, 3, 6, 2)
    g = subsignal_geometry(2, 3, 1, 1)
    assert (g.D, g.d, g.coset_size) == (6, 1, 1)
    g = subsignal_geometry(30, 30, 2, 6)
    assert (g.D1, g.D2, g.D, g.coset_size) == (15, 5, 15, 60)


def test_orbit_examples():
    assert orbit(2, 3, 1, 1) == {(1, 1), (1, 2)}
    assert orbit(7, 9, 0, 0) == {(0, 0)}
    assert orbit(4, 6, 2, 2) == {(2, 2), (2, 4)}


@pytest.mark.parametrize("shape,count", [((4, 6), 12), ((9, 11), 6), ((30, 30), 140), ((2, 3), 4), ((23, 23), 25),
                                         ((2, 2), 4), ((1, 1), 1)])
def test_class_counts(shape, count):
    assert count_classes(*shape) == count


def test_coprime_grids_and_prime_squares():
    for n1, n2 in [(4, 9), (5, 8), (7, 12)]:
        assert count_classes(n1, n2) == num_divisors(n1) * num_divisors(n2)
    for p in (3, 5, 7, 11):
        assert count_classes(p, p) == (p * p + p - 2) // (p - 1)


@pytest.mark.parametrize("n1,n2", [(n1, n2) for n1 in range(1, 9) for n2 in range(1, 9)])
def test_classes_are_cyclic_subgroups(n1, n2):
    classes = enumerate_classes(n1, n2)
    assert len(classes) == cyclic_subgroups(n1, n2)
    cover = [f for c in classes for f in c.orbit]
    assert sorted(cover) == sorted(product(range(n1), range(n2)))
    for c in classes:
        assert canonical_rep(n1, n2, *c.rep) == c.rep == min(c.orbit)


def test_subsignal_examples(rng):
    assert list(extract_subsignal(amb2d_witness(2, 3, 1, 1), 1, 1)) == [1, 0, -1, -1, 0, 1]
    assert not extract_subsignal(np.zeros((4, 6), int), 2, 2).any()
    X = rng.integers(0, 5, (4, 6))
    s = to_complex128(dft_1d(extract_subsignal(X, 2, 2)))
    Xt = to_complex128(dft_2d(X))
    for lam in range(6):
        assert np.isclose(s[lam], Xt[2 * lam % 4, 2 * lam % 6])


def test_subsignal_coset_sums(rng):
    X = rng.integers(0, 3, (30, 30))
    s = extract_subsignal(X, 2, 6)
    assert len(s) == 15 and s.sum() == X.sum()
    assert np.array_equal(extract_subsignal(np.ones((30, 30), int), 2, 6), np.full(15, 60))


@pytest.mark.parametrize("shape,count", [((9, 11), 6), ((12, 18), 48)])
def test_minimal_sample_sizes(rng, shape, count):
    spec = sample_minimal(rng.integers(0, 2, shape), 1)
    assert spec.num_coefficients == count


def test_sample_1x1_and_lambdas():
    spec = sample_minimal(np.array([[7]]), 1)
    assert spec.num_coefficients == 1 and spec.classes[0].entries[0][1] == 7
    assert sample_lambdas(30, 1) == [1]
    assert sample_lambdas(30, 3) == [1, 7, 11]
    assert sample_lambdas(30, 10) == [1, 7, 11, 13]


def test_spectrum_json_round_trip(rng):
    for digits in (8, 16, 34):
        spec = sample_minimal(rng.integers(0, 4, (6, 10)), 2, digits)
        text = spec.to_json()
        again = MinimalSpectrum.from_json(text)
        assert again.to_json() == text
        assert again.n1 == 6 and again.digits == digits


def test_spectrum_json_rejects_garbage():
    with pytest.raises((ValueError, KeyError)):
        MinimalSpectrum.from_json('{"schema": "something-else"}')


def test_amb1d_examples():
    assert list(amb1d_witness(6)) == [1, 0, -1, -1, 0, 1]
    assert list(amb1d_witness(7)) == [1, -1, 0, 0, 0, 0, 0]
    s = np.abs(to_complex128(dft_1d(amb1d_witness(12))))
    assert set(np.flatnonzero(s > 1e-9)) == {1, 5, 7, 11}


def test_amb2d_examples():
    assert amb2d_witness(2, 3, 1, 1).tolist() == [[1, -1, 0], [-1, 1, 0]]
    row = [1, -1, 0, 1, -1, 0]
    assert amb2d_witness(4, 6, 2, 2).tolist() == [row, [-v for v in row]] * 2
    W = amb2d_witness(3, 5, 0, 0)
    Wt = to_complex128(dft_2d(W))
    assert set(map(tuple, np.argwhere(np.abs(Wt) > 1e-9))) == {(0, 0)}


def test_binary_pairs():
    X1, X2 = binary_pair_witness(2, 3, 1, 1)
    assert X1.tolist() == [[1, 0, 0], [0, 1, 0]]
    assert X2.tolist() == [[0, 1, 0], [1, 0, 0]]
    X1, X2 = binary_pair_witness(4, 6, 2, 2)
    diff = np.abs(to_complex128(dft_2d(X1)) - to_complex128(dft_2d(X2)))
    assert set(map(tuple, np.argwhere(diff > 1e-9))) == {(2, 2), (2, 4)}
    with pytest.raises(ValueError):
        binary_pair_witness(3, 3, 0, 0)


def test_searchspace_dims():
    assert searchspace_dims(30) == (16, 6)
    assert searchspace_dims(60) == (38, 14)
    for p in (3, 5, 7, 31):
        assert searchspace_dims(p) == (p - 3, p - 3)


@settings(max_examples=40, deadline=None)
@given(st.integers(1, 12), st.integers(1, 12), st.data())
def test_minimal_spectrum_determines_full_spectrum(n1, n2, data):
    # full data at each class pins every DFT coefficient: sampling with large M stores whole orbits
    X = np.array(data.draw(st.lists(st.integers(0, 3), min_size=n1 * n2, max_size=n1 * n2))).reshape(n1, n2)
    spec = sample_minimal(X, 10**6)
    Xt = to_complex128(dft_2d(X))
    for c in spec.classes:
        for lam, v in c.entries:
            assert math.gcd(lam, c.D) == 1
            k, l = c.rep
            assert np.isclose(complex(v), Xt[lam * k % n1, lam * l % n2])
