from __future__ import annotations

import itertools
import random
from collections import Counter

import pytest
from hypothesis import given, settings, strategies as st

from permhc.atsp import (
    PolyRing,
    TruncatedPoly,
    atsp_shortest,
    embed,
    ingest_atsp,
    tour_histogram,
    tour_polynomial,
    validate_weights,
)
from permhc.core import InputError
from permhc.oracle import tour_weights, tsp_brute

CAP = 7


def naive_product(a: list[int], b: list[int], cap: int) -> list[int]:
    out = [0] * (cap + 1)
    for i, x in enumerate(a):
        for j, y in enumerate(b):
            if i + j <= cap:
                out[i + j] += x * y
    return out


polys = st.one_of(
    st.lists(st.integers(-50, 50), min_size=0, max_size=CAP + 3).map(lambda c: TruncatedPoly(c, CAP)),
    st.tuples(st.integers(0, CAP + 2), st.integers(-5, 5)).map(lambda t: TruncatedPoly.monomial(t[0], CAP, t[1])),
)


@settings(max_examples=150, deadline=None)
@given(polys, polys, polys)
def test_ring_axioms(a, b, c):
    zero, one = PolyRing(CAP).zero, PolyRing(CAP).one
    assert a + b == b + a
    assert (a + b) + c == a + (b + c)
    assert a * b == b * a
    assert (a * b) * c == a * (b * c)
    assert a * (b + c) == a * b + a * c
    assert a + zero == a and a * one == a
    assert a * zero == zero
    assert a - a == zero and a + (-a) == zero


@settings(max_examples=100, deadline=None)
@given(polys, polys)
def test_product_matches_schoolbook(a, b):
    assert (a * b).to_list() == naive_product(a.to_list(), b.to_list(), CAP)


def test_truncation_discards_high_degrees():
    z4 = TruncatedPoly.monomial(4, 5)
    assert (z4 * z4).is_zero()
    assert TruncatedPoly.monomial(9, 5).is_zero()
    assert TruncatedPoly([1, 2, 3, 4], 1).to_list() == [1, 2]


def test_mixed_integer_arithmetic():
    x = TruncatedPoly([1, 1], 3)
    assert (x * 2).to_list() == [2, 2, 0, 0]
    assert (3 - x).to_list() == [2, -1, 0, 0]
    assert x == TruncatedPoly([1, 1, 0, 0], 3)
    assert TruncatedPoly.monomial(0, 3, 5) == 5


def test_cap_mismatch_rejected():
    with pytest.raises(ValueError):
        TruncatedPoly([1], 2) + TruncatedPoly([1], 3)


def test_lowest_degree():
    assert TruncatedPoly([0, 0, 4, 1], 3).lowest_degree() == 2
    assert TruncatedPoly.zero(3).lowest_degree() is None


def test_all_unit_triangle():
    w = [[1] * 3 for _ in range(3)]
    poly = tour_polynomial(w, 1)
    assert poly.to_list()[:3] == [0, 0, 0]
    assert poly.to_list()[3] == 2
    assert atsp_shortest(w, 1) == 3


def test_asymmetric_triangle():
    w = [[0, 1, 2], [2, 0, 1], [1, 2, 0]]
    assert atsp_shortest(w, 2) == tsp_brute(w) == 3
    assert tour_histogram(w, 2) == {3: 1, 6: 1}


def test_open_path_has_no_tour():
    w = [[None, 1, None], [None, None, 1], [None, None, None]]
    assert atsp_shortest(w, 1) is None
    assert tsp_brute(w) is None


def test_zero_weight_arc_differs_from_absent():
    present = [[None, 0], [0, None]]
    absent = [[None, 0], [None, None]]
    assert atsp_shortest(present, 0) == 0
    assert atsp_shortest(absent, 0) is None


def test_embed_maps_weights_to_monomials():
    inst = embed([[None, 2], [0, None]], 4)
    assert inst.f(1, 1).is_zero()
    assert inst.f(1, 2).to_list() == [0, 0, 1, 0, 0]
    assert inst.f(2, 1).to_list() == [1, 0, 0, 0, 0]


def random_weights(rng: random.Random, n: int, M: int = 10, absent: float = 0.3):
    return [[None if rng.random() < absent else rng.randint(0, M) for _ in range(n)] for _ in range(n)]


@pytest.mark.parametrize("n", range(1, 8))
def test_matches_brute_and_histogram(n):
    rng = random.Random(500 + n)
    for _ in range(10):
        w = random_weights(rng, n)
        assert atsp_shortest(w, 10) == tsp_brute(w)
        assert tour_histogram(w, 10) == dict(Counter(tour_weights(w)))


def test_cap_headroom_changes_nothing():
    rng = random.Random(9)
    for n in range(2, 7):
        for _ in range(5):
            w = random_weights(rng, n)
            tight = tour_polynomial(w, 10)
            loose = tour_polynomial(w, 10, cap=10 * n + 5)
            assert loose.to_list()[: tight.cap + 1] == tight.to_list()
            assert not any(loose.to_list()[tight.cap + 1:])


def test_coefficients_count_every_tour():
    n = 5
    w = [[None if i == j else (i * 3 + j) % 4 for j in range(n)] for i in range(n)]
    hist = tour_histogram(w, 3)
    assert sum(hist.values()) == len(list(itertools.permutations(range(n - 1))))


def test_weight_validation():
    with pytest.raises(InputError):
        validate_weights([[0, 11], [1, 0]], 10)
    with pytest.raises(InputError):
        validate_weights([[0, -1], [1, 0]], 10)
    with pytest.raises(InputError):
        validate_weights([[0, 1], [1]], 10)
    with pytest.raises(InputError):
        atsp_shortest([[0, 5], [5, 0]], 4)


def test_ingest_atsp_format():
    w = ingest_atsp("# comment\n3\n- 1 2\n2 - 1\n1 2 -\n")
    assert w == [[None, 1, 2], [2, None, 1], [1, 2, None]]
    with pytest.raises(InputError):
        ingest_atsp("2\n- x\n1 -\n")
