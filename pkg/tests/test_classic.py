from __future__ import annotations

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from permhc.classic import hc_dp, hc_ie, hc_ie_batch, per_ryser, per_ryser_batch
from permhc.core import Instance, ModRing
from permhc.oracle import hc_brute, per_brute

from .conftest import rand_instance

matrices = st.integers(1, 6).flatmap(
    lambda n: st.lists(st.lists(st.integers(-6, 6), min_size=n, max_size=n), min_size=n, max_size=n)
)


@settings(max_examples=150, deadline=None)
@given(matrices)
def test_ryser_matches_brute(rows):
    inst = Instance.from_rows(rows)
    assert per_ryser(inst) == per_brute(inst)


@settings(max_examples=150, deadline=None)
@given(matrices)
def test_hc_counters_match_brute(rows):
    inst = Instance.from_rows(rows)
    expected = hc_brute(inst)
    assert hc_ie(inst) == expected
    assert hc_dp(inst) == expected


def test_spot_values():
    assert per_ryser(Instance.from_rows([[1, 2], [3, 4]])) == per_brute(Instance.from_rows([[1, 2], [3, 4]]))
    assert per_ryser(Instance.from_rows([[1] * 5] * 5)) == 120
    assert per_ryser(Instance.from_rows([[-5]])) == -5
    cycle4 = [[int(j == (i + 1) % 4) for j in range(4)] for i in range(4)]
    assert hc_ie(Instance.from_rows(cycle4)) == hc_brute(Instance.from_rows(cycle4)) == 1
    zero_col = [[1, 0, 1], [1, 0, 1], [1, 0, 1]]
    assert hc_ie(Instance.from_rows(zero_col)) == 0
    twos = [[2 * int(i != j) for j in range(3)] for i in range(3)]
    assert hc_dp(Instance.from_rows(twos)) == hc_brute(Instance.from_rows(twos))


def test_mod_ring_counters(rng):
    ring = ModRing(13)
    for n in range(1, 7):
        inst = Instance.from_rows([[rng.randrange(13) for _ in range(n)] for _ in range(n)], ring)
        assert per_ryser(inst) == per_brute(inst)
        assert hc_ie(inst) == hc_dp(inst) == hc_brute(inst)


def test_dp_cap():
    with pytest.raises(MemoryError):
        hc_dp(Instance.from_rows([[1] * 5] * 5), cap=4)


@pytest.mark.parametrize("p", [2, 101, 40009, 2**31 - 1])
@pytest.mark.parametrize("k", range(1, 7))
def test_batch_evaluators_match_scalar(p, k):
    gen = np.random.default_rng(p + k)
    mats = gen.integers(0, p, size=(25, k, k))
    per = per_ryser_batch(mats, p)
    hc = hc_ie_batch(mats, p)
    for i in range(25):
        inst = Instance.from_rows(mats[i].tolist(), ModRing(p))
        assert per[i] == per_ryser(inst)
        assert hc[i] == hc_ie(inst)


def test_batch_accepts_strided_views():
    gen = np.random.default_rng(3)
    cols = gen.integers(0, 97, size=(9, 40))
    mats = cols.T.reshape(40, 3, 3)
    assert not mats.flags.c_contiguous
    np.testing.assert_array_equal(per_ryser_batch(mats, 97), per_ryser_batch(np.ascontiguousarray(mats), 97))


def test_batch_rejects_huge_modulus():
    with pytest.raises(ValueError):
        per_ryser_batch(np.zeros((1, 2, 2), dtype=np.int64), 2**31 + 11)


def test_big_integer_entries(rng):
    inst = rand_instance(rng, 5, -10**30, 10**30)
    assert per_ryser(inst) == per_brute(inst)
    assert hc_ie(inst) == hc_brute(inst)
