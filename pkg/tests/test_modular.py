from __future__ import annotations

import math
import random

import pytest
from hypothesis import given, strategies as st

from permhc.core import Instance, InvariantError
from permhc.modular import (
    CrtPlan,
    crt_reconstruct,
    is_prime,
    mod_reduce_instance,
    next_prime,
    select_primes,
    value_bound,
)


def _sieve(limit):
    flags = [True] * (limit + 1)
    flags[0] = flags[1] = False
    for i in range(2, int(limit**0.5) + 1):
        if flags[i]:
            flags[i * i::i] = [False] * len(flags[i * i::i])
    return flags


def test_is_prime_matches_sieve():
    flags = _sieve(5000)
    assert [is_prime(x) for x in range(5001)] == flags


def _expected_primes(M, n):
    """Independent scan: smallest primes above the floor until the product beats 2B."""
    flags = _sieve(10000)
    floor = max(n * n, (n - 1) * n + 1)
    target = 2 * M**n * math.factorial(n)
    out, prod = [], 1
    for x in range(floor + 1, 10000):
        if flags[x]:
            out.append(x)
            prod *= x
            if prod > target:
                return out
    raise AssertionError("scan too short")


@pytest.mark.parametrize("M, n", [(1, 4), (0, 3), (1, 1), (10, 9), (5, 8), (1, 20)])
def test_select_primes(M, n):
    plan = select_primes(M, n)
    assert list(plan.primes) == _expected_primes(M, n)
    assert plan.modulus > 2 * value_bound(M, n)
    assert min(plan.primes) > n * n


def test_select_primes_small_cases():
    assert select_primes(1, 4).primes == (17, 19)
    assert select_primes(0, 3).primes == (11,)


def test_select_primes_single_vertex_needs_two_primes():
    # the product has to exceed 2 * 1 * 1! = 2, which 2 alone does not
    plan = select_primes(1, 1)
    assert plan.primes == (2, 3)


def test_mod_reduce_instance():
    inst = mod_reduce_instance(Instance.from_rows([[-3, 17], [1, 2]]), 17)
    assert inst.rows() == [[14, 0], [1, 2]]
    assert mod_reduce_instance(Instance.from_rows([[1, 2], [3, 4]]), 3).rows() == [[1, 2], [0, 1]]


def test_crt_examples():
    plan = CrtPlan.from_primes([3, 5])
    balanced = [x for x in range(-7, 8) if x % 3 == 2 and x % 5 == 3]
    assert crt_reconstruct([2, 3], plan) == balanced[0]
    assert crt_reconstruct([0, 0], plan) == 0
    assert crt_reconstruct([4], CrtPlan.from_primes([11])) == 4


@given(st.integers(0, 10**6))
def test_crt_roundtrip(seed):
    rng = random.Random(seed)
    plan = CrtPlan.from_primes([10007, 10009, 10037])
    x = rng.randrange(plan.low, plan.high)
    assert crt_reconstruct([x % p for p in plan.primes], plan) == x


def test_crt_balanced_range_edges():
    plan = CrtPlan.from_primes([3, 5])
    assert (plan.low, plan.high) == (-7, 8)
    even = CrtPlan.from_primes([2, 3])
    got = {crt_reconstruct([x % 2, x % 3], even) for x in range(even.low, even.high)}
    assert got == set(range(-3, 3))


def test_crt_rejects_bad_input():
    plan = CrtPlan.from_primes([3, 5])
    with pytest.raises(InvariantError):
        crt_reconstruct([1], plan)
    with pytest.raises(InvariantError):
        crt_reconstruct([3, 0], plan)
    with pytest.raises(ValueError):
        CrtPlan.from_primes([3, 3])


def test_next_prime_strict():
    assert next_prime(7) == 11
    assert next_prime(1) == 2
    assert next_prime(400) == 401
