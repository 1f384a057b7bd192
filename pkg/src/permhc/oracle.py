"""Brute-force reference values by direct permutation enumeration.

These stay deliberately naive: every other algorithm in the package is
checked against them.
"""

from __future__ import annotations

import math
from itertools import permutations
from operator import getitem
from typing import Any, Iterator, Sequence

from .core import Instance

DEFAULT_CAP = 10


class OracleCapError(ValueError):
    """The instance is too large for exhaustive enumeration."""


def _guard(n: int, cap: int) -> None:
    if n > cap:
        raise OracleCapError(f"brute force refused: n={n} exceeds cap {cap}")


def cyclic_permutations(n: int) -> Iterator[tuple[int, ...]]:
    """All sigma in S_n consisting of a single cycle, 0-indexed.

    For n = 1 this yields the identity (the adopted convention).
    """
    if n == 1:
        yield (0,)
        return
    for order in permutations(range(1, n)):
        sigma = [0] * n
        prev = 0
        for v in order:
            sigma[prev] = v
            prev = v
        sigma[prev] = 0
        yield tuple(sigma)


def _weight(rows: Sequence[Sequence[Any]], sigma: Sequence[int], one: Any) -> Any:
    return math.prod(map(getitem, rows, sigma), start=one)


def per_brute(inst: Instance, cap: int = DEFAULT_CAP) -> Any:
    _guard(inst.n, cap)
    R = inst.ring
    rows = inst.weights
    total = R.zero
    for sigma in permutations(range(inst.n)):
        total = total + _weight(rows, sigma, R.one)
    return R.norm(total)


def hc_brute(inst: Instance, cap: int = DEFAULT_CAP) -> Any:
    _guard(inst.n, cap)
    R = inst.ring
    rows = inst.weights
    total = R.zero
    for sigma in cyclic_permutations(inst.n):
        total = total + _weight(rows, sigma, R.one)
    return R.norm(total)


def tour_weights(weights: Sequence[Sequence[int | None]], cap: int = DEFAULT_CAP) -> Iterator[int]:
    """Total weight of every Hamiltonian cycle that uses present arcs only."""
    n = len(weights)
    _guard(n, cap)
    for sigma in cyclic_permutations(n):
        arcs = [weights[i][sigma[i]] for i in range(n)]
        if n >= 2 and any(a is None for a in arcs):
            continue
        if n == 1 and arcs[0] is None:
            continue
        yield sum(arcs)


def tsp_brute(weights: Sequence[Sequence[int | None]], cap: int = DEFAULT_CAP) -> int | None:
    """Shortest tour weight, or None when no Hamiltonian cycle exists.

    Absent arcs are ``None``.
    """
    return min(tour_weights(weights, cap), default=None)


def cycle_cover_sum(inst: Instance, cap: int = 6) -> Any:
    """Permanent recomputed as a sum over set partitions of V into cycles.

    Independent of ``per_brute``: enumerates the block structure first and
    then all cyclic orders inside each block.
    """
    _guard(inst.n, cap)
    R = inst.ring
    w = inst.weights

    def cycles_through(block: tuple[int, ...]) -> Any:
        first, rest = block[0], block[1:]
        total = R.zero
        for order in permutations(rest):
            walk = (first,) + order + (first,)
            total = total + math.prod((w[a][b] for a, b in zip(walk, walk[1:])), start=R.one)
        return total

    def covers(remaining: tuple[int, ...]) -> Any:
        if not remaining:
            return R.one
        head, tail = remaining[0], remaining[1:]
        total = R.zero
        for mask in range(1 << len(tail)):
            block = (head,) + tuple(v for i, v in enumerate(tail) if mask >> i & 1)
            rest = tuple(v for i, v in enumerate(tail) if not mask >> i & 1)
            total = total + cycles_through(block) * covers(rest)
        return total

    return R.norm(covers(tuple(range(inst.n))))
