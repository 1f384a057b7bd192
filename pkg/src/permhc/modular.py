"""Prime selection, reduction mod p and signed CRT reconstruction."""

from __future__ import annotations

import math
from dataclasses import dataclass
from math import isqrt
from typing import Sequence

from .core import Instance, InvariantError, ModRing


def is_prime(x: int) -> bool:
    """Deterministic trial division; the primes used here are poly(n) sized."""
    if x < 2:
        return False
    if x % 2 == 0:
        return x == 2
    for d in range(3, isqrt(x) + 1, 2):
        if x % d == 0:
            return False
    return True


def next_prime(x: int) -> int:
    """Smallest prime strictly greater than x."""
    c = max(x + 1, 2)
    while not is_prime(c):
        c += 1
    return c


def value_bound(M: int, n: int) -> int:
    """Upper bound M^n * n! on |per| (and hence on |hc|)."""
    return M**n * math.factorial(n)


@dataclass(frozen=True)
class CrtPlan:
    primes: tuple[int, ...]
    coeffs: tuple[int, ...]
    modulus: int

    @classmethod
    def from_primes(cls, primes: Sequence[int]) -> "CrtPlan":
        primes = tuple(primes)
        if not primes:
            raise ValueError("a CRT plan needs at least one prime")
        if len(set(primes)) != len(primes):
            raise ValueError(f"primes must be distinct: {primes}")
        modulus = math.prod(primes)
        coeffs = []
        for p in primes:
            rest = modulus // p
            coeffs.append(rest * pow(rest, -1, p))
        return cls(primes, tuple(coeffs), modulus)

    @property
    def low(self) -> int:
        return -(self.modulus // 2)

    @property
    def high(self) -> int:
        """Exclusive upper end of the balanced range."""
        return -(-self.modulus // 2)


def select_primes(M: int, n: int) -> CrtPlan:
    """Smallest primes above n^2 whose product exceeds 2 * M^n * n!.

    The floor also covers the (n-1)n+1 interpolation points of the largest
    self-reduction (k = 1), so every field is big enough.
    """
    if M < 0 or n < 1:
        raise ValueError(f"need M >= 0 and n >= 1, got M={M} n={n}")
    floor = max(n * n, (n - 1) * n + 1)
    target = 2 * value_bound(M, n)
    primes = []
    prod = 1
    p = floor
    while not primes or prod <= target:
        p = next_prime(p)
        primes.append(p)
        prod *= p
    if min(primes) < (n - 1) * n + 1:
        raise InvariantError("prime smaller than the interpolation point count")
    return CrtPlan.from_primes(primes)


def mod_reduce_instance(inst: Instance, p: int) -> Instance:
    ring = ModRing(p)
    return Instance(inst.n, tuple(tuple(x % p for x in row) for row in inst.weights), ring)


def crt_reconstruct(residues: Sequence[int], plan: CrtPlan) -> int:
    """The unique x in [-floor(P/2), ceil(P/2)) with x = a_i mod p_i."""
    if len(residues) != len(plan.primes):
        raise InvariantError(f"{len(residues)} residues for {len(plan.primes)} primes")
    for a, p in zip(residues, plan.primes):
        if not 0 <= a < p:
            raise InvariantError(f"residue {a} not normalized mod {p}")
    x = sum(a * r for a, r in zip(residues, plan.coeffs)) % plan.modulus
    if 2 * x >= plan.modulus:
        x -= plan.modulus
    return x
