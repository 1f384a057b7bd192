"""Exact shortest asymmetric TSP tour through the z^w weight embedding.

Each present arc of weight w becomes the monomial z^w and each absent arc the
zero polynomial.  Counting Hamiltonian cycles over these weights gives a
polynomial whose coefficient at z^d is the number of tours of weight d, so
the shortest tour is the lowest degree with a non-zero coefficient.
"""

from __future__ import annotations

from typing import Any, Sequence

import numpy as np

from .classic import hc_ie
from .core import InputError, Instance, InvariantError, parse_matrix_rows

ABSENT = "-"


class TruncatedPoly:
    """Integer polynomial in z with every degree above ``cap`` discarded.

    Coefficients are Python integers held in a numpy object array, so sums
    and shifts stay exact and run in C loops.
    """

    __slots__ = ("cap", "coeffs", "_mono")

    def __init__(self, coeffs: Sequence[int] | np.ndarray, cap: int, _mono: tuple[int, int] | None = None):
        if cap < 0:
            raise ValueError(f"degree cap must be >= 0, got {cap}")
        self.cap = cap
        arr = np.zeros(cap + 1, dtype=object)
        src = list(coeffs)[: cap + 1]
        arr[: len(src)] = [int(c) for c in src]
        self.coeffs = arr
        # (degree, coefficient) when known to have at most one term
        self._mono = _mono

    @classmethod
    def _wrap(cls, arr: np.ndarray, cap: int, mono: tuple[int, int] | None = None) -> "TruncatedPoly":
        poly = cls.__new__(cls)
        poly.cap, poly.coeffs, poly._mono = cap, arr, mono
        return poly

    @classmethod
    def zero(cls, cap: int) -> "TruncatedPoly":
        return cls._wrap(np.zeros(cap + 1, dtype=object), cap, (0, 0))

    @classmethod
    def monomial(cls, degree: int, cap: int, coeff: int = 1) -> "TruncatedPoly":
        """coeff * z^degree, truncated (to zero if degree exceeds cap)."""
        if degree < 0:
            raise ValueError(f"negative degree {degree}")
        if degree > cap:
            return cls.zero(cap)
        arr = np.zeros(cap + 1, dtype=object)
        arr[degree] = coeff
        return cls._wrap(arr, cap, (degree, coeff))

    def _check(self, other: "TruncatedPoly") -> None:
        if other.cap != self.cap:
            raise ValueError(f"degree caps differ: {self.cap} vs {other.cap}")

    def _lift(self, other: Any) -> "TruncatedPoly":
        if isinstance(other, TruncatedPoly):
            if other.cap != self.cap:
                raise ValueError(f"degree caps differ: {self.cap} vs {other.cap}")
            return other
        if isinstance(other, (int, np.integer)):
            return TruncatedPoly.monomial(0, self.cap, int(other))
        return NotImplemented

    def _known_zero(self) -> bool:
        return self._mono is not None and self._mono[1] == 0

    def __add__(self, other: Any) -> "TruncatedPoly":
        other = self._lift(other)
        if other is NotImplemented:
            return other
        if other._known_zero():
            return self
        if self._known_zero():
            return other
        return TruncatedPoly._wrap(self.coeffs + other.coeffs, self.cap)

    __radd__ = __add__

    def __neg__(self) -> "TruncatedPoly":
        mono = self._mono and (self._mono[0], -self._mono[1])
        return TruncatedPoly._wrap(-self.coeffs, self.cap, mono)

    def __sub__(self, other: Any) -> "TruncatedPoly":
        other = self._lift(other)
        if other is NotImplemented:
            return other
        return TruncatedPoly._wrap(self.coeffs - other.coeffs, self.cap)

    def __rsub__(self, other: Any) -> "TruncatedPoly":
        return (-self) + other

    def _shift_scale(self, degree: int, coeff: int) -> "TruncatedPoly":
        if not coeff or degree > self.cap or self._known_zero():
            return TruncatedPoly.zero(self.cap)
        out = np.zeros(self.cap + 1, dtype=object)
        out[degree:] = self.coeffs[: self.cap + 1 - degree]
        if coeff != 1:
            out *= coeff
        mono = self._mono and (self._mono[0] + degree, self._mono[1] * coeff)
        if mono and mono[0] > self.cap:
            return TruncatedPoly.zero(self.cap)
        return TruncatedPoly._wrap(out, self.cap, mono)

    def __mul__(self, other: Any) -> "TruncatedPoly":
        other = self._lift(other)
        if other is NotImplemented:
            return other
        if other._mono is not None:
            return self._shift_scale(*other._mono)
        if self._mono is not None:
            return other._shift_scale(*self._mono)
        out = np.zeros(self.cap + 1, dtype=object)
        for d in np.flatnonzero(self.coeffs):
            d = int(d)
            out[d:] += other.coeffs[: self.cap + 1 - d] * self.coeffs[d]
        return TruncatedPoly._wrap(out, self.cap)

    __rmul__ = __mul__

    def __eq__(self, other: object) -> bool:
        if isinstance(other, (int, np.integer)):
            other = TruncatedPoly.monomial(0, self.cap, int(other))
        if not isinstance(other, TruncatedPoly) or other.cap != self.cap:
            return NotImplemented
        return bool(np.all(self.coeffs == other.coeffs))

    __hash__ = None  # type: ignore[assignment]

    def is_zero(self) -> bool:
        return not np.any(self.coeffs != 0)

    def lowest_degree(self) -> int | None:
        nz = np.flatnonzero(self.coeffs != 0)
        return int(nz[0]) if nz.size else None

    def to_list(self) -> list[int]:
        return [int(c) for c in self.coeffs]

    def __repr__(self) -> str:
        terms = [f"{c}*z^{d}" for d, c in enumerate(self.to_list()) if c]
        return f"TruncatedPoly({' + '.join(terms) or '0'}; cap={self.cap})"


class PolyRing:
    """Ring interface (zero, one, norm) for :class:`TruncatedPoly` at a fixed cap."""

    tag = "poly"

    def __init__(self, cap: int):
        self.cap = cap
        self.zero = TruncatedPoly.zero(cap)
        self.one = TruncatedPoly.monomial(0, cap)

    def norm(self, x: Any) -> TruncatedPoly:
        if isinstance(x, TruncatedPoly):
            if x.cap != self.cap:
                raise ValueError(f"polynomial with cap {x.cap} in ring with cap {self.cap}")
            return x
        return TruncatedPoly.monomial(0, self.cap, int(x))

    def __eq__(self, other: object) -> bool:
        return isinstance(other, PolyRing) and other.cap == self.cap

    def __hash__(self) -> int:
        return hash(("poly", self.cap))

    def __repr__(self) -> str:
        return f"PolyRing(cap={self.cap})"


def ingest_atsp(text: str) -> list[list[int | None]]:
    """Matrix format where '-' marks an absent arc."""
    return parse_matrix_rows(text, absent=ABSENT)


def validate_weights(weights: Sequence[Sequence[int | None]], M: int) -> None:
    if M < 0:
        raise InputError(f"max weight must be >= 0, got {M}")
    n = len(weights)
    if n < 1:
        raise InputError("empty weight matrix")
    for i, row in enumerate(weights, start=1):
        if len(row) != n:
            raise InputError(f"row {i} has {len(row)} of {n} entries")
        for j, w in enumerate(row, start=1):
            if w is not None and not 0 <= w <= M:
                raise InputError(f"arc {i}->{j} has weight {w} outside [0, {M}]")


def embed(weights: Sequence[Sequence[int | None]], cap: int) -> Instance:
    """Arc weight w -> z^w, absent arc -> 0."""
    ring = PolyRing(cap)
    rows = [
        [ring.zero if w is None else TruncatedPoly.monomial(w, cap) for w in row]
        for row in weights
    ]
    return Instance.from_rows(rows, ring)


def tour_polynomial(weights: Sequence[Sequence[int | None]], M: int, cap: int | None = None) -> TruncatedPoly:
    """Polynomial whose z^d coefficient counts Hamiltonian cycles of weight d."""
    validate_weights(weights, M)
    n = len(weights)
    if cap is None:
        # a tour has exactly n arcs, so M*n is within the looser M*n^2 bound
        cap = M * n
        if cap > M * n * n:
            raise InvariantError(f"degree cap {cap} above M*n^2")
    poly = hc_ie(embed(weights, cap))
    if any(c < 0 for c in poly.to_list()):
        raise InvariantError("negative tour count in the weight polynomial")
    return poly


def atsp_shortest(weights: Sequence[Sequence[int | None]], M: int, cap: int | None = None) -> int | None:
    """Weight of a shortest Hamiltonian cycle, or None if there is none."""
    return tour_polynomial(weights, M, cap).lowest_degree()


def tour_histogram(weights: Sequence[Sequence[int | None]], M: int, cap: int | None = None) -> dict[int, int]:
    """Tour weight -> number of tours, read off the polynomial's coefficients."""
    coeffs = tour_polynomial(weights, M, cap).to_list()
    return {d: c for d, c in enumerate(coeffs) if c}

