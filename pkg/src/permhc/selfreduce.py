"""Self-reduction of n-vertex instances over Z_p to k-vertex instances.

The kernel K is always the k lowest labels.  For every subset X of the
remaining vertices and every interpolation point r in {0, 1, ..., m-1} one
small instance is produced:

* ``fX_eval`` - kernel arc weights with every detour through X folded in,
  each detour vertex contributing a factor r;
* ``cX_eval`` - product over s in X of the ranked closed walks anchored at s
  inside X restricted to vertices >= s (permanent only);
* ``extraction_weights`` - Lagrange weights picking the r^(n-k) coefficient.

The scalar functions follow the recurrences literally and serve as the
reference.  :class:`ReductionEngine` produces the identical term stream with
numpy, batched over subsets and points, and is what the drivers use.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from typing import Iterator, Sequence

import numpy as np

from .core import CanonicalKey, Instance, InvariantError, ModRing
from .modular import is_prime

PER = "per"
HC = "hc"


class FieldTooSmallError(ValueError):
    pass


@dataclass(frozen=True)
class KernelSplit:
    n: int
    k: int

    def __post_init__(self) -> None:
        if not 1 <= self.k < self.n:
            raise ValueError(f"kernel size must satisfy 1 <= k < n, got k={self.k} n={self.n}")

    @property
    def kernel(self) -> range:
        return range(1, self.k + 1)

    @property
    def outside(self) -> range:
        return range(self.k + 1, self.n + 1)

    def subset(self, mask: int) -> tuple[int, ...]:
        """Labels of X for a bitmask over V - K (bit b is vertex k+1+b)."""
        return tuple(self.k + 1 + b for b in range(self.n - self.k) if mask >> b & 1)


def point_count(n: int, k: int, kind: str) -> int:
    """Interpolation points per subset: one more than the r-degree bound."""
    if kind == PER:
        return (n - k) * n + 1
    if kind == HC:
        return (n - k) * k + 1
    raise ValueError(f"unknown kind {kind!r}")


def term_count(n: int, k: int, kind: str) -> int:
    return point_count(n, k, kind) * (1 << (n - k))


def _field(inst: Instance) -> int:
    if not isinstance(inst.ring, ModRing):
        raise TypeError("self-reduction needs an instance over Z_p")
    return inst.ring.p


@dataclass
class RankedWalkTable:
    """W[i][a][b] for X = vertices, positions a, b; all values mod p."""

    vertices: tuple[int, ...]
    r: int
    table: list[list[list[int]]]

    def __call__(self, i: int, u: int, v: int) -> int:
        return self.table[i][self.vertices.index(u)][self.vertices.index(v)]


def ranked_walks(inst: Instance, X: Sequence[int], r: int, maxlen: int) -> RankedWalkTable:
    p = _field(inst)
    xs = tuple(sorted(X))
    s = len(xs)
    f = [[inst.f(a, b) for b in xs] for a in xs]
    table = [[[1 if a == b else 0 for b in range(s)] for a in range(s)]]
    for _ in range(maxlen):
        prev = table[-1]
        table.append([
            [sum(prev[a][c] * f[c][b] for c in range(s)) * r % p for b in range(s)]
            for a in range(s)
        ])
    return RankedWalkTable(xs, r % p, table)


def fX_eval(inst: Instance, k: int, X: Sequence[int], r: int) -> list[list[int]]:
    """Kernel weights at point r with all detours through X added."""
    p = _field(inst)
    n = inst.n
    xs = tuple(sorted(X))
    walks = ranked_walks(inst, xs, r, n - k - 1)
    through = [[sum(walks.table[i][a][b] for i in range(n - k)) % p for b in range(len(xs))] for a in range(len(xs))]
    out = []
    for u in range(1, k + 1):
        row = []
        for v in range(1, k + 1):
            detour = 0
            for a, w in enumerate(xs):
                for b, z in enumerate(xs):
                    detour += inst.f(u, w) * through[a][b] * inst.f(z, v)
            row.append((inst.f(u, v) + detour * r) % p)
        out.append(row)
    return out


def cX_eval(inst: Instance, k: int, X: Sequence[int], r: int) -> int:
    """Product over s in X of 1 + (ranked closed walks at s inside X_{>=s})."""
    p = _field(inst)
    n = inst.n
    prod = 1
    for s in sorted(X):
        upper = [x for x in X if x >= s]
        walks = ranked_walks(inst, upper, r, n - k)
        prod = prod * (1 + sum(walks(i, s, s) for i in range(1, n - k + 1))) % p
    return prod


def extraction_weights(points: Sequence[int], target: int, p: int) -> list[int]:
    """Weights w_j with sum_j w_j q(points_j) = [r^target] q for deg q < m."""
    m = len(points)
    pts = [x % p for x in points]
    if len(set(pts)) != m:
        raise InvariantError(f"interpolation points are not distinct mod {p}")
    if not 0 <= target < m:
        raise ValueError(f"target exponent {target} outside 0..{m - 1}")
    # master polynomial prod (r - x_i), coefficients low to high
    master = [1]
    for x in pts:
        nxt = [0] * (len(master) + 1)
        for d, c in enumerate(master):
            nxt[d] = (nxt[d] - x * c) % p
            nxt[d + 1] = (nxt[d + 1] + c) % p
        master = nxt
    weights = []
    for j, x in enumerate(pts):
        # synthetic division master / (r - x), high degree first
        quot = [0] * m
        carry = 0
        for d in range(m, 0, -1):
            carry = (master[d] + carry * x) % p
            quot[d - 1] = carry
        denom = 1
        for i, y in enumerate(pts):
            if i != j:
                denom = denom * (x - y) % p
        weights.append(quot[target] * pow(denom, -1, p) % p)
    return weights


@lru_cache(maxsize=256)
def _node_weights(m: int, target: int, p: int) -> tuple[int, ...]:
    return tuple(extraction_weights(range(m), target, p))


@dataclass(frozen=True)
class ReducedTerm:
    small: Instance
    coeff: int
    mask: int
    r: int


@dataclass
class TermBatch:
    """All terms of a run of consecutive subset masks.

    ``smalls`` has shape (S, m, k, k) and ``coeffs`` shape (S, m); row s is
    subset ``masks[s]`` and column j is interpolation point j.
    """

    masks: np.ndarray
    smalls: np.ndarray
    coeffs: np.ndarray


_SINGLE_EXACT = 1 << 24
_FLOAT_EXACT = 1 << 53
_INT_EXACT = 1 << 62
_SMALL_WORK = 1 << 14


def _matmul_mod(a: np.ndarray, b: np.ndarray, p: int) -> np.ndarray:
    """(a @ b) mod p for a of shape (..., L) and a 2-D b, exact."""
    inner = b.shape[0]
    a2 = a.reshape(-1, inner)
    bound = inner * (p - 1) ** 2
    big = a2.shape[0] * inner * b.shape[1] > _SMALL_WORK
    if big and bound < _SINGLE_EXACT:
        # every partial sum is an integer below 2^24, so single precision is exact
        out = (a2.astype(np.float32) @ b.astype(np.float32)).astype(np.int32)
    elif big and bound < _FLOAT_EXACT:
        out = (a2.astype(np.float64) @ b.astype(np.float64)).astype(np.int64)
    elif bound < _INT_EXACT:
        out = a2 @ b
    else:
        raise OverflowError(f"modulus {p} too large for int64 accumulation")
    out %= p
    return out.reshape(a.shape[:-1] + (b.shape[1],))


class ReductionEngine:
    """Vectorized producer of the self-reduction term stream for one prime."""

    def __init__(self, inst: Instance, k: int, kind: str, budget: int = 1 << 24):
        p = _field(inst)
        n = inst.n
        KernelSplit(n, k)
        if not is_prime(p):
            raise ValueError(f"Z_{p} is not a field")
        m = point_count(n, k, kind)
        if p < m:
            raise FieldTooSmallError(f"field Z_{p} has {p} elements; the reduction needs at least {m}")
        self.inst, self.n, self.k, self.kind, self.p, self.m = inst, n, k, kind, p, m
        L = self.L = n - k
        W = np.array(inst.weights, dtype=np.int64)
        self.F = W[:k, :k]
        self.A = W[k:, k:]
        self.B = W[:k, k:]
        self.C = W[k:, :k]
        self.points = list(range(m))
        self.weights = np.array(_node_weights(m, L, p), dtype=np.int64)
        # vand[j, i] = r_j^(i+1)
        self.vand = np.empty((m, L), dtype=np.int64)
        if L:
            r = np.arange(m, dtype=np.int64) % p
            self.vand[:, 0] = r
            for i in range(1, L):
                self.vand[:, i] = self.vand[:, i - 1] * r % p
        self._vand_t = np.ascontiguousarray(self.vand.T)
        # powers[i, j] = r_j^i for i = 0..L
        self._powers = np.concatenate([np.ones((1, m), dtype=np.int64), self._vand_t])
        per_subset = m * max(k * k, L, 1)
        c = 0
        while c < L and (2 << c) * per_subset <= budget:
            c += 1
        self.chunk_bits = c
        self.n_chunks = 1 << (L - c)
        self._bits = np.arange(L, dtype=np.int64)
        self._signed_weights = (self.weights if L % 2 == 0 else (p - self.weights) % p)
        if kind == PER:
            self._lo_levels = self._popcount_levels(c)
            self._q_high = self._anchor_products_high()

    @property
    def total_terms(self) -> int:
        return self.m << self.L

    @staticmethod
    def _popcount_levels(bits: int) -> list[np.ndarray]:
        idx = np.arange(1 << bits, dtype=np.int64)
        pc = np.zeros_like(idx)
        for b in range(bits):
            pc += idx >> b & 1
        return [idx[pc == t] for t in range(1, bits + 1)]

    def _membership(self, masks: np.ndarray) -> np.ndarray:
        return (masks[:, None] >> self._bits) & 1

    def _walk_tables(self, masks: np.ndarray, member: np.ndarray, anchored: bool) -> tuple[np.ndarray, np.ndarray | None]:
        """Walk data for every subset in ``masks``.

        Returns the coefficients of r^0..r^L in each kernel weight, shape
        (S, k, k, L+1), where r^0 is f and r^(i+1) is B A_X^i C restricted to X.
        When ``anchored``, also returns -(1 + closed walks at min X inside X)
        at every interpolation point, shape (S, m); the sign folds the
        inclusion-exclusion parity into the subset product.
        """
        S, L, k, p = member.shape[0], self.L, self.k, self.p
        rows = k + 1 if anchored else k
        D = np.empty((S, k, k, L + 1), dtype=np.int64)
        D[..., 0] = self.F
        state = np.zeros((S, rows, L), dtype=np.int64)
        state[:, :k, :] = self.B[None, :, :] * member[:, None, :]
        if anchored:
            nonempty = masks != 0
            low = np.zeros(S, dtype=np.int64)
            low[nonempty] = np.log2((masks[nonempty] & -masks[nonempty]).astype(np.float64)).astype(np.int64)
            state[nonempty, k, low[nonempty]] = 1
            closed = np.empty((S, L), dtype=np.int64)
            idx = np.arange(S)
        # one product per step advances both the kernel paths and the anchor walk
        step = np.concatenate([self.C, self.A], axis=1)
        bound = L * (p - 1) ** 2
        if bound < _FLOAT_EXACT:
            fdt, idt = (np.float32, np.int32) if bound < _SINGLE_EXACT else (np.float64, np.int64)
            # buffers are reused across steps; fresh large temporaries cost page faults
            cur = state.astype(fdt)
            stepf = step.astype(fdt)
            prod = np.empty((S * rows, k + L), dtype=fdt)
            red = np.empty((S, rows, k + L), dtype=idt)
            mask = member[:, None, :].astype(idt)
            for i in range(L):
                np.matmul(cur.reshape(-1, L), stepf, out=prod)
                np.copyto(red.reshape(-1, k + L), prod, casting="unsafe")
                np.remainder(red, p, out=red)
                D[..., i + 1] = red[:, :k, :k]
                np.multiply(red[:, :, k:], mask, out=cur, casting="unsafe")
                if anchored:
                    closed[:, i] = cur[idx, k, low]
        else:
            for i in range(L):
                out = _matmul_mod(state, step, p)
                D[..., i + 1] = out[:, :k, :k]
                state = out[:, :, k:] * member[:, None, :]
                if anchored:
                    closed[:, i] = state[idx, k, low]
        if not anchored:
            return D, None
        vals = _matmul_mod(closed, self._vand_t, p)
        return D, (p - 1 - vals) % p

    def _anchor_products_high(self) -> np.ndarray:
        c, L = self.chunk_bits, self.L
        H = 1 << (L - c)
        masks = np.arange(H, dtype=np.int64) << c
        _, vals = self._walk_tables(masks, self._membership(masks), True)
        q = np.ones((H, self.m), dtype=np.int64)
        for level in self._popcount_levels(L - c):
            q[level] = vals[level] * q[level & (level - 1)] % self.p
        return q

    def chunk(self, h: int) -> TermBatch:
        L, c, p, m = self.L, self.chunk_bits, self.p, self.m
        S = 1 << c
        masks = (np.int64(h) << c) + np.arange(S, dtype=np.int64)
        member = self._membership(masks)
        D, vals = self._walk_tables(masks, member, self.kind == PER)
        # one 2-D product for the whole chunk: (S*k*k, L+1) @ (L+1, m)
        smalls = _matmul_mod(D, self._powers, p).transpose(0, 3, 1, 2)
        if self.kind == PER:
            # the product over s in X of -C_X(s) is (-1)^|X| C_X; the root
            # carries the signed extraction weights so every subset inherits them
            coeffs = np.empty((S, m), dtype=np.int64)
            coeffs[0] = self._q_high[h] * self._signed_weights % p
            for level in self._lo_levels:
                coeffs[level] = vals[level] * coeffs[level & (level - 1)] % p
        else:
            odd = (member.sum(axis=1) & 1).astype(bool)
            coeffs = np.where(odd[:, None], (p - self._signed_weights) % p, self._signed_weights)
        return TermBatch(masks, smalls, coeffs)

    def batches(self) -> Iterator[TermBatch]:
        for h in range(self.n_chunks):
            yield self.chunk(h)

    def terms(self) -> Iterator[ReducedTerm]:
        ring = ModRing(self.p)
        k = self.k
        for batch in self.batches():
            for s, mask in enumerate(batch.masks.tolist()):
                for j in range(self.m):
                    small = tuple(tuple(int(x) for x in row) for row in batch.smalls[s, j])
                    yield ReducedTerm(Instance(k, small, ring), int(batch.coeffs[s, j]), mask, j)


def reduce_per(inst: Instance, k: int) -> Iterator[ReducedTerm]:
    """Terms (small, coeff) with sum coeff * per(small) = per(inst) in Z_p."""
    return ReductionEngine(inst, k, PER).terms()


def reduce_hc(inst: Instance, k: int) -> Iterator[ReducedTerm]:
    """Terms (small, coeff) with sum coeff * hc(small) = hc(inst) in Z_p."""
    return ReductionEngine(inst, k, HC).terms()


def format_term(term: ReducedTerm) -> str:
    """One trace line: X-bitmask, point, coefficient, canonical key."""
    return f"{term.mask:b} {term.r} {term.coeff} {CanonicalKey.of(term.small)}"
