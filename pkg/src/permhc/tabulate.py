"""Per-prime reduction, coefficient tabulation and CRT assembly.

For every prime p the instance is reduced mod p, self-reduced to k x k
matrices, and the coefficients of equal matrices are summed in a
:class:`CoefficientTable`.  Each distinct matrix is then evaluated once with
the classic counter and the table's inner product gives the residue mod p.
The residues are combined with the CRT into the signed integer result.
"""

from __future__ import annotations

import math
import threading
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Any, Iterator

import numpy as np

from . import classic
from .core import CanonicalKey, Instance, InputError, InvariantError, IntegerRing, max_abs_weight
from .modular import CrtPlan, crt_reconstruct, mod_reduce_instance, select_primes, value_bound
from .selfreduce import HC, PER, ReductionEngine, term_count

_EVAL_BLOCK = 1 << 20
_GROUP_BLOCK = 1 << 23
# below this, a block of products under p^2 sums without overflowing int64
_LAZY_SUM_PRIME = 1 << 21

BATCH_EVALUATORS = {PER: classic.per_ryser_batch, HC: classic.hc_ie_batch}
SCALAR_EVALUATORS = {PER: classic.per_ryser, HC: classic.hc_ie}


class CoefficientTable:
    """Sparse map from k x k residue matrices to summed Z_p coefficients.

    Terms are buffered and grouped once in :meth:`finalize`.  When the k^2
    residues and a coefficient fit in 63 bits, each term is bit-packed into a
    single int64 (row-major, first entry most significant) and grouping is an
    in-place sort of that buffer.  Larger matrices fall back to a
    lexicographic row sort.
    """

    def __init__(self, k: int, p: int, capacity: int | None = None):
        self.k, self.p = k, p
        self.terms_seen = 0
        self.bits = (p - 1).bit_length()
        self.packed = (k * k + 1) * self.bits <= 63
        self._capacity = capacity
        self._buffer = np.empty(capacity, dtype=np.int64) if (self.packed and capacity) else None
        self._fill = 0
        self._batch_terms = 0
        self._lock = threading.Lock()
        self._chunks: list[tuple[np.ndarray, np.ndarray]] = []
        self._scalar: dict[tuple[int, ...], int] = {}
        self.keys: np.ndarray | None = None
        self.values: np.ndarray | None = None

    def pack(self, smalls: np.ndarray, out: np.ndarray | None = None) -> np.ndarray:
        """Bit-pack matrices of shape (..., k, k) into int64 keys of shape (...)."""
        key = np.empty(smalls.shape[:-2], dtype=np.int64) if out is None else out
        key[...] = smalls[..., 0, 0]
        for i in range(self.k):
            for j in range(self.k):
                if i or j:
                    key <<= self.bits
                    key |= smalls[..., i, j]
        return key

    def unpack(self, keys: np.ndarray) -> np.ndarray:
        """Inverse of :meth:`pack` on a 1-D key array; shape (N, k*k).

        The result is a transposed view so that each entry column is contiguous.
        """
        kk = self.k * self.k
        cols = np.empty((kk, keys.shape[0]), dtype=np.int64)
        mask = (1 << self.bits) - 1
        for col in range(kk):
            np.right_shift(keys, self.bits * (kk - 1 - col), out=cols[col])
            cols[col] &= mask
        return cols.T

    def add(self, key: CanonicalKey, coeff: int) -> None:
        """Single-term update T(key) += coeff."""
        if (key.k, key.p) != (self.k, self.p):
            raise InvariantError(f"key for ({key.k}, {key.p}) added to table ({self.k}, {self.p})")
        with self._lock:
            self._scalar[key.body] = (self._scalar.get(key.body, 0) + coeff) % self.p
            self.terms_seen += 1

    def add_batch(self, smalls: np.ndarray, coeffs: np.ndarray, at: int | None = None) -> None:
        """Add terms given as matrices (..., k, k) with coefficients (...).

        ``at`` writes at a fixed buffer offset so that sharded fills lay out
        the buffer identically to a serial one.
        """
        coeffs = np.asarray(coeffs, dtype=np.int64)
        N = coeffs.size
        if self._buffer is not None:
            with self._lock:
                start = self._fill if at is None else at
                if at is None:
                    self._fill += N
            if start + N > self._capacity:
                raise InvariantError("coefficient table capacity exceeded")
            combined = self._buffer[start:start + N].reshape(coeffs.shape)
            self.pack(smalls, out=combined)
            combined <<= self.bits
            combined |= coeffs
        else:
            rows = np.asarray(smalls, dtype=np.int64).reshape(-1, self.k * self.k)
            with self._lock:
                self._chunks.append((rows, coeffs.reshape(-1)))
        with self._lock:
            self._batch_terms += N
            self.terms_seen += N

    def finalize(self) -> None:
        if self._buffer is not None:
            # sharded fills write disjoint slices that tile a prefix of the buffer
            keys, vals = self._group_packed(self._buffer[: self._batch_terms])
            self._buffer = None
        elif self._chunks and self.packed:
            rows = np.concatenate([r for r, _ in self._chunks])
            coeffs = np.concatenate([c for _, c in self._chunks])
            self._chunks = []
            combined = self.pack(rows.reshape(-1, self.k, self.k)) << self.bits | coeffs
            keys, vals = self._group_packed(combined)
        elif self._chunks:
            rows = np.concatenate([r for r, _ in self._chunks])
            coeffs = np.concatenate([c for _, c in self._chunks])
            self._chunks = []
            keys, vals = self._group_rows(rows, coeffs)
        else:
            keys = np.empty((0,) if self.packed else (0, self.k * self.k), dtype=np.int64)
            vals = np.empty(0, dtype=np.int64)
        if self._scalar:
            keys, vals = self._merge_scalar(keys, vals)
        self.keys, self.values = keys, vals

    def _group_packed(self, combined: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        """Sort in place and write the distinct keys back into the buffer's front."""
        combined.sort()
        mask = (1 << self.bits) - 1
        vals = np.empty(combined.shape[0], dtype=np.min_scalar_type(-self.p))
        out = 0
        last = None
        for lo in range(0, combined.shape[0], _GROUP_BLOCK):
            blk = combined[lo:lo + _GROUP_BLOCK]
            kb = blk >> self.bits
            change = np.empty(kb.shape[0], dtype=bool)
            change[0] = last is None or int(kb[0]) != last
            np.not_equal(kb[1:], kb[:-1], out=change[1:])
            starts = np.flatnonzero(change)
            head = int(starts[0]) if starts.size else blk.shape[0]
            if head:
                # continuation of the run that ended the previous block
                vals[out - 1] = (int(vals[out - 1]) + int((blk[:head] & mask).sum())) % self.p
            if starts.size:
                blk &= mask
                sums = np.add.reduceat(blk, starts) % self.p
                u = kb[starts]
                # out never passes lo, so the unread tail of the buffer is intact
                combined[out:out + u.shape[0]] = u
                vals[out:out + u.shape[0]] = sums
                out += u.shape[0]
            last = int(kb[-1])
        return combined[:out], vals[:out]

    def _group_rows(self, rows: np.ndarray, coeffs: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        order = np.lexsort(rows.T[::-1])
        rows, coeffs = rows[order], coeffs[order]
        starts = np.flatnonzero(np.concatenate(([True], np.any(rows[1:] != rows[:-1], axis=1))))
        return rows[starts], np.add.reduceat(coeffs, starts) % self.p

    def _merge_scalar(self, keys: np.ndarray, vals: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        bodies = np.array(list(self._scalar), dtype=np.int64).reshape(-1, self.k * self.k)
        extra = np.array(list(self._scalar.values()), dtype=np.int64)
        vals = vals.astype(np.int64)
        if not self.packed:
            return self._group_rows(np.concatenate([keys, bodies]), np.concatenate([vals, extra]))
        all_keys = np.concatenate([keys, self.pack(bodies.reshape(-1, self.k, self.k))])
        all_vals = np.concatenate([vals, extra])
        order = np.argsort(all_keys, kind="stable")
        all_keys, all_vals = all_keys[order], all_vals[order]
        starts = np.flatnonzero(np.concatenate(([True], all_keys[1:] != all_keys[:-1])))
        return all_keys[starts], np.add.reduceat(all_vals, starts) % self.p

    @property
    def distinct_keys(self) -> int:
        if self.keys is None:
            raise InvariantError("table not finalized")
        return int(self.values.shape[0])

    def _rows(self, lo: int, hi: int) -> np.ndarray:
        block = self.keys[lo:hi]
        return self.unpack(block) if self.packed else block

    def items(self) -> Iterator[tuple[CanonicalKey, int]]:
        for lo in range(0, self.distinct_keys, _EVAL_BLOCK):
            rows = self._rows(lo, lo + _EVAL_BLOCK)
            for row, v in zip(rows.tolist(), self.values[lo:lo + _EVAL_BLOCK].tolist()):
                yield CanonicalKey(self.k, self.p, tuple(row)), int(v)

    def get(self, key: CanonicalKey) -> int:
        if self.packed:
            packed = int(self.pack(np.array(key.body, dtype=np.int64).reshape(1, self.k, self.k))[0])
            i = int(np.searchsorted(self.keys, packed))
            found = i < self.keys.shape[0] and int(self.keys[i]) == packed
        else:
            hits = np.flatnonzero(np.all(self.keys == np.array(key.body), axis=1))
            i, found = (int(hits[0]), True) if hits.size else (0, False)
        return int(self.values[i]) if found else 0

    def evaluate(self, kind: str) -> int:
        """Sum of T(g) * count(g) mod p over the table's keys g.

        Keys whose summed coefficient cancelled to zero contribute nothing,
        so they are evaluated along with the rest rather than filtered out.
        """
        fn = BATCH_EVALUATORS[kind]
        total = 0
        for lo in range(0, self.distinct_keys, _EVAL_BLOCK):
            vals = self.values[lo:lo + _EVAL_BLOCK]
            rows = self._rows(lo, lo + _EVAL_BLOCK)
            prods = fn(rows.reshape(-1, self.k, self.k), self.p)
            prods *= vals
            if self.p >= _LAZY_SUM_PRIME:
                prods %= self.p
            total = (total + int(prods.sum())) % self.p
        return total


def choose_k(n: int, p_max: int, override: int | None = None) -> int:
    if override is not None:
        k = override
    else:
        k = math.floor(math.sqrt(0.99 * n / math.log2(p_max)))
    return max(1, min(k, n - 1))


@dataclass
class PrimeStats:
    p: int
    k: int
    terms: int
    distinct: int
    residue: int
    seconds: float = field(default=0.0, compare=False)


@dataclass
class RunStats:
    kind: str
    n: int
    M: int
    k: int
    primes: list[int]
    per_prime: list[PrimeStats] = field(default_factory=list)
    phase_seconds: dict[str, float] = field(default_factory=dict, compare=False)

    def to_json(self, value: int) -> dict[str, Any]:
        return {
            "n": self.n,
            "M": self.M,
            "primes": self.primes,
            "k": self.k,
            "per_prime": [{"p": s.p, "terms": s.terms, "distinct": s.distinct} for s in self.per_prime],
            "value": str(value),
        }


def tabulated_residue(inst_p: Instance, k: int, kind: str, threads: int = 1) -> tuple[int, CoefficientTable]:
    """Residue of per/hc for one Z_p instance via reduction + tabulation."""
    engine = ReductionEngine(inst_p, k, kind)
    table = CoefficientTable(k, engine.p, capacity=engine.total_terms)
    stride = engine.total_terms // engine.n_chunks

    def fill(h: int) -> None:
        batch = engine.chunk(h)
        table.add_batch(batch.smalls, batch.coeffs, at=h * stride)

    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            list(pool.map(fill, range(engine.n_chunks)))
    else:
        for h in range(engine.n_chunks):
            fill(h)
    table.finalize()
    return table.evaluate(kind), table


def _run(inst: Instance, kind: str, k_override: int | None, threads: int, check: bool) -> tuple[int, RunStats]:
    if not isinstance(inst.ring, IntegerRing):
        raise InputError("tabulated counting takes an integer instance")
    n = inst.n
    if n < 2:
        raise InputError("tabulated algorithms need n >= 2")
    t0 = time.perf_counter()
    M = max_abs_weight(inst)
    plan = select_primes(M, n)
    if plan.modulus <= 2 * value_bound(M, n):
        raise InvariantError("prime product does not exceed 2 * M^n * n!")
    k = choose_k(n, max(plan.primes), k_override)
    if kind == HC and k_override is None:
        k = min(max(k, 2), n - 1)
    stats = RunStats(kind, n, M, k, list(plan.primes))
    stats.phase_seconds["setup"] = time.perf_counter() - t0
    residues = []
    for p in plan.primes:
        t1 = time.perf_counter()
        inst_p = mod_reduce_instance(inst, p)
        residue, table = tabulated_residue(inst_p, k, kind, threads)
        if table.terms_seen != term_count(n, k, kind):
            raise InvariantError(f"saw {table.terms_seen} terms, expected {term_count(n, k, kind)}")
        if check:
            direct = SCALAR_EVALUATORS[kind](inst_p)
            if direct != residue:
                raise InvariantError(f"mod {p}: tabulated residue {residue} != direct {direct}")
        residues.append(residue)
        stats.per_prime.append(PrimeStats(p, k, table.terms_seen, table.distinct_keys, residue, time.perf_counter() - t1))
    t2 = time.perf_counter()
    value = crt_reconstruct(residues, plan)
    stats.phase_seconds["primes"] = t2 - t0 - stats.phase_seconds["setup"]
    stats.phase_seconds["crt"] = time.perf_counter() - t2
    return value, stats


def per_tabulated(inst: Instance, k_override: int | None = None, threads: int = 1, check: bool = False) -> tuple[int, RunStats]:
    return _run(inst, PER, k_override, threads, check)


def hc_tabulated(inst: Instance, k_override: int | None = None, threads: int = 1, check: bool = False) -> tuple[int, RunStats]:
    return _run(inst, HC, k_override, threads, check)


def crt_plan_for(inst: Instance) -> CrtPlan:
    return select_primes(max_abs_weight(inst), inst.n)
