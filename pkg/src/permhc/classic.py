"""Classic poly(n) 2^n counters: Ryser, inclusion-exclusion and subset DP.

The scalar versions are generic over any ring object exposing ``zero``,
``one`` and ``norm`` (integers, Z_p, truncated polynomials).  The ``*_batch``
versions evaluate many small Z_p matrices at once with numpy and are what the
tabulation pipeline calls once per distinct table key.
"""

from __future__ import annotations

import math
from typing import Any

import numpy as np

from .core import Instance

DP_CAP = 24


def per_ryser(inst: Instance) -> Any:
    """Ryser's formula, subsets visited in Gray-code order."""
    n, R, w = inst.n, inst.ring, inst.weights
    rowsums = [R.zero] * n
    inside = [False] * n
    size = 0
    total = R.zero
    for g in range(1, 1 << n):
        j = (g & -g).bit_length() - 1
        if inside[j]:
            rowsums = [R.norm(s - row[j]) for s, row in zip(rowsums, w)]
            size -= 1
        else:
            rowsums = [R.norm(s + row[j]) for s, row in zip(rowsums, w)]
            size += 1
        inside[j] = not inside[j]
        term = R.norm(math.prod(rowsums, start=R.one))
        if (n - size) & 1:
            total = R.norm(total - term)
        else:
            total = R.norm(total + term)
    return total


def _closed_walks(w: Any, verts: list[int], steps: int, R: Any) -> Any:
    """Weight of closed walks of the given length from verts[-1] inside verts."""
    s = len(verts)
    sub = [[w[a][b] for b in verts] for a in verts]
    vec = list(sub[-1])
    for _ in range(steps - 1):
        nxt = []
        for j in range(s):
            acc = R.zero
            for i in range(s):
                acc = acc + vec[i] * sub[i][j]
            nxt.append(R.norm(acc))
        vec = nxt
    return vec[-1]


def hc_ie(inst: Instance) -> Any:
    """Inclusion-exclusion over subsets of V - {n}, anchored at vertex n."""
    n, R, w = inst.n, inst.ring, inst.weights
    if n == 1:
        return R.norm(w[0][0])
    anchor = n - 1
    total = R.zero
    for mask in range(1 << (n - 1)):
        verts = [v for v in range(n - 1) if mask >> v & 1]
        verts.append(anchor)
        walks = _closed_walks(w, verts, n, R)
        if (n - len(verts)) & 1:
            total = R.norm(total - walks)
        else:
            total = R.norm(total + walks)
    return total


def hc_dp(inst: Instance, cap: int = DP_CAP) -> Any:
    """Held-Karp style path DP over (visited subset, last vertex)."""
    n, R, w = inst.n, inst.ring, inst.weights
    if n > cap:
        raise MemoryError(f"hc_dp refused: n={n} exceeds cap {cap}")
    if n == 1:
        return R.norm(w[0][0])
    anchor = n - 1
    m = n - 1
    full = (1 << m) - 1
    dp: list[list[Any] | None] = [None] * (1 << m)
    for v in range(m):
        row = [R.zero] * m
        row[v] = w[anchor][v]
        dp[1 << v] = row
    for mask in range(1, full + 1):
        row = dp[mask]
        if row is None:
            continue
        for u in range(m):
            if mask >> u & 1:
                continue
            acc = R.zero
            for v in range(m):
                if mask >> v & 1:
                    acc = acc + row[v] * w[v][u]
            nxt = mask | 1 << u
            if dp[nxt] is None:
                dp[nxt] = [R.zero] * m
            dp[nxt][u] = R.norm(dp[nxt][u] + acc)
        if mask != full:
            dp[mask] = None
    last = dp[full]
    total = R.zero
    for v in range(m):
        total = total + last[v] * w[v][anchor]
    return R.norm(total)


_BATCH_WORK = 1 << 21


def _subset_table(k: int) -> tuple[np.ndarray, np.ndarray]:
    """0/1 membership of every subset of range(k), and its popcounts."""
    masks = np.arange(1 << k, dtype=np.int64)
    member = (masks[:, None] >> np.arange(k)) & 1
    return member, member.sum(axis=1)


def _per_ryser_gray(mats: np.ndarray, p: int) -> np.ndarray:
    N, k, _ = mats.shape
    # subset row sums stay in [0, k(p-1)]; reduce only if the sum could overflow
    lazy = (k * (p - 1)) ** k << k < 1 << 62
    cols = [[np.ascontiguousarray(mats[:, i, j]) for j in range(k)] for i in range(k)]
    rowsums = [np.zeros(N, dtype=np.int64) for _ in range(k)]
    total = np.zeros(N, dtype=np.int64)
    inside = [False] * k
    size = 0
    for g in range(1, 1 << k):
        j = (g & -g).bit_length() - 1
        for i in range(k):
            if inside[j]:
                rowsums[i] -= cols[i][j]
            else:
                rowsums[i] += cols[i][j]
            if not lazy:
                rowsums[i] %= p
        size += -1 if inside[j] else 1
        inside[j] = not inside[j]
        term = rowsums[0].copy()
        for i in range(1, k):
            term *= rowsums[i]
            if not lazy:
                term %= p
        if (k - size) & 1:
            total -= term
        else:
            total += term
        if not lazy:
            total %= p
    return total % p


def per_ryser_batch(mats: np.ndarray, p: int) -> np.ndarray:
    """Permanents mod p of a stack of k x k residue matrices, shape (N, k, k).

    Small k walks the column subsets in Gray-code order over the whole stack;
    larger k evaluates all 2^k subsets at once per block of matrices.
    """
    if p >= 1 << 31:
        raise ValueError(f"batch evaluation needs p < 2^31, got {p}")
    mats = np.asarray(mats, dtype=np.int64)
    N, k, _ = mats.shape
    if k == 2:
        # two products below 2^62 each still fit in int64
        return (mats[:, 0, 0] * mats[:, 1, 1] + mats[:, 0, 1] * mats[:, 1, 0]) % p
    if k <= 4:
        return _per_ryser_gray(mats, p)
    member, size = _subset_table(k)
    member = member[1:]
    negative = ((k - size[1:]) & 1).astype(bool)
    out = np.empty(N, dtype=np.int64)
    block = max(1, _BATCH_WORK // (k << k))
    for lo in range(0, N, block):
        a = mats[lo:lo + block]
        # rowsums[n, i, s] = sum of row i over the columns in subset s
        rowsums = np.matmul(a, member.T) % p
        term = rowsums[:, 0, :]
        for i in range(1, k):
            term = term * rowsums[:, i, :] % p
        term[:, negative] = (p - term[:, negative]) % p
        out[lo:lo + block] = term.sum(axis=1) % p
    return out


def _matmul_small(vec: np.ndarray, a: np.ndarray, p: int) -> np.ndarray:
    """(vec @ a) mod p for stacks, accumulating term by term if a sum could overflow."""
    k = a.shape[-1]
    if k * (p - 1) ** 2 < 1 << 63:
        return np.matmul(vec, a) % p
    out = np.zeros(vec.shape[:-1] + (k,), dtype=np.int64)
    for i in range(k):
        out += vec[..., i, None] * a[:, None, i, :] % p
        out %= p
    return out


def hc_ie_batch(mats: np.ndarray, p: int) -> np.ndarray:
    """Hamiltonian cycle sums mod p of a stack of k x k residue matrices."""
    if p >= 1 << 31:
        raise ValueError(f"batch evaluation needs p < 2^31, got {p}")
    mats = np.asarray(mats, dtype=np.int64)
    N, k, _ = mats.shape
    if k == 1:
        return mats[:, 0, 0] % p
    if k == 2:
        return mats[:, 0, 1] * mats[:, 1, 0] % p
    member, size = _subset_table(k - 1)
    # every subset of V - {anchor}, plus the anchor itself
    member = np.concatenate([member, np.ones((member.shape[0], 1), dtype=np.int64)], axis=1)
    negative = ((k - 1 - size) & 1).astype(bool)
    out = np.empty(N, dtype=np.int64)
    block = max(1, _BATCH_WORK // (k * k << (k - 1)))
    for lo in range(0, N, block):
        a = mats[lo:lo + block]
        vec = a[:, None, -1, :] * member[None]
        for _ in range(k - 1):
            vec = _matmul_small(vec, a, p) * member[None]
        closed = vec[:, :, -1]
        closed[:, negative] = (p - closed[:, negative]) % p
        out[lo:lo + block] = closed.sum(axis=1) % p
    return out
