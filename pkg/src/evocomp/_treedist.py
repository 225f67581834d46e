"""All-pairs lockstep tree distance over flattened preorder encodings.

Computes the same quantity as :func:`evocomp.genotypes.distance` on parse
trees.  Subtrees that are equal share one integer id and are skipped
wholesale.  The pair loop is compiled with numba when it is importable.
"""

from __future__ import annotations

import numpy as np

try:
    from numba import njit
except ImportError:  # pragma: no cover - exercised only without numba
    njit = None


def encode(trees):
    """Concatenated preorder arrays for ``trees`` plus per-tree offsets."""
    sym_ids: dict = {}
    uids: dict = {}
    sym, ar, sz, uid, offsets = [], [], [], [], [0]
    for tree in trees:
        stack = [tree]
        while stack:
            node = stack.pop()
            sym.append(sym_ids.setdefault(node.symbol, len(sym_ids)))
            ar.append(len(node.children))
            sz.append(node.size)
            uid.append(uids.setdefault(node, len(uids)))
            stack.extend(reversed(node.children))
        offsets.append(len(sym))
    as_arr = lambda v: np.asarray(v, dtype=np.int64)  # noqa: E731
    return as_arr(sym), as_arr(ar), as_arr(sz), as_arr(uid), as_arr(offsets)


def _pair(sym, ar, sz, uid, a, b, si, sj):
    cost = 0
    si[0] = a
    sj[0] = b
    top = 1
    while top > 0:
        top -= 1
        i = si[top]
        j = sj[top]
        if uid[i] == uid[j]:
            continue
        if sym[i] != sym[j]:
            cost += 1
        k = ar[i]
        if k == ar[j]:
            ci = i + 1
            cj = j + 1
            for _ in range(k):
                si[top] = ci
                sj[top] = cj
                top += 1
                ci += sz[ci]
                cj += sz[cj]
        else:
            cost += sz[i] - 1 + sz[j] - 1
    return cost


def _matrix(sym, ar, sz, uid, offsets):
    n = offsets.size - 1
    out = np.zeros((n, n))
    cap = 1
    for t in range(n):
        cap = max(cap, offsets[t + 1] - offsets[t] + 1)
    si = np.empty(cap, dtype=np.int64)
    sj = np.empty(cap, dtype=np.int64)
    for i in range(n):
        for j in range(i + 1, n):
            d = _pair(sym, ar, sz, uid, offsets[i], offsets[j], si, sj)
            out[i, j] = d
            out[j, i] = d
    return out


def _weighted_sum(sym, ar, sz, uid, offsets, counts):
    n = offsets.size - 1
    cap = 1
    for t in range(n):
        cap = max(cap, offsets[t + 1] - offsets[t] + 1)
    si = np.empty(cap, dtype=np.int64)
    sj = np.empty(cap, dtype=np.int64)
    total = 0.0
    for i in range(n):
        for j in range(i + 1, n):
            total += counts[i] * counts[j] * _pair(sym, ar, sz, uid, offsets[i], offsets[j], si, sj)
    return total


if njit is not None:
    _pair = njit(cache=True)(_pair)
    _matrix = njit(cache=True)(_matrix)
    _weighted_sum = njit(cache=True)(_weighted_sum)


def tree_distance_matrix(trees) -> np.ndarray:
    return _matrix(*encode(trees))


def tree_pair_distance_sum(trees, counts) -> float:
    """Sum over unordered pairs of ``counts[i] * counts[j] * d(i, j)``."""
    return float(_weighted_sum(*encode(trees), np.asarray(counts, dtype=np.float64)))
