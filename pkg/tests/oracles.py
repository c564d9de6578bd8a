"""Independent oracles the tests check the library against.

Deliberately implemented by different routes than the library: the partition
oracle enumerates every set partition with incremental bookkeeping, and the
LCS oracle is a memoized recursion rather than an iterative table.
"""

from __future__ import annotations

import sys
from functools import lru_cache

import numpy as np


def dense_directed(graph) -> np.ndarray:
    """Directed weight matrix from CSR rows (small graphs only)."""
    a = np.zeros((graph.n, graph.n))
    for i in range(graph.n):
        cols, vals = graph.row(i)
        a[i, cols] = vals
    return a


def direct_quality(a: np.ndarray, labels, r: float) -> float:
    """Literal double sum over ordered same-cluster pairs of (a_ij - r)."""
    n = a.shape[0]
    q = 0.0
    for i in range(n):
        for j in range(n):
            if i != j and labels[i] == labels[j]:
                q += a[i, j] - r
    return q


def partition_maxima(a: np.ndarray, r_values) -> tuple[list[float], list[list[int]]]:
    """Exact maximum of the objective per resolution, by enumerating all set
    partitions (restricted-growth recursion with incremental weight W and
    ordered-pair count C; the objective is W - r * C)."""
    n = a.shape[0]
    b = a + a.T
    r_values = list(r_values)
    best = [-np.inf] * len(r_values)
    witness: list[list[int] | None] = [None] * len(r_values)
    labels = [0] * n
    members: list[list[int]] = []

    def rec(i: int, w: float, c: int) -> None:
        if i == n:
            for t, r in enumerate(r_values):
                q = w - r * c
                if q > best[t]:
                    best[t] = q
                    witness[t] = labels.copy()
            return
        for ci, mem in enumerate(members):
            dw = sum(b[i, j] for j in mem)
            labels[i] = ci
            mem.append(i)
            rec(i + 1, w + dw, c + 2 * (len(mem) - 1))
            mem.pop()
        members.append([i])
        labels[i] = len(members) - 1
        rec(i + 1, w, c)
        members.pop()

    rec(0, 0.0, 0)
    return best, witness  # type: ignore[return-value]


def partition_sets(labels) -> frozenset[frozenset[int]]:
    """Structural form of a partition for equality checks."""
    groups: dict[int, set[int]] = {}
    for i, c in enumerate(labels):
        groups.setdefault(int(c), set()).add(i)
    return frozenset(frozenset(g) for g in groups.values())


def lcs_oracle(s: str, t: str) -> int:
    """Memoized-recursion LCS length."""
    sys.setrecursionlimit(max(sys.getrecursionlimit(), 4 * (len(s) + len(t)) + 100))

    @lru_cache(maxsize=None)
    def go(i: int, j: int) -> int:
        if i == 0 or j == 0:
            return 0
        if s[i - 1] == t[j - 1]:
            return go(i - 1, j - 1) + 1
        return max(go(i - 1, j), go(i, j - 1))

    return go(len(s), len(t))
