"""Compiled hot loops for the local-moving optimizer.

The kernels work on flat CSR arrays (int64 offsets/indices, float64 weights)
so they compile once, release the GIL, and stay deterministic: all float
arithmetic is plain IEEE double in a fixed order, and the only randomness is
an explicit splitmix64 state threaded through and returned.
"""

from __future__ import annotations

import numpy as np
from numba import njit

U64 = np.uint64
_SM_GAMMA = U64(0x9E3779B97F4A7C15)
_SM_MIX1 = U64(0xBF58476D1CE4E5B9)
_SM_MIX2 = U64(0x94D049BB133111EB)

# Gains within this distance of zero count as zero, so rounding noise can
# never trigger a move (or an oscillation of moves).
GAIN_EPS = 1e-12


@njit(cache=True, nogil=True)
def _splitmix64(state):
    state = state + _SM_GAMMA
    z = state
    z = (z ^ (z >> U64(30))) * _SM_MIX1
    z = (z ^ (z >> U64(27))) * _SM_MIX2
    return state, z ^ (z >> U64(31))


@njit(cache=True, nogil=True)
def _shuffle(order, state):
    # Fisher-Yates; the modulo bias is irrelevant for a search heuristic.
    for i in range(order.size - 1, 0, -1):
        state, z = _splitmix64(state)
        j = np.int64(z % U64(i + 1))
        tmp = order[i]
        order[i] = order[j]
        order[j] = tmp
    return state


@njit(cache=True, nogil=True)
def local_move(indptr, indices, bweights, sizes, labels, r, state):
    """Greedy single-node relocation until a full sweep makes no move.

    ``bweights[k]`` holds w(i,j) + w(j,i) for the CSR entry i -> j, and
    ``sizes`` the node masses, so the gain of moving node i from cluster a
    to cluster c is  W_i(c) - 2 r s_i S_c - (W_i(a) - 2 r s_i (S_a - s_i)).
    Nodes are visited in a fresh seeded random order each sweep; candidate
    clusters are scanned in first-seen row order and the first maximal gain
    wins, so the outcome depends only on (labels, r, state).

    Mutates ``labels`` in place and returns the advanced RNG state.
    """
    n = labels.size
    if n == 0:
        return state
    csize = np.zeros(n, np.int64)
    for i in range(n):
        csize[labels[i]] += sizes[i]
    # Stack of currently-empty cluster ids (push/pop keeps it exact).
    stack = np.empty(n, np.int64)
    sp = 0
    for c in range(n - 1, -1, -1):
        if csize[c] == 0:
            stack[sp] = c
            sp += 1
    wacc = np.zeros(n, np.float64)
    mark = np.full(n, -1, np.int64)
    touched = np.empty(n, np.int64)
    order = np.arange(n)
    tick = 0
    moved = True
    while moved:
        moved = False
        state = _shuffle(order, state)
        for oi in range(n):
            i = order[oi]
            a = labels[i]
            tick += 1
            nt = 0
            for k in range(indptr[i], indptr[i + 1]):
                c = labels[indices[k]]
                if mark[c] != tick:
                    mark[c] = tick
                    wacc[c] = 0.0
                    touched[nt] = c
                    nt += 1
                wacc[c] += bweights[k]
            si = float(sizes[i])
            w_stay = wacc[a] if mark[a] == tick else 0.0
            base = w_stay - 2.0 * r * si * float(csize[a] - sizes[i])
            best_gain = 0.0
            best_c = a
            for t in range(nt):
                c = touched[t]
                if c == a:
                    continue
                g = wacc[c] - 2.0 * r * si * float(csize[c]) - base
                if g > best_gain:
                    best_gain = g
                    best_c = c
            # Splitting out into a fresh empty cluster is also a candidate.
            if csize[a] > sizes[i] and sp > 0:
                g = -base
                if g > best_gain:
                    best_gain = g
                    best_c = -1
            if best_gain > GAIN_EPS:
                if best_c == -1:
                    sp -= 1
                    best_c = stack[sp]
                csize[a] -= sizes[i]
                csize[best_c] += sizes[i]
                labels[i] = best_c
                if csize[a] == 0:
                    stack[sp] = a
                    sp += 1
                moved = True
    return state


def warmup() -> None:
    """Force kernel compilation (first call per process pays the JIT cost)."""
    indptr = np.array([0, 1, 2], dtype=np.int64)
    indices = np.array([1, 0], dtype=np.int64)
    w = np.ones(2, dtype=np.float64)
    sizes = np.ones(2, dtype=np.int64)
    labels = np.arange(2, dtype=np.int64)
    local_move(indptr, indices, w, sizes, labels, 0.5, U64(1))
