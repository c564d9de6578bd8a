"""Cluster quality at a resolution and its multilevel local-search maximizer.

The quality of an assignment at resolution r is the sum over ordered
same-cluster pairs (i, j), i != j, of (w_ij - r * s_i * s_j): w is the
normalized relatedness (the aggregated pair weight on a coarsened graph) and
s the node mass, 1 per publication. All-singleton assignments on the
publication graph therefore score exactly 0, and raising r buys more,
smaller clusters.

Maximization runs seeded randomized local moving until node-move-stable,
coarsens the stable clusters into a meta-graph, recurses, then projects back
and refines with another local-moving pass at each granularity. Independent
runs differ only in their seed; `multi_run_optimize` keeps the best.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp

from . import _kernels
from .errors import ConfigError, DataError
from .graph import NormalizedGraph


class Assignment:
    """Dense cluster ids per node (every id in 0..k-1 is used)."""

    def __init__(self, cluster_of: np.ndarray, validate: bool = True):
        arr = np.asarray(cluster_of, dtype=np.int64)
        if validate and arr.size:
            counts = np.bincount(arr) if arr.min() >= 0 else None
            if counts is None or counts.min() == 0:
                raise DataError("cluster ids must be dense integers 0..k-1")
        self.cluster_of = arr

    @classmethod
    def singletons(cls, n: int) -> "Assignment":
        return cls(np.arange(n, dtype=np.int64), validate=False)

    @classmethod
    def from_labels(cls, labels: np.ndarray) -> "Assignment":
        """Densify arbitrary labels, numbering clusters by first appearance."""
        return cls(canonical_labels(np.asarray(labels, dtype=np.int64)), validate=False)

    @property
    def k(self) -> int:
        return int(self.cluster_of.max()) + 1 if self.cluster_of.size else 0

    def sizes(self, node_size: np.ndarray | None = None) -> np.ndarray:
        """Per-cluster mass (member count when node_size is omitted)."""
        if node_size is None:
            return np.bincount(self.cluster_of, minlength=self.k)
        return np.bincount(self.cluster_of, weights=node_size, minlength=self.k).astype(np.int64)

    def __len__(self) -> int:
        return int(self.cluster_of.size)

    def __eq__(self, other) -> bool:
        return isinstance(other, Assignment) and np.array_equal(self.cluster_of, other.cluster_of)

    def __repr__(self) -> str:
        return f"Assignment(n={len(self)}, k={self.k})"


def canonical_labels(labels: np.ndarray) -> np.ndarray:
    """Relabel clusters densely in order of first appearance by node index."""
    if labels.size == 0:
        return labels.astype(np.int64)
    _, first, inverse = np.unique(labels, return_index=True, return_inverse=True)
    rank = np.empty(first.size, dtype=np.int64)
    rank[np.argsort(first, kind="stable")] = np.arange(first.size)
    return rank[inverse]


class MetaGraph:
    """Clusters of a finer graph as nodes, with aggregated pair weights.

    ``node_size`` counts the original publications inside each meta-node;
    cross weights are stored as directed CSR entries and within-node weight
    (the sum over ordered internal pairs) separately in ``self_weight``.
    Clustering this graph can only merge whole lower-level clusters, which
    is what keeps a multi-level assignment nested.
    """

    def __init__(self, m, node_size, self_weight, indptr, indices, weights):
        self.n = int(m)
        self.node_size = np.asarray(node_size, dtype=np.int64)
        self.self_weight = np.asarray(self_weight, dtype=np.float64)
        self.indptr = np.asarray(indptr, dtype=np.int64)
        self.indices = np.asarray(indices, dtype=np.int64)
        self.weights = np.asarray(weights, dtype=np.float64)

    @property
    def m(self) -> int:
        return self.n

    @property
    def total_size(self) -> int:
        return int(self.node_size.sum())

    def pair_weight(self, u: int, v: int) -> float:
        """Summed relatedness from publications in u to publications in v."""
        if u == v:
            return float(self.self_weight[u])
        lo, hi = self.indptr[u], self.indptr[u + 1]
        pos = np.searchsorted(self.indices[lo:hi], v)
        if pos < hi - lo and self.indices[lo + pos] == v:
            return float(self.weights[lo + pos])
        return 0.0


@dataclass(frozen=True)
class _OptView:
    """Symmetrized arrays the kernels and quality evaluation run on.

    ``b[k]`` is w(i,j) + w(j,i) for CSR entry i -> j; ``self_total`` the sum
    of all within-node weights (constant under any assignment of this graph);
    ``total_size`` the number of original publications represented.
    """

    n: int
    indptr: np.ndarray
    indices: np.ndarray
    b: np.ndarray
    sizes: np.ndarray
    self_total: float
    total_size: int


def _symmetrize(n, indptr, indices, weights) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    a = sp.csr_matrix((weights, indices, indptr), shape=(n, n))
    b = (a + a.T).tocsr()
    b.sort_indices()
    return b.indptr.astype(np.int64), b.indices.astype(np.int64), b.data.astype(np.float64)


def _view_of(graph) -> _OptView:
    view = getattr(graph, "_opt_view", None)
    if view is not None:
        return view
    if isinstance(graph, NormalizedGraph):
        indptr, indices, b = _symmetrize(graph.n, graph.indptr, graph.indices, graph.weights)
        view = _OptView(graph.n, indptr, indices, b, np.ones(graph.n, np.int64), 0.0, graph.n)
    elif isinstance(graph, MetaGraph):
        indptr, indices, b = _symmetrize(graph.n, graph.indptr, graph.indices, graph.weights)
        view = _OptView(
            graph.n, indptr, indices, b, graph.node_size,
            float(graph.self_weight.sum()), graph.total_size,
        )
    else:
        raise TypeError(f"unsupported graph type: {type(graph).__name__}")
    graph._opt_view = view
    return view


def _check_r(r: float) -> float:
    r = float(r)
    if not 0.0 <= r <= 1.0:
        raise ConfigError(f"resolution must lie in [0, 1], got {r}")
    return r


def _quality_view(view: _OptView, labels: np.ndarray, r: float) -> float:
    if labels.size != view.n:
        raise DataError(f"assignment covers {labels.size} nodes, graph has {view.n}")
    if view.indices.size:
        same = labels[np.repeat(np.arange(view.n), np.diff(view.indptr))] == labels[view.indices]
        cross = float(view.b[same].sum())
    else:
        cross = 0.0
    cluster_mass = np.bincount(labels, weights=view.sizes.astype(np.float64))
    penalty = float(cluster_mass @ cluster_mass) - float(view.total_size)
    return view.self_total + 0.5 * cross - r * penalty


def quality(graph, assign: Assignment, r: float) -> float:
    """Evaluate the clustering objective at resolution r.

    On a meta-graph the value includes the frozen within-node terms, so it
    equals the flat evaluation of the induced publication-level assignment.
    """
    r = _check_r(r)
    return _quality_view(_view_of(graph), assign.cluster_of, r)


def local_move_gain(graph, assign: Assignment, node: int, target_cluster: int, r: float) -> float:
    """Quality change from relocating one node to ``target_cluster``.

    The target may be an existing cluster or a fresh empty id (k). Moving a
    node to its own cluster is the identity and gains exactly 0.
    """
    r = _check_r(r)
    view = _view_of(graph)
    labels = assign.cluster_of
    current = int(labels[node])
    if target_cluster == current:
        return 0.0
    k = int(labels.max()) + 1
    if not 0 <= target_cluster <= k:
        raise DataError(f"target cluster {target_cluster} out of range (k={k})")
    lo, hi = view.indptr[node], view.indptr[node + 1]
    nbr_labels = labels[view.indices[lo:hi]]
    row = view.b[lo:hi]
    w_target = float(row[nbr_labels == target_cluster].sum())
    w_current = float(row[nbr_labels == current].sum())
    mass = np.bincount(labels, weights=view.sizes.astype(np.float64), minlength=k + 1)
    s_i = float(view.sizes[node])
    gain_in = w_target - 2.0 * r * s_i * float(mass[target_cluster])
    cost_out = w_current - 2.0 * r * s_i * (float(mass[current]) - s_i)
    return gain_in - cost_out


def _dense(labels: np.ndarray) -> np.ndarray:
    return np.unique(labels, return_inverse=True)[1].astype(np.int64)


def _coarsen_view(view: _OptView, labels: np.ndarray, k: int) -> _OptView:
    src = np.repeat(np.arange(view.n), np.diff(view.indptr))
    cu = labels[src]
    cv = labels[view.indices]
    same = cu == cv
    self_total = view.self_total + 0.5 * float(view.b[same].sum())
    cu, cv, w = cu[~same], cv[~same], view.b[~same]
    key = cu * np.int64(k) + cv
    uniq, inverse = np.unique(key, return_inverse=True)
    sums = np.bincount(inverse, weights=w)
    m_src = (uniq // k).astype(np.int64)
    m_dst = (uniq % k).astype(np.int64)
    indptr = np.zeros(k + 1, dtype=np.int64)
    np.cumsum(np.bincount(m_src, minlength=k), out=indptr[1:])
    sizes = np.bincount(labels, weights=view.sizes.astype(np.float64), minlength=k).astype(np.int64)
    return _OptView(k, indptr, m_dst, sums, sizes, self_total, view.total_size)


def _vcycle(view: _OptView, labels: np.ndarray, r: float, state):
    state = _kernels.local_move(
        view.indptr, view.indices, view.b, view.sizes, labels, r, np.uint64(state)
    )
    labels = _dense(labels)
    k = int(labels.max()) + 1 if labels.size else 0
    if 0 < k < view.n:
        meta = _coarsen_view(view, labels, k)
        meta_labels, state = _vcycle(meta, np.arange(k, dtype=np.int64), r, state)
        labels = meta_labels[labels]
        state = _kernels.local_move(
            view.indptr, view.indices, view.b, view.sizes, labels, r, np.uint64(state)
        )
        labels = _dense(labels)
    return labels, state


def optimize(graph, r: float, seed: int) -> Assignment:
    """Maximize the quality function from one seeded start.

    Deterministic in (graph, r, seed); the result admits no positive-gain
    single-node relocation.
    """
    r = _check_r(r)
    if seed < 0:
        raise ConfigError("seed must be nonnegative")
    view = _view_of(graph)
    labels, _ = _vcycle(view, np.arange(view.n, dtype=np.int64), r, np.uint64(seed))
    return Assignment(canonical_labels(labels), validate=False)


def multi_run_optimize(graph, r: float, runs: int, base_seed: int = 0, threads: int = 1) -> Assignment:
    """Best assignment over seeds base_seed .. base_seed + runs - 1.

    Ties in quality go to the lowest seed, and results are merged in seed
    order, so the outcome does not depend on ``threads``.
    """
    r = _check_r(r)
    if runs < 1:
        raise ConfigError("runs must be >= 1")
    view = _view_of(graph)
    seeds = list(range(base_seed, base_seed + runs))

    def one(seed: int) -> tuple[float, np.ndarray]:
        labels, _ = _vcycle(view, np.arange(view.n, dtype=np.int64), r, np.uint64(seed))
        return _quality_view(view, labels, r), labels

    if threads > 1 and runs > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            results = list(pool.map(one, seeds))
    else:
        results = [one(s) for s in seeds]
    best_q, best_labels = results[0]
    for q, labels in results[1:]:
        if q > best_q:
            best_q, best_labels = q, labels
    return Assignment(canonical_labels(best_labels), validate=False)


def coarsen(graph, assign: Assignment) -> MetaGraph:
    """Aggregate a graph by an assignment, preserving total size and weight.

    The result carries, for every cluster pair, the summed directed weight
    between their members (within-cluster sums go to ``self_weight``), so
    evaluating quality on it reproduces the flat evaluation exactly.
    """
    return coarsen_labels(graph, assign.cluster_of)


def coarsen_labels(graph, labels: np.ndarray) -> MetaGraph:
    """Like :func:`coarsen`, but nodes labeled -1 are dropped entirely."""
    if isinstance(graph, NormalizedGraph):
        indptr, indices, weights = graph.indptr, graph.indices, graph.weights
        node_size = np.ones(graph.n, np.int64)
        self_weight = None
        n = graph.n
    elif isinstance(graph, MetaGraph):
        indptr, indices, weights = graph.indptr, graph.indices, graph.weights
        node_size = graph.node_size
        self_weight = graph.self_weight
        n = graph.n
    else:
        raise TypeError(f"unsupported graph type: {type(graph).__name__}")
    labels = np.asarray(labels, dtype=np.int64)
    if labels.size != n:
        raise DataError(f"labels cover {labels.size} nodes, graph has {n}")
    alive = labels >= 0
    k = int(labels.max()) + 1 if alive.any() else 0
    new_size = np.bincount(labels[alive], weights=node_size[alive].astype(np.float64), minlength=k).astype(np.int64)
    new_self = np.zeros(k, dtype=np.float64)
    if self_weight is not None and k:
        new_self += np.bincount(labels[alive], weights=self_weight[alive], minlength=k)
    src = np.repeat(np.arange(n), np.diff(indptr))
    cu = labels[src]
    cv = labels[indices]
    keep = (cu >= 0) & (cv >= 0)
    cu, cv, w = cu[keep], cv[keep], weights[keep]
    same = cu == cv
    if k:
        new_self += np.bincount(cu[same], weights=w[same], minlength=k)
    cu, cv, w = cu[~same], cv[~same], w[~same]
    key = cu * np.int64(max(k, 1)) + cv
    uniq, inverse = np.unique(key, return_inverse=True)
    sums = np.bincount(inverse, weights=w)
    m_src = (uniq // max(k, 1)).astype(np.int64)
    m_dst = (uniq % max(k, 1)).astype(np.int64)
    new_indptr = np.zeros(k + 1, dtype=np.int64)
    if k:
        np.cumsum(np.bincount(m_src, minlength=k), out=new_indptr[1:])
    return MetaGraph(k, new_size, new_self, new_indptr, m_dst, sums)
