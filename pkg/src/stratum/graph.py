"""Normalized citation relatedness as a compressed sparse directed graph.

Two publications are related (weight 1) when either cites the other. Each
node's outgoing weights are that binary relation divided by the node's total
number of relations, so every non-isolated row sums to exactly 1 and fields
with dense citation traffic carry no extra weight. Isolated nodes keep empty
rows. Values are asymmetric in general but the support is symmetric.
"""

from __future__ import annotations

import struct
from pathlib import Path

import numpy as np
import scipy.sparse as sp
from scipy.sparse import csgraph

from .corpus import EdgeList
from .errors import DataError

_CACHE_MAGIC = b"NGR1"


class NormalizedGraph:
    """Row-normalized relatedness in CSR form (offsets, neighbors, weights).

    Neighbor lists are sorted by index; ``degree[i]`` counts i's binary
    relations, so ``weights`` within row i are all ``1 / degree[i]``.
    """

    def __init__(self, n: int, indptr: np.ndarray, indices: np.ndarray, weights: np.ndarray):
        self.n = int(n)
        self.indptr = np.asarray(indptr, dtype=np.int64)
        self.indices = np.asarray(indices, dtype=np.int64)
        self.weights = np.asarray(weights, dtype=np.float64)
        self.degree = np.diff(self.indptr)

    @property
    def nnz(self) -> int:
        return int(self.indices.size)

    def row(self, i: int) -> tuple[np.ndarray, np.ndarray]:
        lo, hi = self.indptr[i], self.indptr[i + 1]
        return self.indices[lo:hi], self.weights[lo:hi]

    def support(self) -> sp.csr_matrix:
        """Binary relation pattern as a scipy CSR matrix."""
        data = np.ones(self.nnz, dtype=np.int8)
        return sp.csr_matrix((data, self.indices, self.indptr), shape=(self.n, self.n))


class ComponentMap:
    """Connected components over the (symmetric) relation support."""

    def __init__(self, component_id: np.ndarray):
        self.component_id = np.asarray(component_id, dtype=np.int64)
        self.component_size = np.bincount(self.component_id) if self.component_id.size else np.zeros(0, np.int64)

    @property
    def count(self) -> int:
        return int(self.component_size.size)

    def size_of_node(self, i: int) -> int:
        return int(self.component_size[self.component_id[i]])


def build_relatedness(edges: EdgeList, n: int | None = None) -> NormalizedGraph:
    """Build the normalized graph from a canonical edge list.

    Each undirected relation contributes one entry per direction; the weight
    of every entry in row i is ``1 / degree(i)``. Degree-0 nodes get empty
    rows rather than any sentinel weight.
    """
    n = edges.n if n is None else int(n)
    if edges.n > n:
        raise DataError(f"edge list covers {edges.n} nodes but n={n}")
    pairs = edges.edges
    src = np.concatenate([pairs[:, 0], pairs[:, 1]])
    dst = np.concatenate([pairs[:, 1], pairs[:, 0]])
    order = np.lexsort((dst, src))
    src, dst = src[order], dst[order]
    counts = np.bincount(src, minlength=n)
    indptr = np.zeros(n + 1, dtype=np.int64)
    np.cumsum(counts, out=indptr[1:])
    degree = counts.astype(np.float64)
    with np.errstate(divide="ignore"):
        inv = np.where(degree > 0, 1.0 / degree, 0.0)
    weights = inv[src]
    return NormalizedGraph(n, indptr, dst.astype(np.int64), weights)


def connected_components(graph: NormalizedGraph) -> ComponentMap:
    """Undirected components of the relation support (isolated nodes are singleton components)."""
    if graph.n == 0:
        return ComponentMap(np.zeros(0, np.int64))
    _, labels = csgraph.connected_components(graph.support(), directed=False)
    return ComponentMap(labels.astype(np.int64))


def save_graph_cache(graph: NormalizedGraph, path: str | Path) -> None:
    """Write the binary cache: magic "NGR1", u64 n, u64 nnz, u64 offsets[n+1],
    u32 neighbors[nnz], f64 weights[nnz], all little-endian."""
    path = Path(path)
    with path.open("wb") as f:
        f.write(_CACHE_MAGIC)
        f.write(struct.pack("<QQ", graph.n, graph.nnz))
        f.write(graph.indptr.astype("<u8").tobytes())
        f.write(graph.indices.astype("<u4").tobytes())
        f.write(graph.weights.astype("<f8").tobytes())


def load_graph_cache(path: str | Path) -> NormalizedGraph:
    path = Path(path)
    raw = path.read_bytes()
    if raw[:4] != _CACHE_MAGIC:
        raise DataError(f"{path}: not a graph cache (bad magic)")
    n, nnz = struct.unpack_from("<QQ", raw, 4)
    off = 4 + 16
    indptr = np.frombuffer(raw, dtype="<u8", count=n + 1, offset=off).astype(np.int64)
    off += (n + 1) * 8
    indices = np.frombuffer(raw, dtype="<u4", count=nnz, offset=off).astype(np.int64)
    off += nnz * 4
    weights = np.frombuffer(raw, dtype="<f8", count=nnz, offset=off).astype(np.float64)
    if indptr[-1] != nnz:
        raise DataError(f"{path}: corrupt cache (offsets do not match entry count)")
    return NormalizedGraph(int(n), indptr, indices, weights)
