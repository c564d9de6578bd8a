import itertools

import numpy as np
import pytest

from stratum import _kernels
from stratum.corpus import edges_from_array
from stratum.graph import NormalizedGraph, build_relatedness


@pytest.fixture(scope="session", autouse=True)
def warm_kernels():
    # Pay the one-off JIT cost before any timed test runs.
    _kernels.warmup()


def graph_from_pairs(pairs, n) -> NormalizedGraph:
    return build_relatedness(edges_from_array(np.array(pairs, dtype=np.int64).reshape(-1, 2), n), n)


def bridge_graph() -> NormalizedGraph:
    """Two triangles {0,1,2} and {3,4,5} joined by the edge (2,3)."""
    return graph_from_pairs([(0, 1), (0, 2), (1, 2), (3, 4), (3, 5), (4, 5), (2, 3)], 6)


def clique_graph(n) -> NormalizedGraph:
    return graph_from_pairs(list(itertools.combinations(range(n), 2)), n)


def star_graph(leaves) -> NormalizedGraph:
    return graph_from_pairs([(0, i) for i in range(1, leaves + 1)], leaves + 1)


def random_graph(n, p, seed) -> NormalizedGraph:
    rng = np.random.default_rng(seed)
    pairs = [(i, j) for i in range(n) for j in range(i + 1, n) if rng.random() < p]
    if not pairs:
        pairs = np.zeros((0, 2), dtype=np.int64)
    return graph_from_pairs(pairs, n)
