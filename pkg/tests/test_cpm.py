import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from stratum.cpm import (
    Assignment,
    canonical_labels,
    coarsen,
    local_move_gain,
    multi_run_optimize,
    optimize,
    quality,
)
from stratum.errors import ConfigError

from .conftest import bridge_graph, graph_from_pairs, random_graph
from .oracles import dense_directed, direct_quality, partition_maxima, partition_sets

TRIANGLE = [(0, 1), (0, 2), (1, 2)]


def triangle():
    return graph_from_pairs(TRIANGLE, 3)


# ---------------------------------------------------------------------------
# quality


def test_singletons_score_zero_everywhere():
    for seed in range(5):
        g = random_graph(12, 0.3, seed)
        for r in (0.0, 0.01, 0.5, 1.0):
            assert quality(g, Assignment.singletons(g.n), r) == 0.0


def test_triangle_single_cluster():
    q = quality(triangle(), Assignment(np.zeros(3, dtype=np.int64)), 0.1)
    assert abs(q - 2.4) < 1e-12


def test_bridge_two_triangle_partition():
    q = quality(bridge_graph(), Assignment(np.array([0, 0, 0, 1, 1, 1])), 0.05)
    assert abs(q - (16 / 3 - 0.05 * 12)) < 1e-12


def test_quality_matches_direct_double_sum():
    rng = np.random.default_rng(1)
    for seed in range(10):
        g = random_graph(10, 0.4, seed)
        labels = rng.integers(0, 3, g.n)
        a = dense_directed(g)
        for r in (0.0, 0.037, 0.5):
            got = quality(g, Assignment.from_labels(labels), r)
            want = direct_quality(a, canonical_labels(labels), r)
            assert abs(got - want) < 1e-9


def test_resolution_out_of_range_rejected():
    g = triangle()
    for r in (-0.1, 1.1):
        with pytest.raises(ConfigError):
            quality(g, Assignment.singletons(3), r)
        with pytest.raises(ConfigError):
            optimize(g, r, seed=0)


# ---------------------------------------------------------------------------
# local_move_gain


def test_gain_of_identity_move_is_zero():
    g = triangle()
    assert local_move_gain(g, Assignment(np.array([0, 1, 1])), 2, 1, 0.25) == 0.0


def test_gain_triangle_join_at_r_zero():
    g = triangle()
    gain = local_move_gain(g, Assignment(np.array([0, 1, 1])), 0, 1, 0.0)
    assert abs(gain - 2.0) < 1e-12


def test_gain_matches_fresh_quality_difference():
    rng = np.random.default_rng(42)
    checked = 0
    while checked < 100:
        g = random_graph(int(rng.integers(4, 16)), 0.35, int(rng.integers(1_000_000)))
        labels = canonical_labels(rng.integers(0, max(2, g.n // 2), g.n))
        assign = Assignment(labels.copy())
        node = int(rng.integers(g.n))
        k = int(labels.max()) + 1
        target = int(rng.integers(k + 1))  # k = fresh empty cluster
        if target == labels[node]:
            continue
        r = float(rng.uniform(0.0, 0.6))
        gain = local_move_gain(g, assign, node, target, r)
        before = quality(g, assign, r)
        moved = labels.copy()
        moved[node] = target
        after = quality(g, Assignment.from_labels(moved), r)
        assert abs(gain - (after - before)) < 1e-9
        checked += 1


# ---------------------------------------------------------------------------
# optimize


def assert_node_move_stable(g, assign, r, tol=1e-9):
    k = assign.k
    for node in range(g.n):
        for target in range(k + 1):
            assert local_move_gain(g, assign, node, target, r) <= tol


def test_zero_edge_graph_stays_singletons():
    g = graph_from_pairs(np.zeros((0, 2), dtype=np.int64), 8)
    for r in (0.0, 0.3, 1.0):
        assert optimize(g, r, seed=3) == Assignment.singletons(8)


def test_bridge_merges_below_transition():
    g = bridge_graph()
    for seed in (0, 1, 7, 23):
        a = optimize(g, 0.02, seed)
        assert partition_sets(a.cluster_of) == partition_sets([0] * 6)


def test_bridge_splits_above_transition():
    g = bridge_graph()
    for seed in (0, 1, 7, 23):
        a = optimize(g, 0.05, seed)
        assert partition_sets(a.cluster_of) == partition_sets([0, 0, 0, 1, 1, 1])


def test_optimize_output_is_node_move_stable():
    for seed in range(6):
        g = random_graph(14, 0.3, seed + 50)
        for r in (0.0, 0.05, 0.3):
            assert_node_move_stable(g, optimize(g, r, seed), r)


def test_optimize_deterministic():
    g = random_graph(30, 0.2, seed=9)
    a = optimize(g, 0.1, seed=5)
    b = optimize(g, 0.1, seed=5)
    np.testing.assert_array_equal(a.cluster_of, b.cluster_of)


# ---------------------------------------------------------------------------
# multi_run_optimize


def test_single_run_equals_optimize():
    g = random_graph(20, 0.25, seed=2)
    assert multi_run_optimize(g, 0.1, runs=1, base_seed=11) == optimize(g, 0.1, 11)


def test_best_quality_monotone_in_runs():
    g = random_graph(25, 0.2, seed=4)
    r = 0.08
    prev = -np.inf
    for runs in (1, 2, 5, 10, 20):
        q = quality(g, multi_run_optimize(g, r, runs=runs, base_seed=0), r)
        assert q >= prev - 1e-12
        prev = q


def test_bridge_attains_enumerated_optimum():
    g = bridge_graph()
    a = dense_directed(g)
    for r in (0.02, 1 / 27, 0.05):
        best, _ = partition_maxima(a, [r])
        got = quality(g, multi_run_optimize(g, r, runs=20, base_seed=0), r)
        assert abs(got - best[0]) < 1e-9


def test_threads_do_not_change_the_answer():
    g = random_graph(40, 0.15, seed=6)
    a = multi_run_optimize(g, 0.06, runs=12, base_seed=3, threads=1)
    b = multi_run_optimize(g, 0.06, runs=12, base_seed=3, threads=4)
    np.testing.assert_array_equal(a.cluster_of, b.cluster_of)


# ---------------------------------------------------------------------------
# coarsen


def test_coarsen_by_singletons_is_isomorphic():
    g = random_graph(12, 0.3, seed=8)
    meta = coarsen(g, Assignment.singletons(g.n))
    assert meta.n == g.n
    assert meta.node_size.tolist() == [1] * g.n
    np.testing.assert_allclose(meta.self_weight, 0.0)
    np.testing.assert_array_equal(meta.indptr, g.indptr)
    np.testing.assert_array_equal(meta.indices, g.indices)
    np.testing.assert_allclose(meta.weights, g.weights)


def test_coarsen_triangle_into_one_node():
    meta = coarsen(triangle(), Assignment(np.zeros(3, dtype=np.int64)))
    assert meta.n == 1
    assert meta.node_size.tolist() == [3]
    assert abs(meta.pair_weight(0, 0) - 3.0) < 1e-12


def test_coarsen_preserves_quality():
    rng = np.random.default_rng(7)
    for trial in range(50):
        g = random_graph(int(rng.integers(5, 20)), 0.3, int(rng.integers(1_000_000)))
        fine = canonical_labels(rng.integers(0, max(2, g.n // 2), g.n))
        meta = coarsen(g, Assignment(fine))
        grouping = canonical_labels(rng.integers(0, max(2, meta.n // 2 + 1), meta.n))
        r = float(rng.uniform(0, 0.4))
        flat = grouping[fine]
        q_meta = quality(meta, Assignment.from_labels(grouping), r)
        q_flat = quality(g, Assignment.from_labels(flat), r)
        assert abs(q_meta - q_flat) < 1e-9


def test_pair_weight_star_asymmetry():
    from .conftest import star_graph

    g = star_graph(4)
    meta = coarsen(g, Assignment(np.array([0, 1, 1, 1, 1])))
    assert abs(meta.pair_weight(0, 1) - 1.0) < 1e-12  # center outward: 4 * 1/4
    assert abs(meta.pair_weight(1, 0) - 4.0) < 1e-12  # leaves inward: 4 * 1
    assert meta.pair_weight(0, 0) == 0.0


# ---------------------------------------------------------------------------
# properties


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 10_000), st.floats(0.0, 1.0))
def test_property_singleton_quality_zero(seed, r):
    g = random_graph(10, 0.3, seed)
    assert quality(g, Assignment.singletons(g.n), r) == 0.0


@settings(max_examples=20, deadline=None)
@given(st.integers(0, 10_000))
def test_property_meta_total_size(seed):
    rng = np.random.default_rng(seed)
    g = random_graph(12, 0.3, seed)
    labels = canonical_labels(rng.integers(0, 4, g.n))
    meta = coarsen(g, Assignment(labels))
    assert meta.node_size.sum() == g.n
    assert np.all(meta.weights >= 0)
