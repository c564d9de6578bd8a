import itertools

import numpy as np
import pytest

from stratum.corpus import PublicationRecord, PublicationTable
from stratum.cpm import Assignment
from stratum.errors import ConfigError
from stratum.hierarchy import (
    NO_RELATIONS,
    SMALL_COMPONENT,
    UNREACHABLE_AREA,
    HierarchyParams,
    PathTable,
    area_relatedness,
    build_hierarchy,
    eligible_set,
    read_path_table,
    reassign_small_areas,
    write_assignment,
    write_excluded,
)

from .conftest import graph_from_pairs


def two_cliques(size=60):
    edges = []
    for base in (0, size):
        edges += [(base + i, base + j) for i, j in itertools.combinations(range(size), 2)]
    edges.append((0, size))
    return graph_from_pairs(edges, 2 * size)


# ---------------------------------------------------------------------------
# params


def test_params_must_increase_strictly():
    with pytest.raises(ConfigError, match="increase strictly"):
        HierarchyParams((0.1, 0.1), (1, 1), (1, 1)).validate()
    with pytest.raises(ConfigError, match="increase strictly"):
        HierarchyParams((0.2, 0.1), (1, 1), (1, 1)).validate()
    HierarchyParams((0.0, 0.1, 1.0), (1, 1, 1), (1, 1, 1)).validate()


def test_params_bounds_and_lengths():
    with pytest.raises(ConfigError):
        HierarchyParams((0.1, 1.5), (1, 1), (1, 1)).validate()
    with pytest.raises(ConfigError):
        HierarchyParams((0.1, 0.2), (1,), (1, 1)).validate()
    with pytest.raises(ConfigError):
        HierarchyParams((0.1,), (0,), (1,)).validate()
    with pytest.raises(ConfigError):
        HierarchyParams((0.1,), (1,), (0,)).validate()


def test_per_level_seeds_are_disjoint():
    p = HierarchyParams((0.01, 0.02, 0.03), (1, 1, 1), (10, 20, 30), base_seed=100)
    assert p.seed_for_level(3) == 100
    assert p.seed_for_level(2) == 130
    assert p.seed_for_level(1) == 150


# ---------------------------------------------------------------------------
# area relatedness


def test_area_relatedness_partial_overlap():
    # a_02 = 0.5 (node 0 also relates to 3), node 1 unrelated to 2
    g = graph_from_pairs([(0, 2), (0, 3), (1, 3)], 4)
    prelim = Assignment(np.array([0, 0, 1, 2]))
    abar = area_relatedness(g, prelim)
    assert abs(abar.value(0, 1) - 0.25) < 1e-12


def test_area_relatedness_star_asymmetry():
    g = graph_from_pairs([(0, i) for i in range(1, 5)], 5)
    prelim = Assignment(np.array([0, 1, 1, 1, 1]))
    abar = area_relatedness(g, prelim)
    assert abs(abar.value(0, 1) - 0.25) < 1e-12
    assert abs(abar.value(1, 0) - 1.0) < 1e-12


def test_area_relatedness_disconnected_pair_is_zero():
    g = graph_from_pairs([(0, 1), (2, 3)], 4)
    abar = area_relatedness(g, Assignment(np.array([0, 0, 1, 1])))
    assert abar.value(0, 1) == 0.0
    assert abar.value(1, 0) == 0.0


# ---------------------------------------------------------------------------
# eligibility and stage 2


def test_eligible_set_examples():
    prelim = Assignment(np.array([0] * 3 + [1] * 5 + [2] * 2))
    assert eligible_set(prelim, 3).members == {0, 1}
    assert eligible_set(prelim, 1).members == {0, 1, 2}
    assert eligible_set(prelim, 6).members == set()


def test_reassign_identity_when_all_eligible():
    g = two_cliques(4)
    prelim = Assignment(np.array([0] * 4 + [1] * 4))
    result = reassign_small_areas(g, prelim, n_min=3)
    np.testing.assert_array_equal(result.final, prelim.cluster_of)
    assert result.excluded.size == 0


def test_reassign_small_area_joins_most_related():
    # A = clique of 5, B = pair, single crossing relation B -> A
    edges = [(i, j) for i, j in itertools.combinations(range(5), 2)] + [(5, 6), (5, 0)]
    g = graph_from_pairs(edges, 7)
    prelim = Assignment(np.array([0, 0, 0, 0, 0, 1, 1]))
    result = reassign_small_areas(g, prelim, n_min=3)
    assert result.excluded.size == 0
    assert np.all(result.final == 0)
    assert result.old_to_new.tolist() == [0, 0]


def test_reassign_excludes_unrelated_small_area():
    # isolated pair + eligible triangle elsewhere
    g = graph_from_pairs([(0, 1), (2, 3), (2, 4), (3, 4)], 5)
    prelim = Assignment(np.array([0, 0, 1, 1, 1]))
    result = reassign_small_areas(g, prelim, n_min=3)
    assert result.excluded.tolist() == [0, 1]
    assert result.final.tolist() == [-1, -1, 0, 0, 0]


def test_reassign_tie_breaks_to_lowest_area_id():
    # node 4 bridges two eligible triangles with identical relatedness
    edges = [(0, 1), (0, 2), (1, 2), (3, 5), (3, 6), (5, 6), (4, 0), (4, 3)]
    g = graph_from_pairs(edges, 7)
    prelim = Assignment(np.array([0, 0, 0, 1, 2, 1, 1]))
    result = reassign_small_areas(g, prelim, n_min=3)
    assert result.old_to_new[2] == 0  # joined area 0, not area 1


# ---------------------------------------------------------------------------
# build_hierarchy


def test_empty_edge_graph_excludes_everything():
    g = graph_from_pairs(np.zeros((0, 2), dtype=np.int64), 9)
    params = HierarchyParams((0.01, 0.02), (2, 2), (2, 2))
    h = build_hierarchy(g, params)
    assert h.excluded_count == 9
    for level in (1, 2):
        assert h.level(level).area_sizes.size == 0
    assert all(h.paths.reason_of(i) == "no_relations" for i in range(9))


def test_two_cliques_nest_into_one_top_area():
    h = build_hierarchy(
        two_cliques(60),
        HierarchyParams((1e-6, 0.01), (50, 10), (5, 5), base_seed=1),
    )
    assert h.level(2).area_sizes.tolist() == [60, 60]
    assert h.level(1).area_sizes.tolist() == [120]
    assert h.excluded_count == 0
    # dotted paths: same level-1 area, two distinct level-2 areas
    paths = {h.paths.path_of(i) for i in range(120)}
    assert paths == {(1, 1), (1, 2)}


def test_eq1_checked_before_any_work():
    g = two_cliques(4)
    with pytest.raises(ConfigError):
        build_hierarchy(g, HierarchyParams((0.05, 0.01), (1, 1), (1, 1)))


def test_exclusion_reasons_cover_all_three_cases():
    # component {0..3} path: splits into two pairs, both under n_min, related
    # only to each other -> unreachable; {4,5} pair -> small component;
    # {6} isolated -> no relations; {7..10} clique stays.
    edges = [(0, 1), (1, 2), (2, 3), (4, 5)] + [
        (i, j) for i, j in itertools.combinations(range(7, 11), 2)
    ]
    g = graph_from_pairs(edges, 11)
    params = HierarchyParams((0.3,), (3,), (8,), base_seed=2)
    h = build_hierarchy(g, params)
    reasons = [h.paths.reason_of(i) for i in range(11)]
    assert reasons[6] == "no_relations"
    assert reasons[4] == reasons[5] == "small_component"
    assert reasons[0] == reasons[1] == reasons[2] == reasons[3] == "unreachable_area"
    assert all(r is None for r in reasons[7:])


def planted_hierarchy_graph(seed=0, blocks=(3, 3, 3), leaf_size=12):
    """Three nested levels of planted structure plus debris (tiny component,
    isolated node)."""
    rng = np.random.default_rng(seed)
    n_leaves = blocks[0] * blocks[1] * blocks[2]
    n = n_leaves * leaf_size
    edges = []
    for leaf in range(n_leaves):
        base = leaf * leaf_size
        members = range(base, base + leaf_size)
        edges += [(i, j) for i, j in itertools.combinations(members, 2) if rng.random() < 0.8]
    mid_size = blocks[2] * leaf_size
    for mid in range(blocks[0] * blocks[1]):
        base = mid * mid_size
        for _ in range(mid_size * 2):
            i, j = rng.integers(base, base + mid_size, 2)
            if i != j:
                edges.append((int(i), int(j)))
    top_size = blocks[1] * mid_size
    for top in range(blocks[0]):
        base = top * top_size
        for _ in range(top_size):
            i, j = rng.integers(base, base + top_size, 2)
            if i != j:
                edges.append((int(i), int(j)))
    # debris: a 2-node component and an isolated node
    total = n + 3
    edges.append((n, n + 1))
    return graph_from_pairs(edges, total), total


def check_structure(h, params, graph):
    """Nesting, minimum sizes, parent cover, exclusion necessity."""
    paths = h.paths
    included = np.flatnonzero(paths.included_mask)
    for level in range(2, paths.L + 1):
        by_area = {}
        for i in included:
            key = tuple(paths.numbers[i, :level])
            parent = tuple(paths.numbers[i, : level - 1])
            by_area.setdefault(key, set()).add(parent)
        for key, parents in by_area.items():
            assert len(parents) == 1, f"area {key} has parents {parents}"
    for level in range(1, paths.L + 1):
        n_min = params.min_sizes[level - 1]
        sizes = {}
        for i in included:
            key = tuple(paths.numbers[i, :level])
            sizes[key] = sizes.get(key, 0) + 1
        assert sizes, "no areas at level"
        assert min(sizes.values()) >= n_min
        assert sum(sizes.values()) == included.size
    from stratum.graph import connected_components

    comp = connected_components(graph)
    too_small = comp.component_size[comp.component_id] < params.min_sizes[-1]
    assert not np.any(too_small & paths.included_mask)


def test_planted_three_level_structure():
    graph, n = planted_hierarchy_graph(seed=3)
    params = HierarchyParams(
        resolutions=(2e-5, 2e-4, 2e-3),
        min_sizes=(30, 12, 4),
        runs=(3, 3, 3),
        base_seed=11,
    )
    h = build_hierarchy(graph, params, threads=2)
    check_structure(h, params, graph)
    # debris is excluded: 2-node component and isolated node
    assert h.paths.reason_of(n - 1) == "no_relations"
    assert h.paths.reason_of(n - 2) == "small_component"
    assert h.paths.reason_of(n - 3) == "small_component"


# ---------------------------------------------------------------------------
# serialization


def pub_table(n):
    return PublicationTable(
        [PublicationRecord(external_id=f"p{i}", year=2001 + i % 10) for i in range(n)]
    )


def test_assignment_roundtrip(tmp_path):
    h = build_hierarchy(
        two_cliques(10),
        HierarchyParams((1e-4, 0.02), (5, 3), (4, 4), base_seed=5),
    )
    pubs = pub_table(20)
    a_path, e_path = tmp_path / "assignment.tsv", tmp_path / "excluded.tsv"
    write_assignment(h, pubs, a_path)
    write_excluded(h, pubs, e_path)
    loaded = read_path_table(a_path, e_path, pubs)
    np.testing.assert_array_equal(loaded.numbers, h.paths.numbers)
    np.testing.assert_array_equal(loaded.reasons, h.paths.reasons)
    header = a_path.read_text().splitlines()[0]
    assert header == "pub_id\tlevel1\tlevel2"
