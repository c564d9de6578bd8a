"""Bottom-up assembly of the nested classification system.

Levels are numbered 1 (coarsest) to L (finest) and built from L upward. Each
level runs two stages: a preliminary clustering of the current graph, then a
cleanup pass that merges every undersized area into the eligible area it is
most related to, excluding the ones related to no eligible area at all.
Higher levels cluster the graph of the level below's final areas, which makes
the nesting constraint hold by construction: publications sharing an area
share its ancestors.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .cpm import Assignment, MetaGraph, coarsen_labels, multi_run_optimize, quality
from .errors import ConfigError, DataError
from .graph import NormalizedGraph, connected_components

INCLUDED = 0
NO_RELATIONS = 1
SMALL_COMPONENT = 2
UNREACHABLE_AREA = 3

REASON_NAMES = {
    NO_RELATIONS: "no_relations",
    SMALL_COMPONENT: "small_component",
    UNREACHABLE_AREA: "unreachable_area",
}


@dataclass(frozen=True)
class HierarchyParams:
    """Per-level knobs, index 0 = level 1 (the coarsest level).

    Resolutions must increase strictly from level 1 to level L and stay in
    [0, 1]; every level needs a minimum area size >= 1 and a run count >= 1.
    """

    resolutions: tuple[float, ...]
    min_sizes: tuple[int, ...]
    runs: tuple[int, ...]
    base_seed: int = 0

    @property
    def levels(self) -> int:
        return len(self.resolutions)

    def validate(self) -> None:
        L = self.levels
        if L < 1:
            raise ConfigError("at least one level is required")
        if len(self.min_sizes) != L or len(self.runs) != L:
            raise ConfigError(
                f"per-level lists disagree: {L} resolutions, "
                f"{len(self.min_sizes)} min sizes, {len(self.runs)} run counts"
            )
        for r in self.resolutions:
            if not 0.0 <= r <= 1.0:
                raise ConfigError(f"resolution {r} outside [0, 1]")
        for a, b in zip(self.resolutions, self.resolutions[1:]):
            if not a < b:
                raise ConfigError(
                    f"resolutions must increase strictly from level 1 down (got {a} then {b})"
                )
        if any(m < 1 for m in self.min_sizes):
            raise ConfigError("minimum area sizes must be >= 1")
        if any(c < 1 for c in self.runs):
            raise ConfigError("run counts must be >= 1")
        if self.base_seed < 0:
            raise ConfigError("base seed must be nonnegative")

    def for_level(self, level: int) -> tuple[float, int, int]:
        return self.resolutions[level - 1], self.min_sizes[level - 1], self.runs[level - 1]

    def seed_for_level(self, level: int) -> int:
        # Disjoint seed ranges: deeper levels consume their run counts first.
        return self.base_seed + sum(self.runs[level:])


class EligibleAreaSet:
    """Areas meeting the minimum size at some level."""

    def __init__(self, mask: np.ndarray):
        self.mask = np.asarray(mask, dtype=bool)
        self.members = frozenset(int(u) for u in np.flatnonzero(self.mask))

    def __contains__(self, u: int) -> bool:
        return bool(self.mask[u])

    def __len__(self) -> int:
        return int(self.mask.sum())


def eligible_set(prelim: Assignment, n_min: int, node_size: np.ndarray | None = None) -> EligibleAreaSet:
    """Exactly the areas whose publication count reaches ``n_min``."""
    sizes = prelim.sizes(node_size)
    return EligibleAreaSet(sizes >= n_min)


class AreaRelatednessMatrix:
    """Sparse ordered area-to-area relatedness.

    Entry (u, v) averages the normalized relatedness from u's publications to
    v's over all |u| * |v| ordered pairs; pairs with no crossing relation are
    absent (value 0). Not symmetrized.
    """

    def __init__(self, k: int, u: np.ndarray, v: np.ndarray, values: np.ndarray):
        self.k = int(k)
        order = np.lexsort((v, u))
        self.u = u[order]
        self.v = v[order]
        self.values = values[order]
        self._indptr = np.zeros(self.k + 1, dtype=np.int64)
        if self.k:
            np.cumsum(np.bincount(self.u, minlength=self.k), out=self._indptr[1:])

    def value(self, u: int, v: int) -> float:
        lo, hi = self._indptr[u], self._indptr[u + 1]
        pos = lo + np.searchsorted(self.v[lo:hi], v)
        if pos < hi and self.v[pos] == v:
            return float(self.values[pos])
        return 0.0

    def items(self):
        for u, v, val in zip(self.u, self.v, self.values):
            yield int(u), int(v), float(val)

    def best_target(self, u: int, eligible_mask: np.ndarray) -> int | None:
        """Most related eligible area (ties to the lowest id), or None if u
        has no relation to any eligible area."""
        lo, hi = self._indptr[u], self._indptr[u + 1]
        best, best_val = None, 0.0
        for pos in range(lo, hi):
            v = int(self.v[pos])
            if eligible_mask[v] and self.values[pos] > best_val:
                best, best_val = v, float(self.values[pos])
        return best


def _directed_arrays(graph) -> tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray, int]:
    if isinstance(graph, NormalizedGraph):
        return graph.indptr, graph.indices, graph.weights, np.ones(graph.n, np.int64), graph.n
    if isinstance(graph, MetaGraph):
        return graph.indptr, graph.indices, graph.weights, graph.node_size, graph.n
    raise TypeError(f"unsupported graph type: {type(graph).__name__}")


def area_relatedness(graph, prelim: Assignment) -> AreaRelatednessMatrix:
    """Average normalized relatedness between preliminary areas (ordered)."""
    indptr, indices, weights, node_size, n = _directed_arrays(graph)
    labels = prelim.cluster_of
    if labels.size != n:
        raise DataError(f"assignment covers {labels.size} nodes, graph has {n}")
    k = prelim.k
    pub_counts = np.bincount(labels, weights=node_size.astype(np.float64), minlength=k)
    src = np.repeat(np.arange(n), np.diff(indptr))
    cu = labels[src]
    cv = labels[indices]
    cross = cu != cv
    cu, cv, w = cu[cross], cv[cross], weights[cross]
    key = cu * np.int64(max(k, 1)) + cv
    uniq, inverse = np.unique(key, return_inverse=True)
    sums = np.bincount(inverse, weights=w)
    au = (uniq // max(k, 1)).astype(np.int64)
    av = (uniq % max(k, 1)).astype(np.int64)
    values = sums / (pub_counts[au] * pub_counts[av])
    return AreaRelatednessMatrix(k, au, av, values)


@dataclass
class StageTwoResult:
    """Cleanup outcome: final labels (-1 for excluded nodes), the excluded
    node indices, and the old-to-new dense area id map (-1 for dissolved)."""

    final: np.ndarray
    excluded: np.ndarray
    old_to_new: np.ndarray
    eligible: EligibleAreaSet


def reassign_small_areas(graph, prelim: Assignment, n_min: int) -> StageTwoResult:
    """Merge each undersized area wholesale into its most related eligible
    area; areas with no relation to any eligible area are excluded.

    A single pass over the preliminary assignment decides every merge, and
    merged areas are not re-checked (they can only grow). Final area ids are
    re-densified, preserving the order of the surviving eligible ids.
    """
    _, _, _, node_size, n = _directed_arrays(graph)
    labels = prelim.cluster_of
    k = prelim.k
    eligible = eligible_set(prelim, n_min, node_size)
    target = np.full(k, -1, dtype=np.int64)
    target[eligible.mask] = np.flatnonzero(eligible.mask)
    if len(eligible) < k:
        abar = area_relatedness(graph, prelim)
        for u in np.flatnonzero(~eligible.mask):
            best = abar.best_target(int(u), eligible.mask)
            if best is not None:
                target[u] = best
    # Dense new ids in ascending order of the surviving (eligible) old ids.
    new_id = np.full(k, -1, dtype=np.int64)
    new_id[eligible.mask] = np.arange(len(eligible))
    old_to_new = np.where(target >= 0, new_id[target.clip(0)], -1)
    final = old_to_new[labels]
    excluded = np.flatnonzero(final < 0)
    return StageTwoResult(final, excluded, old_to_new, eligible)


@dataclass
class LevelResult:
    """One level's outputs at publication granularity (-1 where a node was
    already excluded or became excluded at this level)."""

    level: int
    preliminary: np.ndarray
    final: np.ndarray
    excluded_at_level: np.ndarray
    area_sizes: np.ndarray
    best_quality: float


class PathTable:
    """Per-publication dotted area paths plus exclusion reasons.

    ``numbers[i, l-1]`` is publication i's local area number at level l
    (areas are numbered within their parent by descending size, starting at
    1), or -1 for excluded publications. This is all the labeling and
    reporting stages need, and exactly what assignment.tsv serializes.
    """

    def __init__(self, numbers: np.ndarray, reasons: np.ndarray):
        self.numbers = np.asarray(numbers, dtype=np.int64)
        self.reasons = np.asarray(reasons, dtype=np.int8)
        self.n = self.numbers.shape[0]
        self.L = self.numbers.shape[1]

    @property
    def included_mask(self) -> np.ndarray:
        return self.reasons == INCLUDED

    def path_of(self, i: int) -> tuple[int, ...] | None:
        if self.reasons[i] != INCLUDED:
            return None
        return tuple(int(x) for x in self.numbers[i])

    def path_str(self, i: int, level: int | None = None) -> str:
        level = self.L if level is None else level
        return ".".join(str(int(x)) for x in self.numbers[i, :level])

    def reason_of(self, i: int) -> str | None:
        code = int(self.reasons[i])
        return REASON_NAMES.get(code)

    def areas_at(self, level: int) -> dict[tuple[int, ...], np.ndarray]:
        """Member indices per area path prefix at a level, sorted by path."""
        if not 1 <= level <= self.L:
            raise ConfigError(f"level must be in 1..{self.L}, got {level}")
        members: dict[tuple[int, ...], list[int]] = {}
        included = np.flatnonzero(self.included_mask)
        for i in included:
            key = tuple(int(x) for x in self.numbers[i, :level])
            members.setdefault(key, []).append(int(i))
        return {key: np.array(v, dtype=np.int64) for key, v in sorted(members.items())}


class Hierarchy:
    """Full multi-level clustering outcome."""

    def __init__(self, params: HierarchyParams, levels: list[LevelResult], paths: PathTable):
        self.params = params
        self.levels = levels  # index 0 = level 1 (coarsest)
        self.paths = paths
        self.n = paths.n
        self.L = paths.L

    def level(self, l: int) -> LevelResult:
        return self.levels[l - 1]

    @property
    def excluded_count(self) -> int:
        return int((~self.paths.included_mask).sum())


def _assign_path_numbers(levels: list[LevelResult], n: int) -> np.ndarray:
    """Local area numbers per level: areas sorted within their parent by
    descending size (ties by dense id), numbered from 1."""
    L = len(levels)
    numbers = np.full((n, L), -1, dtype=np.int64)
    parent_key: dict[int, tuple[int, ...]] = {}
    for li, res in enumerate(levels):
        final = res.final
        sizes = res.area_sizes
        k = sizes.size
        if k == 0:
            continue
        # Representative member per area gives its parent path.
        idx = np.flatnonzero(final >= 0)
        order = np.argsort(final[idx], kind="stable")
        first_pos = np.searchsorted(final[idx][order], np.arange(k))
        reps = idx[order][first_pos]
        groups: dict[tuple[int, ...], list[int]] = {}
        for a in range(k):
            parent = tuple(int(x) for x in numbers[reps[a], :li]) if li else ()
            groups.setdefault(parent, []).append(a)
        local = np.zeros(k, dtype=np.int64)
        for parent, areas in groups.items():
            ordered = sorted(areas, key=lambda a: (-int(sizes[a]), a))
            for num, a in enumerate(ordered, start=1):
                local[a] = num
        mask = final >= 0
        numbers[mask, li] = local[final[mask]]
    return numbers


def build_hierarchy(graph: NormalizedGraph, params: HierarchyParams, threads: int = 1) -> Hierarchy:
    """Run both stages at every level, finest first.

    Nodes excluded at one level never reappear at higher levels. Exclusion
    reasons: degree-0 nodes, nodes in citation components too small to ever
    reach the finest minimum size, and nodes stranded in areas unrelated to
    every eligible area.
    """
    params.validate()
    n = graph.n
    L = params.levels
    carrier = np.arange(n, dtype=np.int64)  # publication -> node of the current-level graph
    current = graph
    levels_desc: list[LevelResult] = []
    for level in range(L, 0, -1):
        r, n_min, runs = params.for_level(level)
        alive = carrier >= 0
        if current.n == 0 or not alive.any():
            levels_desc.append(
                LevelResult(level, np.full(n, -1, np.int64), np.full(n, -1, np.int64),
                            np.zeros(0, np.int64), np.zeros(0, np.int64), 0.0)
            )
            current = coarsen_labels(current, np.full(current.n, -1, np.int64))
            continue
        prelim = multi_run_optimize(current, r, runs, params.seed_for_level(level), threads=threads)
        best_q = quality(current, prelim, r)
        stage2 = reassign_small_areas(current, prelim, n_min)
        safe = carrier.clip(0)
        prelim_pub = np.where(alive, prelim.cluster_of[safe], -1)
        final_pub = np.where(alive, stage2.final[safe], -1)
        newly_excluded = np.flatnonzero(alive & (final_pub < 0))
        kept = final_pub[final_pub >= 0]
        sizes = np.bincount(kept) if kept.size else np.zeros(0, np.int64)
        levels_desc.append(LevelResult(level, prelim_pub, final_pub, newly_excluded, sizes, best_q))
        current = coarsen_labels(current, stage2.final)
        carrier = np.where(alive, stage2.final[safe], -1)
    levels = list(reversed(levels_desc))  # level 1 first

    reasons = np.zeros(n, dtype=np.int8)
    excluded_mask = levels[0].final < 0 if L else np.zeros(n, bool)
    if excluded_mask.any():
        comp = connected_components(graph)
        comp_small = comp.component_size[comp.component_id] < params.min_sizes[-1]
        reasons[excluded_mask] = UNREACHABLE_AREA
        reasons[excluded_mask & comp_small] = SMALL_COMPONENT
        reasons[excluded_mask & (graph.degree == 0)] = NO_RELATIONS
    numbers = _assign_path_numbers(levels, n)
    return Hierarchy(params, levels, PathTable(numbers, reasons))


# ---------------------------------------------------------------------------
# TSV serialization: assignment.tsv (included publications, one dotted path
# column per level) and excluded.tsv (publication id, reason).

def write_assignment(hier, pubs, path) -> None:
    paths = hier.paths if isinstance(hier, Hierarchy) else hier
    from pathlib import Path as _P

    with _P(path).open("w", encoding="utf-8", newline="\n") as f:
        f.write("pub_id\t" + "\t".join(f"level{l}" for l in range(1, paths.L + 1)) + "\n")
        for i in range(paths.n):
            if paths.reasons[i] != INCLUDED:
                continue
            cols = [paths.path_str(i, level) for level in range(1, paths.L + 1)]
            f.write(pubs[i].external_id + "\t" + "\t".join(cols) + "\n")


def write_excluded(hier, pubs, path) -> None:
    paths = hier.paths if isinstance(hier, Hierarchy) else hier
    from pathlib import Path as _P

    with _P(path).open("w", encoding="utf-8", newline="\n") as f:
        f.write("pub_id\treason\n")
        for i in range(paths.n):
            if paths.reasons[i] != INCLUDED:
                f.write(f"{pubs[i].external_id}\t{REASON_NAMES[int(paths.reasons[i])]}\n")


def read_path_table(assignment_path, excluded_path, pubs) -> PathTable:
    """Rebuild a PathTable from the two TSVs (inverse of the writers)."""
    from pathlib import Path as _P

    reason_codes = {name: code for code, name in REASON_NAMES.items()}
    lines = _P(assignment_path).read_text(encoding="utf-8").splitlines()
    if not lines:
        raise DataError(f"{assignment_path}: empty file")
    header = lines[0].split("\t")
    L = len(header) - 1
    if L < 1 or header[0] != "pub_id":
        raise DataError(f"{assignment_path}: unexpected header {header!r}")
    numbers = np.full((pubs.n, L), -1, dtype=np.int64)
    reasons = np.full(pubs.n, -1, dtype=np.int8)
    for line in lines[1:]:
        if not line:
            continue
        cells = line.split("\t")
        i = pubs.index.get(cells[0])
        if i is None:
            raise DataError(f"{assignment_path}: unknown publication id {cells[0]!r}")
        numbers[i] = [int(x) for x in cells[L].split(".")]
        reasons[i] = INCLUDED
    for line in _P(excluded_path).read_text(encoding="utf-8").splitlines()[1:]:
        if not line:
            continue
        pub_id, reason = line.split("\t")
        i = pubs.index.get(pub_id)
        if i is None:
            raise DataError(f"{excluded_path}: unknown publication id {pub_id!r}")
        reasons[i] = reason_codes[reason]
    if (reasons < 0).any():
        missing = pubs[int(np.flatnonzero(reasons < 0)[0])].external_id
        raise DataError(f"publication {missing!r} appears in neither assignment nor exclusion file")
    return PathTable(numbers, reasons)
