"""Post-hoc reports over a built classification.

All operations are read-only over the path table, the publication table and
(where citation counts matter) the edge list. Percentages use fractional
counting for multi-category publications: one publication spreads a unit
weight evenly over its categories. Orderings are fully deterministic so the
emitted TSVs are byte-stable.
"""

from __future__ import annotations

from collections import Counter, defaultdict
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .corpus import EdgeList, PublicationTable
from .errors import ConfigError
from .hierarchy import NO_RELATIONS, PathTable


def _paths_of(hier) -> PathTable:
    return getattr(hier, "paths", hier)


def _fmt_path(path: tuple[int, ...]) -> str:
    return ".".join(str(x) for x in path)


@dataclass
class SizeDistribution:
    level: int
    areas: list[tuple[tuple[int, ...], int]]  # (path, size), size desc then path

    @property
    def sizes(self) -> np.ndarray:
        return np.array([s for _, s in self.areas], dtype=np.int64)

    @property
    def total(self) -> int:
        return int(self.sizes.sum()) if self.areas else 0

    @property
    def min(self) -> int:
        return int(self.sizes.min()) if self.areas else 0

    @property
    def max(self) -> int:
        return int(self.sizes.max()) if self.areas else 0

    @property
    def mean(self) -> float:
        return float(self.sizes.mean()) if self.areas else 0.0

    def histogram(self, bins: int = 10) -> tuple[np.ndarray, np.ndarray]:
        return np.histogram(self.sizes, bins=bins)


def size_distribution(hier, level: int) -> SizeDistribution:
    """Exact per-area publication counts at one level."""
    paths = _paths_of(hier)
    sizes = [(path, int(members.size)) for path, members in paths.areas_at(level).items()]
    sizes.sort(key=lambda ps: (-ps[1], ps[0]))
    return SizeDistribution(level, sizes)


@dataclass
class AreaReport:
    path: tuple[int, ...]
    size: int
    average_year: float
    top_journals: list[tuple[str, int]]
    terms: list[str] = field(default_factory=list)

    @property
    def path_str(self) -> str:
        return _fmt_path(self.path)


def hot_areas(
    hier,
    pubs: PublicationTable,
    level: int,
    top_n: int = 10,
    labels: dict[tuple[int, ...], list[str]] | None = None,
    journals_per_area: int = 3,
) -> list[AreaReport]:
    """Areas ranked by average publication year, newest first.

    Ties break by size (larger first) then by area path. Label terms are
    joined in when a labels mapping is supplied.
    """
    if top_n < 1:
        raise ConfigError("top_n must be >= 1")
    paths = _paths_of(hier)
    years = pubs.years
    reports = []
    for path, members in paths.areas_at(level).items():
        avg = float(years[members].mean())
        counts = Counter(pubs[i].journal for i in members if pubs[i].journal)
        top_j = sorted(counts.items(), key=lambda kv: (-kv[1], kv[0]))[:journals_per_area]
        terms = list(labels.get(path, [])) if labels else []
        reports.append(AreaReport(path, int(members.size), avg, top_j, terms))
    reports.sort(key=lambda a: (-a.average_year, -a.size, a.path))
    return reports[:top_n]


def category_overlap(hier, pubs: PublicationTable, level: int, area: tuple[int, ...]) -> list[tuple[str, float]]:
    """Fractionally counted category percentages for one area.

    Each publication contributes 1/|categories| per category; percentages
    are over the area's publications that carry at least one category and
    sum to 100 (empty when none do).
    """
    paths = _paths_of(hier)
    members = paths.areas_at(level).get(tuple(area))
    if members is None:
        raise ConfigError(f"no area {_fmt_path(tuple(area))} at level {level}")
    weights: defaultdict[str, float] = defaultdict(float)
    base = 0
    for i in members:
        cats = pubs[i].categories
        if not cats:
            continue
        base += 1
        share = 1.0 / len(cats)
        for c in cats:
            weights[c] += share
    if base == 0:
        return []
    rows = [(cat, 100.0 * w / base) for cat, w in weights.items()]
    rows.sort(key=lambda cw: (-cw[1], cw[0]))
    return rows


@dataclass
class ExclusionStats:
    per_year: list[tuple[int, int, int, float]]  # year, excluded, total, percent
    per_category: list[tuple[str, float, float, float]]  # category, excluded mass, total mass, percent
    no_relation_count: int  # excluded publications with no relations at all
    excluded_total: int
    total: int

    @property
    def no_relation_share(self) -> float:
        return self.no_relation_count / self.excluded_total if self.excluded_total else 0.0


def exclusion_stats(hier, pubs: PublicationTable) -> ExclusionStats:
    """How exclusion spreads over publication years and categories."""
    paths = _paths_of(hier)
    excluded = ~paths.included_mask
    years = pubs.years
    per_year = []
    for year in np.unique(years):
        in_year = years == year
        total = int(in_year.sum())
        exc = int((in_year & excluded).sum())
        per_year.append((int(year), exc, total, 100.0 * exc / total))
    total_mass: defaultdict[str, float] = defaultdict(float)
    excluded_mass: defaultdict[str, float] = defaultdict(float)
    for i, rec in enumerate(pubs):
        if not rec.categories:
            continue
        share = 1.0 / len(rec.categories)
        for c in rec.categories:
            total_mass[c] += share
            if excluded[i]:
                excluded_mass[c] += share
    per_category = [
        (cat, excluded_mass.get(cat, 0.0), tot, 100.0 * excluded_mass.get(cat, 0.0) / tot)
        for cat, tot in total_mass.items()
    ]
    per_category.sort(key=lambda row: (-row[3], row[0]))
    exc_total = int(excluded.sum())
    no_rel = int((excluded & (paths.reasons == NO_RELATIONS)).sum())
    return ExclusionStats(per_year, per_category, no_rel, exc_total, paths.n)


@dataclass
class JournalDistribution:
    journal: str
    found: bool
    level: int
    areas: list[tuple[tuple[int, ...], int]]  # (path, count), count desc then path
    top_cited: dict[tuple[int, ...], list[tuple[str, int]]]  # per area: (pub id, citations)


def journal_distribution(
    hier,
    pubs: PublicationTable,
    journal: str,
    level: int,
    edges: EdgeList,
    top_cited: int = 3,
) -> JournalDistribution:
    """Where one journal's publications land at a level, with each area's
    most cited members (in-corpus citation counts, ties by id)."""
    paths = _paths_of(hier)
    wanted = journal.strip().lower()
    member_ids = [i for i, rec in enumerate(pubs) if rec.journal.lower() == wanted]
    if not member_ids:
        return JournalDistribution(journal, False, level, [], {})
    indegree = edges.indegree()
    by_area: defaultdict[tuple[int, ...], list[int]] = defaultdict(list)
    for i in member_ids:
        if paths.reasons[i] == 0:
            by_area[tuple(int(x) for x in paths.numbers[i, :level])].append(i)
    areas = sorted(((path, len(ids)) for path, ids in by_area.items()), key=lambda pc: (-pc[1], pc[0]))
    cited = {}
    for path, ids in sorted(by_area.items()):
        ranked = sorted(ids, key=lambda i: (-int(indegree[i]), pubs[i].external_id))
        cited[path] = [(pubs[i].external_id, int(indegree[i])) for i in ranked[:top_cited]]
    return JournalDistribution(journal, True, level, areas, cited)


# ---------------------------------------------------------------------------
# TSV writers (plain UTF-8, LF, header row; full-precision floats)

def write_size_distribution(dist: SizeDistribution, path: str | Path) -> None:
    with Path(path).open("w", encoding="utf-8", newline="\n") as f:
        f.write("area_path\tsize\n")
        for area, size in dist.areas:
            f.write(f"{_fmt_path(area)}\t{size}\n")


def write_hot_areas(reports: list[AreaReport], path: str | Path) -> None:
    with Path(path).open("w", encoding="utf-8", newline="\n") as f:
        f.write("area_path\tsize\tavg_pub_year\tjournals\tterms\n")
        for rep in reports:
            journals = "|".join(j for j, _ in rep.top_journals)
            terms = "|".join(rep.terms)
            f.write(f"{rep.path_str}\t{rep.size}\t{rep.average_year!r}\t{journals}\t{terms}\n")


def write_category_overlap(rows: list[tuple[str, float]], path: str | Path) -> None:
    with Path(path).open("w", encoding="utf-8", newline="\n") as f:
        f.write("category\tpercent\n")
        for cat, pct in rows:
            f.write(f"{cat}\t{pct!r}\n")


def write_exclusion_stats(stats: ExclusionStats, path: str | Path) -> None:
    with Path(path).open("w", encoding="utf-8", newline="\n") as f:
        f.write("# category shares count multi-category publications fractionally\n")
        f.write("kind\tkey\texcluded\ttotal\tpercent\n")
        for year, exc, total, pct in stats.per_year:
            f.write(f"year\t{year}\t{exc}\t{total}\t{pct!r}\n")
        for cat, exc, total, pct in stats.per_category:
            f.write(f"category\t{cat}\t{exc!r}\t{total!r}\t{pct!r}\n")
        f.write(
            f"no_relation_share\t\t{stats.no_relation_count}\t{stats.excluded_total}"
            f"\t{100.0 * stats.no_relation_share!r}\n"
        )


def write_journal_distribution(jd: JournalDistribution, path: str | Path) -> None:
    with Path(path).open("w", encoding="utf-8", newline="\n") as f:
        f.write("area_path\tcount\ttop_cited\n")
        for area, count in jd.areas:
            cited = "|".join(f"{pid}:{c}" for pid, c in jd.top_cited.get(area, []))
            f.write(f"{_fmt_path(area)}\t{count}\t{cited}\n")
