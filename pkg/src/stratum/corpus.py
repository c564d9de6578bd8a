"""Tab-separated corpus ingestion: publication metadata and citation edges.

File formats (UTF-8, LF line endings, header row in both files):

  publications.tsv   columns: id, year, journal, title, abstract, categories.
                     Only id and year are mandatory; categories holds zero or
                     more labels separated by "|".
  citations.tsv      columns: citing_id, cited_id.

Loading is single-threaded and line-oriented so errors can name the offending
line. Tables and edge lists are treated as immutable once loaded. For bulk
programmatic ingestion (synthetic benchmarks), use :func:`edges_from_array`,
which canonicalizes a numpy edge array without per-row Python overhead.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from pathlib import Path
from typing import Iterable, Iterator

import numpy as np

from .errors import DataError

MANDATORY_COLUMNS = ("id", "year")
OPTIONAL_COLUMNS = ("journal", "title", "abstract", "categories")


@dataclass(frozen=True)
class PublicationRecord:
    external_id: str
    year: int
    journal: str = ""
    title: str = ""
    abstract: str = ""
    categories: tuple[str, ...] = ()


@dataclass(frozen=True)
class LoadConfig:
    """Year-window filtering is opt-in: a None bound accepts every year."""

    min_year: int | None = None
    max_year: int | None = None
    category_delimiter: str = "|"

    def accepts(self, year: int) -> bool:
        if self.min_year is not None and year < self.min_year:
            return False
        if self.max_year is not None and year > self.max_year:
            return False
        return True


class PublicationTable:
    """Publications with dense indices 0..n-1 assigned in file order.

    External ids are unique; ``index`` maps each id to its dense index.
    ``rejected_years`` counts rows dropped by the year window at load time.
    """

    def __init__(self, records: Iterable[PublicationRecord], rejected_years: int = 0):
        self.records: list[PublicationRecord] = list(records)
        self.index: dict[str, int] = {}
        for i, rec in enumerate(self.records):
            if not rec.external_id:
                raise DataError(f"empty publication id at dense index {i}")
            if rec.external_id in self.index:
                raise DataError(f"duplicate publication id {rec.external_id!r}")
            self.index[rec.external_id] = i
        self.rejected_years = rejected_years
        self._years: np.ndarray | None = None

    @property
    def n(self) -> int:
        return len(self.records)

    def __len__(self) -> int:
        return len(self.records)

    def __iter__(self) -> Iterator[PublicationRecord]:
        return iter(self.records)

    def __getitem__(self, i: int) -> PublicationRecord:
        return self.records[i]

    @property
    def years(self) -> np.ndarray:
        if self._years is None:
            self._years = np.array([r.year for r in self.records], dtype=np.int64)
        return self._years

    def to_tsv(self, path: str | Path, category_delimiter: str = "|") -> None:
        """Write the canonical publications.tsv; reloading reproduces the indexing."""
        path = Path(path)
        with path.open("w", encoding="utf-8", newline="\n") as f:
            f.write("id\tyear\tjournal\ttitle\tabstract\tcategories\n")
            for rec in self.records:
                cats = category_delimiter.join(rec.categories)
                fields = (rec.external_id, str(rec.year), rec.journal, rec.title, rec.abstract, cats)
                f.write("\t".join(_sanitize(v) for v in fields) + "\n")


def _sanitize(value: str) -> str:
    # Tabs and newlines would break the row structure.
    return value.replace("\t", " ").replace("\n", " ").replace("\r", " ")


def _split_header(line: str, path: Path) -> dict[str, int]:
    names = [c.strip().lower() for c in line.rstrip("\n").rstrip("\r").split("\t")]
    positions = {name: i for i, name in enumerate(names)}
    for col in MANDATORY_COLUMNS:
        if col not in positions:
            raise DataError(f"{path}: missing mandatory column {col!r} in header")
    return positions


def load_publications(path: str | Path, config: LoadConfig | None = None) -> PublicationTable:
    """Load publications.tsv, assigning dense indices in file order.

    Duplicate ids and unparseable years are hard errors naming the line.
    Rows outside the configured year window are dropped and counted
    (duplicate detection still covers them).
    """
    config = config or LoadConfig()
    path = Path(path)
    if not path.is_file():
        raise DataError(f"publications file not found: {path}")
    records: list[PublicationRecord] = []
    seen: dict[str, int] = {}
    rejected = 0
    with path.open("r", encoding="utf-8") as f:
        header = f.readline()
        if not header:
            raise DataError(f"{path}: empty file, expected a header row")
        pos = _split_header(header, path)
        for lineno, line in enumerate(f, start=2):
            if not line.strip():
                continue
            cells = line.rstrip("\n").rstrip("\r").split("\t")

            def cell(col: str) -> str:
                i = pos.get(col)
                return cells[i].strip() if i is not None and i < len(cells) else ""

            ext_id = cell("id")
            if not ext_id:
                raise DataError(f"{path}:{lineno}: empty id")
            if ext_id in seen:
                raise DataError(
                    f"{path}:{lineno}: duplicate publication id {ext_id!r} (first seen at line {seen[ext_id]})"
                )
            seen[ext_id] = lineno
            raw_year = cell("year")
            try:
                year = int(raw_year)
            except ValueError:
                raise DataError(f"{path}:{lineno}: unparseable year {raw_year!r}") from None
            if not config.accepts(year):
                rejected += 1
                continue
            cats = tuple(
                c.strip()
                for c in cell("categories").split(config.category_delimiter)
                if c.strip()
            )
            records.append(
                PublicationRecord(
                    external_id=ext_id,
                    year=year,
                    journal=cell("journal"),
                    title=cell("title"),
                    abstract=cell("abstract"),
                    categories=cats,
                )
            )
    return PublicationTable(records, rejected_years=rejected)


class UnknownIdPolicy(Enum):
    """What to do with citation endpoints that are not in the table."""

    SKIP = "skip"
    STRICT = "strict"


class EdgeList:
    """Canonical citation edges over dense indices.

    ``edges`` is an (m, 2) int64 array of (citing, cited) pairs keeping the
    first-seen direction; self-loops are gone and each unordered pair occurs
    once. The dropped-row counters together with ``kept`` sum to the number
    of input rows.
    """

    def __init__(
        self,
        n: int,
        edges: np.ndarray,
        self_loops_dropped: int = 0,
        duplicates_dropped: int = 0,
        unknown_skipped: int = 0,
    ):
        edges = np.asarray(edges, dtype=np.int64).reshape(-1, 2)
        if edges.size and (edges.min() < 0 or edges.max() >= n):
            raise DataError("edge endpoint out of range")
        self.n = int(n)
        self.edges = edges
        self.self_loops_dropped = self_loops_dropped
        self.duplicates_dropped = duplicates_dropped
        self.unknown_skipped = unknown_skipped

    @property
    def kept(self) -> int:
        return int(self.edges.shape[0])

    def __len__(self) -> int:
        return self.kept

    def indegree(self) -> np.ndarray:
        """In-corpus citation counts (times cited, first-seen direction)."""
        return np.bincount(self.edges[:, 1], minlength=self.n)


def load_citations(
    path: str | Path,
    pubs: PublicationTable,
    policy: UnknownIdPolicy = UnknownIdPolicy.SKIP,
) -> EdgeList:
    """Load citations.tsv against a loaded table.

    Rows are classified in order unknown > self-loop > duplicate, so each
    input row increments exactly one counter (or is kept).
    """
    path = Path(path)
    if not path.is_file():
        raise DataError(f"citations file not found: {path}")
    index = pubs.index
    n = pubs.n
    kept_edges: list[tuple[int, int]] = []
    seen: set[int] = set()
    self_loops = duplicates = unknown = 0
    with path.open("r", encoding="utf-8") as f:
        header = f.readline()
        if not header:
            raise DataError(f"{path}: empty file, expected a header row")
        names = [c.strip().lower() for c in header.rstrip("\n").rstrip("\r").split("\t")]
        if len(names) < 2:
            raise DataError(f"{path}: expected two tab-separated columns (citing_id, cited_id)")
        for lineno, line in enumerate(f, start=2):
            if not line.strip():
                continue
            cells = line.rstrip("\n").rstrip("\r").split("\t")
            if len(cells) < 2:
                raise DataError(f"{path}:{lineno}: expected two columns")
            citing_id, cited_id = cells[0].strip(), cells[1].strip()
            citing = index.get(citing_id)
            cited = index.get(cited_id)
            if citing is None or cited is None:
                if policy is UnknownIdPolicy.STRICT:
                    bad = citing_id if citing is None else cited_id
                    raise DataError(f"{path}:{lineno}: unknown publication id {bad!r}")
                unknown += 1
                continue
            if citing == cited:
                self_loops += 1
                continue
            key = min(citing, cited) * n + max(citing, cited)
            if key in seen:
                duplicates += 1
                continue
            seen.add(key)
            kept_edges.append((citing, cited))
    edges = np.array(kept_edges, dtype=np.int64).reshape(-1, 2)
    return EdgeList(
        n,
        edges,
        self_loops_dropped=self_loops,
        duplicates_dropped=duplicates,
        unknown_skipped=unknown,
    )


def edges_from_array(pairs: np.ndarray, n: int) -> EdgeList:
    """Canonicalize an (m, 2) array of directed pairs into an EdgeList.

    Vectorized equivalent of :func:`load_citations` for in-memory data:
    drops self-loops, collapses duplicate unordered pairs (first occurrence
    wins), and counts both.
    """
    pairs = np.asarray(pairs, dtype=np.int64).reshape(-1, 2)
    total = pairs.shape[0]
    not_loop = pairs[:, 0] != pairs[:, 1]
    pairs = pairs[not_loop]
    self_loops = total - pairs.shape[0]
    lo = np.minimum(pairs[:, 0], pairs[:, 1])
    hi = np.maximum(pairs[:, 0], pairs[:, 1])
    key = lo * np.int64(n) + hi
    _, first = np.unique(key, return_index=True)
    first.sort()
    duplicates = pairs.shape[0] - first.size
    return EdgeList(
        n,
        pairs[first],
        self_loops_dropped=int(self_loops),
        duplicates_dropped=int(duplicates),
    )
