"""Characteristic terms for areas: extraction, relevance scoring, selection.

Candidate terms are stopword-free word n-grams from titles and abstracts,
with the final word naively singularized. A term's relevance in an area u
with parent area v is n_ut / (n_vt + m), where n_ut and n_vt count the
publications of u and v whose text contains the term at least once and m
balances distinctiveness against absolute frequency. The top-level parent is
the whole included corpus. Selection walks terms by descending score and
drops any candidate too similar (longest-common-subsequence ratio) to an
already selected one, so near-duplicates like "library"/"librarian" never
appear together.
"""

from __future__ import annotations

import re
from collections import Counter
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable

from .errors import ConfigError, DataError

DEFAULT_STOPWORDS = frozenset(
    """a about above after again against all also an and any are as at be because
    been before being below between both but by can cannot could did do does doing
    down during each few for from further had has have having here how if in into
    is it its itself more most no nor not of off on once only or other our out
    over own same should so some such than that the their theirs them then there
    these they this those through to too under until up very was we were what when
    where which while who whom why will with would you your""".split()
)

_SEGMENT_SPLIT = re.compile(r"[^a-z0-9 ]+")


@dataclass(frozen=True)
class LabelParams:
    smoothing: int = 25
    top_k: int = 5
    dedup_threshold: float = 0.66
    min_term_len: int = 2
    max_ngram: int = 3
    stopwords: frozenset[str] = DEFAULT_STOPWORDS

    def validate(self) -> None:
        if self.smoothing < 0:
            raise ConfigError("smoothing must be >= 0")
        if self.top_k < 1:
            raise ConfigError("top_k must be >= 1")
        if not 0.0 <= self.dedup_threshold <= 1.0:
            raise ConfigError("dedup_threshold must lie in [0, 1]")
        if self.max_ngram < 1:
            raise ConfigError("max_ngram must be >= 1")


def load_stopwords(path: str | Path) -> frozenset[str]:
    """Read a stopword list, one lowercase word per line."""
    words = set()
    for line in Path(path).read_text(encoding="utf-8").splitlines():
        word = line.strip().lower()
        if word:
            words.add(word)
    return frozenset(words)


def singularize(word: str) -> str:
    """Naive plural stripping of a single lowercase word."""
    if len(word) > 3 and word.endswith("ies"):
        return word[:-3] + "y"
    if len(word) > 3 and word.endswith("ses"):
        return word[:-3] + "s"
    if word.endswith("ss") or len(word) < 2:
        return word
    if word.endswith("s"):
        return word[:-1]
    return word


def extract_terms(title: str, abstract: str, params: LabelParams | None = None) -> set[str]:
    """Distinct candidate terms of one publication.

    The text is lowercased; apostrophes are deleted and hyphens become
    spaces; any other punctuation is a hard phrase boundary that n-grams
    never cross. An n-gram qualifies when none of its words is a stopword,
    it contains at least one letter, and it is at least min_term_len
    characters long; its final word is singularized.
    """
    params = params or LabelParams()
    text = f"{title} {abstract}".lower().replace("'", "").replace("-", " ")
    terms: set[str] = set()
    for segment in _SEGMENT_SPLIT.split(text):
        words = segment.split()
        if not words:
            continue
        keep = [w not in params.stopwords for w in words]
        for size in range(1, params.max_ngram + 1):
            for start in range(len(words) - size + 1):
                if not all(keep[start : start + size]):
                    continue
                gram = words[start : start + size - 1] + [singularize(words[start + size - 1])]
                term = " ".join(gram)
                if len(term) < params.min_term_len:
                    continue
                if not any(ch.isalpha() for ch in term):
                    continue
                terms.add(term)
    return terms


@dataclass
class TermStats:
    """Per-area document frequencies: how many of the area's publications
    contain each term at least once."""

    doc_freq: Counter
    doc_count: int

    @classmethod
    def from_term_sets(cls, term_sets: Iterable[set[str]]) -> "TermStats":
        freq: Counter = Counter()
        count = 0
        for terms in term_sets:
            count += 1
            freq.update(terms)
        return cls(freq, count)


def relevance_scores(area_stats: TermStats, parent_stats: TermStats, smoothing: int) -> dict[str, float]:
    """Score n_ut / (n_vt + m) for every term of the area.

    The parent must contain the area, so every area term has a parent count;
    a missing one is a containment violation and raises.
    """
    scores: dict[str, float] = {}
    for term, n_ut in area_stats.doc_freq.items():
        n_vt = parent_stats.doc_freq.get(term)
        if n_vt is None or n_vt < n_ut:
            raise DataError(f"term {term!r} counted {n_ut}x in area but {n_vt}x in parent")
        scores[term] = n_ut / (n_vt + smoothing)
    return scores


def _lcs_length(s: str, t: str) -> int:
    # Iterative two-row DP; terms are short so O(len*len) is fine.
    if len(s) < len(t):
        s, t = t, s
    prev = [0] * (len(t) + 1)
    for ch in s:
        cur = [0] * (len(t) + 1)
        for j, cj in enumerate(t, start=1):
            cur[j] = prev[j - 1] + 1 if ch == cj else max(prev[j], cur[j - 1])
        prev = cur
    return prev[-1]


def term_similarity(t1: str, t2: str) -> float:
    """Longest common subsequence length over the average term length."""
    if not t1 or not t2:
        return 0.0
    return 2.0 * _lcs_length(t1, t2) / (len(t1) + len(t2))


@dataclass
class AreaLabelSet:
    """Ranked deduplicated terms for one area."""

    area: tuple[int, ...]
    terms: list[tuple[str, float]] = field(default_factory=list)


def select_labels(scored: dict[str, float], params: LabelParams | None = None) -> list[tuple[str, float]]:
    """Greedy top-k by score (ties lexicographic), skipping any term whose
    similarity to an already selected term reaches the dedup threshold."""
    params = params or LabelParams()
    selected: list[tuple[str, float]] = []
    for term, score in sorted(scored.items(), key=lambda kv: (-kv[1], kv[0])):
        if len(selected) >= params.top_k:
            break
        if any(term_similarity(term, prev) >= params.dedup_threshold for prev, _ in selected):
            continue
        selected.append((term, score))
    return selected


def label_hierarchy(pubs, hier, params: LabelParams | None = None) -> dict[tuple[int, ...], AreaLabelSet]:
    """Label every area at every level of a built hierarchy.

    Term statistics cover included publications only (excluded ones belong
    to no area). Keys are dotted-path tuples; level-1 areas are scored
    against the whole included corpus, deeper areas against their parent.
    """
    params = params or LabelParams()
    params.validate()
    paths = getattr(hier, "paths", hier)
    term_sets: dict[int, set[str]] = {}
    for i in range(paths.n):
        if paths.reasons[i] == 0:
            rec = pubs[i]
            term_sets[i] = extract_terms(rec.title, rec.abstract, params)
    corpus_stats = TermStats.from_term_sets(term_sets.values())
    labels: dict[tuple[int, ...], AreaLabelSet] = {}
    parent_stats: dict[tuple[int, ...], TermStats] = {}
    for level in range(1, paths.L + 1):
        level_stats: dict[tuple[int, ...], TermStats] = {}
        for path, members in paths.areas_at(level).items():
            stats = TermStats.from_term_sets(term_sets[i] for i in members)
            level_stats[path] = stats
            parent = corpus_stats if level == 1 else parent_stats[path[:-1]]
            scores = relevance_scores(stats, parent, params.smoothing)
            labels[path] = AreaLabelSet(path, select_labels(scores, params))
        parent_stats = level_stats
    return labels


def write_labels(labels: dict[tuple[int, ...], AreaLabelSet], path: str | Path) -> None:
    """labels.tsv: area_path, rank, term, relevance (full precision)."""
    with Path(path).open("w", encoding="utf-8", newline="\n") as f:
        f.write("area_path\trank\tterm\trelevance\n")
        for area_path in sorted(labels):
            for rank, (term, score) in enumerate(labels[area_path].terms, start=1):
                dotted = ".".join(str(x) for x in area_path)
                f.write(f"{dotted}\t{rank}\t{term}\t{score!r}\n")


def read_labels(path: str | Path) -> dict[tuple[int, ...], AreaLabelSet]:
    out: dict[tuple[int, ...], AreaLabelSet] = {}
    for line in Path(path).read_text(encoding="utf-8").splitlines()[1:]:
        if not line:
            continue
        dotted, _rank, term, score = line.split("\t")
        key = tuple(int(x) for x in dotted.split("."))
        out.setdefault(key, AreaLabelSet(key)).terms.append((term, float(score)))
    return out
