"""End-to-end pipeline stages with atomic output promotion and a manifest.

Each command writes its files into a sibling ``<output>.partial`` directory
and moves them into the output directory only when the whole command has
succeeded, manifest last. The manifest records what produced the tree (seed,
per-level parameters and attained quality, loader counters) plus a sha256
per output file. Wall-clock timings go to the log stream only, keeping
reruns of the same configuration byte-identical.
"""

from __future__ import annotations

import hashlib
import json
import logging
import os
import re
import shutil
import time
from pathlib import Path

from . import analysis, figures
from .config import PipelineConfig
from .corpus import EdgeList, PublicationTable, load_citations, load_publications
from .errors import ConfigError, DataError
from .graph import NormalizedGraph, build_relatedness, load_graph_cache, save_graph_cache
from .hierarchy import (
    Hierarchy,
    PathTable,
    build_hierarchy,
    read_path_table,
    write_assignment,
    write_excluded,
)
from .labeling import AreaLabelSet, label_hierarchy, read_labels, write_labels

logger = logging.getLogger("stratum")

GRAPH_CACHE = "graph.ngr1"
MANIFEST = "manifest.json"
ASSIGNMENT = "assignment.tsv"
EXCLUDED = "excluded.tsv"
LABELS = "labels.tsv"


class _Workspace:
    """Staged writes: files land in ``<output>.partial`` and are promoted
    into the output directory together, manifest last."""

    def __init__(self, output_dir: Path):
        self.final = Path(output_dir)
        self.staging = self.final.parent / (self.final.name + ".partial")
        if self.staging.exists():
            shutil.rmtree(self.staging)
        self.staging.mkdir(parents=True)
        self.written: list[str] = []

    def path(self, name: str) -> Path:
        self.written.append(name)
        return self.staging / name

    def existing(self, name: str) -> Path:
        return self.final / name

    def promote(self, manifest_updates: dict) -> None:
        manifest = {}
        manifest_path = self.final / MANIFEST
        if manifest_path.exists():
            manifest = json.loads(manifest_path.read_text(encoding="utf-8"))
        files = manifest.setdefault("files", {})
        for name in self.written:
            digest = hashlib.sha256((self.staging / name).read_bytes()).hexdigest()
            files[name] = f"sha256:{digest}"
        for key, value in manifest_updates.items():
            manifest[key] = value
        self.final.mkdir(parents=True, exist_ok=True)
        for name in self.written:
            os.replace(self.staging / name, self.final / name)
        staged_manifest = self.staging / MANIFEST
        staged_manifest.write_text(
            json.dumps(manifest, indent=2, sort_keys=True) + "\n", encoding="utf-8"
        )
        os.replace(staged_manifest, manifest_path)
        shutil.rmtree(self.staging, ignore_errors=True)


def _load_corpus(cfg: PipelineConfig) -> tuple[PublicationTable, EdgeList]:
    if cfg.publications is None or cfg.citations is None:
        raise ConfigError("publications and citations input paths are required")
    t0 = time.monotonic()
    pubs = load_publications(cfg.publications, cfg.load_config())
    edges = load_citations(cfg.citations, pubs, cfg.unknown_policy())
    logger.info(
        "loaded %d publications (%d outside year window) and %d relations in %.2fs",
        pubs.n, pubs.rejected_years, edges.kept, time.monotonic() - t0,
    )
    return pubs, edges


def _loader_counters(pubs: PublicationTable, edges: EdgeList) -> dict:
    return {
        "publications": pubs.n,
        "rejected_years": pubs.rejected_years,
        "edges_kept": edges.kept,
        "self_loops_dropped": edges.self_loops_dropped,
        "duplicates_dropped": edges.duplicates_dropped,
        "unknown_skipped": edges.unknown_skipped,
    }


def _graph_for(cfg: PipelineConfig, ws: _Workspace, edges: EdgeList | None) -> NormalizedGraph:
    cache = ws.existing(GRAPH_CACHE)
    if cache.is_file():
        logger.info("using graph cache %s", cache)
        return load_graph_cache(cache)
    if edges is None:
        raise DataError("no graph cache found and no citation input configured")
    return build_relatedness(edges)


# ---------------------------------------------------------------------------
# commands

def run_build_graph(cfg: PipelineConfig) -> None:
    ws = _Workspace(cfg.output_dir)
    pubs, edges = _load_corpus(cfg)
    t0 = time.monotonic()
    graph = build_relatedness(edges)
    save_graph_cache(graph, ws.path(GRAPH_CACHE))
    logger.info("built graph (%d nodes, %d entries) in %.2fs", graph.n, graph.nnz, time.monotonic() - t0)
    ws.promote({"load": _loader_counters(pubs, edges)})


def _cluster(cfg: PipelineConfig, ws: _Workspace, pubs: PublicationTable, graph: NormalizedGraph) -> Hierarchy:
    params = cfg.hierarchy_params()
    t0 = time.monotonic()
    hier = build_hierarchy(graph, params, threads=cfg.threads)
    logger.info("hierarchy built in %.2fs (%d of %d excluded)",
                time.monotonic() - t0, hier.excluded_count, hier.n)
    write_assignment(hier, pubs, ws.path(ASSIGNMENT))
    write_excluded(hier, pubs, ws.path(EXCLUDED))
    return hier


def _cluster_manifest(cfg: PipelineConfig, hier: Hierarchy) -> dict:
    return {
        "run": {
            "seed": cfg.seed,
            "levels": cfg.levels,
            "resolution": list(cfg.resolution),
            "min_size": list(cfg.min_size),
            "runs": list(cfg.runs),
            "base_seeds": {
                f"level_{l}": hier.params.seed_for_level(l) for l in range(1, cfg.levels + 1)
            },
        },
        "quality": {f"level_{res.level}": res.best_quality for res in hier.levels},
        "areas": {f"level_{res.level}": int(res.area_sizes.size) for res in hier.levels},
        "excluded": hier.excluded_count,
    }


def run_cluster(cfg: PipelineConfig) -> None:
    ws = _Workspace(cfg.output_dir)
    pubs, edges = _load_corpus(cfg)
    graph = _graph_for(cfg, ws, edges)
    hier = _cluster(cfg, ws, pubs, graph)
    updates = _cluster_manifest(cfg, hier)
    updates["load"] = _loader_counters(pubs, edges)
    ws.promote(updates)


def _require(ws: _Workspace, name: str, hint: str) -> Path:
    path = ws.existing(name)
    if not path.is_file():
        raise DataError(f"{path} not found: run '{hint}' first")
    return path


def run_label(cfg: PipelineConfig) -> None:
    ws = _Workspace(cfg.output_dir)
    if cfg.publications is None:
        raise ConfigError("publications input path is required")
    pubs = load_publications(cfg.publications, cfg.load_config())
    paths = read_path_table(_require(ws, ASSIGNMENT, "cluster"), _require(ws, EXCLUDED, "cluster"), pubs)
    t0 = time.monotonic()
    labels = label_hierarchy(pubs, paths, cfg.label_params())
    logger.info("labeled %d areas in %.2fs", len(labels), time.monotonic() - t0)
    write_labels(labels, ws.path(LABELS))
    ws.promote({})


def _journal_slug(journal: str) -> str:
    return re.sub(r"[^a-z0-9]+", "_", journal.lower()).strip("_") or "journal"


def _analyze(
    cfg: PipelineConfig,
    ws: _Workspace,
    pubs: PublicationTable,
    edges: EdgeList,
    paths: PathTable,
    labels: dict[tuple[int, ...], AreaLabelSet],
) -> None:
    term_map = {path: [t for t, _ in lset.terms] for path, lset in labels.items()}
    for level in range(1, paths.L + 1):
        dist = analysis.size_distribution(paths, level)
        analysis.write_size_distribution(dist, ws.path(f"sizes_L{level}.tsv"))
        figures.plot_size_distribution(dist, ws.path(f"sizes_L{level}.png"))
        hot = analysis.hot_areas(paths, pubs, level, top_n=cfg.hot_top_n, labels=term_map)
        analysis.write_hot_areas(hot, ws.path(f"hot_L{level}.tsv"))
        _print_level_summary(dist, hot)
    stats = analysis.exclusion_stats(paths, pubs)
    analysis.write_exclusion_stats(stats, ws.path("exclusions.tsv"))
    figures.plot_exclusion_years(stats, ws.path("exclusions.png"))
    print(f"excluded {stats.excluded_total} of {stats.total} publications "
          f"({100.0 * stats.excluded_total / max(stats.total, 1):.1f}%), "
          f"{100.0 * stats.no_relation_share:.1f}% of them relation-free")
    if cfg.overlap_area:
        area = tuple(int(x) for x in cfg.overlap_area.split("."))
        rows = analysis.category_overlap(paths, pubs, len(area), area)
        analysis.write_category_overlap(rows, ws.path(f"overlap_{cfg.overlap_area}.tsv"))
    if cfg.journal:
        jd = analysis.journal_distribution(paths, pubs, cfg.journal, paths.L, edges)
        if not jd.found:
            logger.warning("journal %r has no publications in the corpus", cfg.journal)
        analysis.write_journal_distribution(jd, ws.path(f"journal_{_journal_slug(cfg.journal)}.tsv"))


def _print_level_summary(dist: analysis.SizeDistribution, hot: list[analysis.AreaReport]) -> None:
    print(f"level {dist.level}: {len(dist.areas)} areas, sizes "
          f"min={dist.min} mean={dist.mean:.1f} max={dist.max}")
    for rep in hot[:3]:
        extras = "; ".join(rep.terms[:5]) or "; ".join(j for j, _ in rep.top_journals)
        print(f"  {rep.path_str:<10} {rep.size:>7} pubs  avg year {rep.average_year:.1f}  {extras}")


def run_analyze(cfg: PipelineConfig) -> None:
    ws = _Workspace(cfg.output_dir)
    pubs, edges = _load_corpus(cfg)
    paths = read_path_table(_require(ws, ASSIGNMENT, "cluster"), _require(ws, EXCLUDED, "cluster"), pubs)
    labels_path = ws.existing(LABELS)
    labels = read_labels(labels_path) if labels_path.is_file() else {}
    _analyze(cfg, ws, pubs, edges, paths, labels)
    ws.promote({})


def run_all(cfg: PipelineConfig) -> None:
    ws = _Workspace(cfg.output_dir)
    pubs, edges = _load_corpus(cfg)
    graph = build_relatedness(edges)
    save_graph_cache(graph, ws.path(GRAPH_CACHE))
    hier = _cluster(cfg, ws, pubs, graph)
    labels = label_hierarchy(pubs, hier, cfg.label_params())
    write_labels(labels, ws.path(LABELS))
    _analyze(cfg, ws, pubs, edges, hier.paths, labels)
    updates = _cluster_manifest(cfg, hier)
    updates["load"] = _loader_counters(pubs, edges)
    ws.promote(updates)


COMMANDS = {
    "build-graph": run_build_graph,
    "cluster": run_cluster,
    "label": run_label,
    "analyze": run_analyze,
    "all": run_all,
}
