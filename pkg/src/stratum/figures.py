"""Rendering of report figures to PNG files.

Uses the Agg backend and writes with fixed metadata so reruns on the same
machine produce byte-identical files (the determinism contract covers the
whole output tree, figures included).
"""

from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

from .analysis import ExclusionStats, SizeDistribution

_SAVE_KW = {"dpi": 150, "metadata": {"Software": "stratum"}}


def plot_size_distribution(dist: SizeDistribution, path: str | Path) -> None:
    """Rank-size view of the areas at one level (log y when sizes spread)."""
    sizes = dist.sizes
    fig, ax = plt.subplots(figsize=(7, 4))
    if sizes.size:
        ranks = np.arange(1, sizes.size + 1)
        ax.bar(ranks, sizes, width=0.9, color="#33658a", linewidth=0)
        if dist.min > 0 and dist.max / max(dist.min, 1) > 50:
            ax.set_yscale("log")
    ax.set_xlabel("area rank")
    ax.set_ylabel("publications")
    ax.set_title(f"{sizes.size} areas at level {dist.level}")
    fig.tight_layout()
    fig.savefig(path, **_SAVE_KW)
    plt.close(fig)


def plot_exclusion_years(stats: ExclusionStats, path: str | Path) -> None:
    """Percentage of excluded publications per publication year."""
    fig, ax = plt.subplots(figsize=(7, 4))
    if stats.per_year:
        years = [row[0] for row in stats.per_year]
        pcts = [row[3] for row in stats.per_year]
        ax.bar(years, pcts, color="#86bbd8", linewidth=0)
        ax.set_xticks(years)
    ax.set_xlabel("publication year")
    ax.set_ylabel("excluded (%)")
    ax.set_title("Excluded publications per year")
    fig.tight_layout()
    fig.savefig(path, **_SAVE_KW)
    plt.close(fig)
