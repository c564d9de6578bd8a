"""Flat key = value pipeline configuration.

One setting per line, `#` starts a comment line, lists are comma-separated.
Command-line flags override the file, which overrides the built-in defaults.
The built-in clustering defaults are sized for a full multi-million corpus;
the shipped example configs scale them down for desk-size data.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from pathlib import Path

from .errors import ConfigError
from .hierarchy import HierarchyParams
from .labeling import DEFAULT_STOPWORDS, LabelParams, load_stopwords
from .corpus import LoadConfig, UnknownIdPolicy


@dataclass(frozen=True)
class PipelineConfig:
    publications: Path | None = None
    citations: Path | None = None
    output_dir: Path = Path("out")
    levels: int = 3
    resolution: tuple[float, ...] = (8e-8, 2e-6, 5e-5)
    min_size: tuple[int, ...] = (120_000, 5_000, 50)
    runs: tuple[int, ...] = (10_000, 10_000, 500)
    seed: int = 0
    threads: int = 1
    min_year: int | None = None
    max_year: int | None = None
    unknown_ids: str = "skip"
    smoothing: int = 25
    top_k: int = 5
    dedup_threshold: float = 0.66
    max_ngram: int = 3
    min_term_len: int = 2
    stopwords: Path | None = None
    hot_top_n: int = 10
    journal: str = ""
    overlap_area: str = ""

    def hierarchy_params(self) -> HierarchyParams:
        return HierarchyParams(self.resolution, self.min_size, self.runs, self.seed)

    def label_params(self) -> LabelParams:
        words = load_stopwords(self.stopwords) if self.stopwords else DEFAULT_STOPWORDS
        return LabelParams(
            smoothing=self.smoothing,
            top_k=self.top_k,
            dedup_threshold=self.dedup_threshold,
            min_term_len=self.min_term_len,
            max_ngram=self.max_ngram,
            stopwords=words,
        )

    def load_config(self) -> LoadConfig:
        return LoadConfig(min_year=self.min_year, max_year=self.max_year)

    def unknown_policy(self) -> UnknownIdPolicy:
        try:
            return UnknownIdPolicy(self.unknown_ids)
        except ValueError:
            raise ConfigError(f"unknown_ids must be 'skip' or 'strict', got {self.unknown_ids!r}") from None

    def validate(self) -> "PipelineConfig":
        if self.levels != len(self.resolution):
            raise ConfigError(
                f"levels={self.levels} but {len(self.resolution)} resolutions given"
            )
        self.hierarchy_params().validate()
        self.label_params().validate()
        self.unknown_policy()
        if self.threads < 1:
            raise ConfigError("threads must be >= 1")
        if self.hot_top_n < 1:
            raise ConfigError("hot_top_n must be >= 1")
        return self


_PATH_KEYS = {"publications", "citations", "output_dir", "stopwords"}
_INT_KEYS = {"levels", "seed", "threads", "min_year", "max_year", "smoothing",
             "top_k", "max_ngram", "min_term_len", "hot_top_n"}
_FLOAT_KEYS = {"dedup_threshold"}
_INT_LIST_KEYS = {"min_size", "runs"}
_FLOAT_LIST_KEYS = {"resolution"}
_STR_KEYS = {"unknown_ids", "journal", "overlap_area"}
_ALL_KEYS = _PATH_KEYS | _INT_KEYS | _FLOAT_KEYS | _INT_LIST_KEYS | _FLOAT_LIST_KEYS | _STR_KEYS


def parse_config_file(path: str | Path) -> dict[str, str]:
    """Raw key -> value strings from a config file."""
    path = Path(path)
    if not path.is_file():
        raise ConfigError(f"config file not found: {path}")
    values: dict[str, str] = {}
    for lineno, line in enumerate(path.read_text(encoding="utf-8").splitlines(), start=1):
        stripped = line.strip()
        if not stripped or stripped.startswith("#"):
            continue
        if "=" not in stripped:
            raise ConfigError(f"{path}:{lineno}: expected 'key = value'")
        key, _, value = stripped.partition("=")
        key = key.strip()
        if key not in _ALL_KEYS:
            raise ConfigError(f"{path}:{lineno}: unknown setting {key!r}")
        values[key] = value.strip()
    return values


def _convert(key: str, value: str):
    try:
        if key in _PATH_KEYS:
            return Path(value)
        if key in _INT_KEYS:
            return int(value)
        if key in _FLOAT_KEYS:
            return float(value)
        if key in _INT_LIST_KEYS:
            return tuple(int(v.strip()) for v in value.split(","))
        if key in _FLOAT_LIST_KEYS:
            return tuple(float(v.strip()) for v in value.split(","))
        return value
    except ValueError:
        raise ConfigError(f"bad value for {key}: {value!r}") from None


def build_config(file_values: dict[str, str] | None = None, overrides: dict | None = None) -> PipelineConfig:
    """Layer defaults, config-file values and explicit overrides, then validate."""
    cfg = PipelineConfig()
    merged = {}
    for key, raw in (file_values or {}).items():
        merged[key] = _convert(key, raw)
    for key, value in (overrides or {}).items():
        if value is None:
            continue
        if key not in _ALL_KEYS:
            raise ConfigError(f"unknown setting {key!r}")
        merged[key] = _convert(key, value) if isinstance(value, str) else value
    cfg = replace(cfg, **merged)
    # A shorter resolution list pins the level count when levels was not set.
    if "levels" not in merged and len(cfg.resolution) != cfg.levels:
        cfg = replace(cfg, levels=len(cfg.resolution))
        if "min_size" not in merged or "runs" not in merged:
            raise ConfigError("resolution list length changed: set min_size and runs to match")
    return cfg.validate()
