"""Command-line entry point.

Subcommands: build-graph, cluster, label, analyze, all. Settings come from
built-in defaults, then the config file (--config), then explicit flags;
--threads additionally falls back to the STRATUM_THREADS environment
variable. Expected failures print a single machine-readable line to stderr
(`error code=<code> message=<...>`) and exit 1.
"""

from __future__ import annotations

import argparse
import logging
import os
import sys

from .config import build_config, parse_config_file
from .errors import StratumError
from .pipeline import COMMANDS


def _parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="stratum",
        description="Build and inspect a hierarchical publication-level classification "
                    "from a citation network.",
    )
    parser.add_argument("-v", "--verbose", action="store_true", help="debug logging")
    sub = parser.add_subparsers(dest="command", required=True)
    for name, help_text in (
        ("build-graph", "build and cache the normalized relatedness graph"),
        ("cluster", "build the hierarchy and write assignment/excluded tables"),
        ("label", "derive characteristic terms per area"),
        ("analyze", "write report tables and figures"),
        ("all", "run the whole pipeline"),
    ):
        p = sub.add_parser(name, help=help_text)
        p.add_argument("--config", help="flat key = value config file")
        p.add_argument("--publications", help="publications.tsv path")
        p.add_argument("--citations", help="citations.tsv path")
        p.add_argument("--output-dir", dest="output_dir", help="output directory")
        p.add_argument("--seed", help="base RNG seed")
        p.add_argument("--threads", help="max concurrent optimizer runs "
                                         "(falls back to STRATUM_THREADS)")
        p.add_argument("--levels", help="number of hierarchy levels")
        p.add_argument("--resolution", help="comma-separated per-level resolutions")
        p.add_argument("--min-size", dest="min_size", help="comma-separated per-level minimum area sizes")
        p.add_argument("--runs", help="comma-separated per-level optimizer run counts")
        if name in ("analyze", "all"):
            p.add_argument("--journal", help="journal name for the per-journal report")
            p.add_argument("--overlap-area", dest="overlap_area",
                           help="dotted area path for the category overlap report")
            p.add_argument("--hot-top-n", dest="hot_top_n", help="areas per hot-area table")
    return parser


_FLAG_KEYS = (
    "publications", "citations", "output_dir", "seed", "threads", "levels",
    "resolution", "min_size", "runs", "journal", "overlap_area", "hot_top_n",
)


def main(argv: list[str] | None = None) -> int:
    args = _parser().parse_args(argv)
    logging.basicConfig(
        level=logging.DEBUG if args.verbose else logging.INFO,
        format="%(levelname)s %(name)s: %(message)s",
        stream=sys.stderr,
    )
    try:
        file_values = parse_config_file(args.config) if args.config else {}
        overrides = {key: getattr(args, key, None) for key in _FLAG_KEYS}
        if overrides.get("threads") is None:
            overrides["threads"] = os.environ.get("STRATUM_THREADS")
        cfg = build_config(file_values, overrides)
        COMMANDS[args.command](cfg)
    except StratumError as err:
        message = err.message.replace("\n", " ")
        print(f'error code={err.code} message="{message}"', file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
