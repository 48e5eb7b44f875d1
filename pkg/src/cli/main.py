"""Argument parsing and logging setup for ``python -m src.cli``."""
from __future__ import annotations

import argparse
import logging
from typing import Optional, Sequence

from ..io.ingest import ConfigError
from .commands import run
from .config import COMMANDS, DEFAULT_TOL, RunConfig

logger = logging.getLogger(__name__)

LOG_FORMAT = "%(asctime)s [%(filename)s:%(lineno)s] %(message)s"


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="qsdlab",
        description="Quasi-stationary distributions, mixing certificates and transport simulations.",
    )
    parser.add_argument("command", choices=COMMANDS, help="What to run.")
    parser.add_argument("--config", help="JSON model/run file (every command except report).")
    parser.add_argument("--out", required=True, help="Output directory.")
    parser.add_argument("--results", help="Directory of runs to summarise (report; defaults to --out).")
    parser.add_argument("--seed", type=int, help="Unsigned 64-bit seed; overrides the file's seed.")
    parser.add_argument("--threads", type=int, help="Worker threads (fallback: $QSDLAB_THREADS, then 1).")
    parser.add_argument("--tol", type=float, default=DEFAULT_TOL, help="Eigen-residual tolerance.")
    parser.add_argument("--verbose", action="store_true", help="Log at DEBUG level.")
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.INFO, format=LOG_FORMAT)
    try:
        config = RunConfig.from_args(args)
    except ConfigError as exc:
        logger.error("%s", exc)
        return 1
    return run(config)
