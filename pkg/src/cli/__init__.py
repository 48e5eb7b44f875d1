"""Command line entry points."""

from .commands import HANDLERS, RunState, run
from .config import COMMANDS, RunConfig, config_hash, resolve_threads
from .main import build_parser, main
from .report import ReportSummary, collect_runs, write_report

__all__ = [
    "COMMANDS",
    "HANDLERS",
    "ReportSummary",
    "RunConfig",
    "RunState",
    "build_parser",
    "collect_runs",
    "config_hash",
    "main",
    "resolve_threads",
    "run",
    "write_report",
]
