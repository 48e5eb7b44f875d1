"""Consolidated summary over a directory of run outputs."""
from __future__ import annotations

import json
import logging
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Dict, List, Tuple

from ..io.export import write_csv

logger = logging.getLogger(__name__)

COLUMNS = ("run", "command", "model", "lambda0", "c1", "c2", "gamma_bound", "tv_slack", "verdict")
INCOMPLETE = "incomplete"


@dataclass(frozen=True)
class ReportSummary:
    rows: Tuple[Tuple[Any, ...], ...]

    @property
    def incomplete(self) -> int:
        return sum(row[-1] == INCOMPLETE for row in self.rows)


def _row(name: str, manifest: Dict[str, Any]) -> Tuple[Any, ...]:
    summary = manifest.get("summary", {})
    return (
        name,
        manifest.get("command", ""),
        summary.get("model", ""),
        summary.get("lambda0"),
        summary.get("c1"),
        summary.get("c2"),
        summary.get("gamma_bound"),
        summary.get("tv_slack"),
        manifest.get("verdict", ""),
    )


def collect_runs(results_dir: Path) -> ReportSummary:
    """One row per run directory; directories without a readable manifest are incomplete."""

    results_dir = Path(results_dir)
    candidates: List[Path] = []
    if (results_dir / "manifest.json").is_file():
        candidates.append(results_dir)
    candidates.extend(sorted(path for path in results_dir.iterdir() if path.is_dir()))
    rows = []
    for directory in candidates:
        name = "." if directory == results_dir else directory.name
        try:
            manifest = json.loads((directory / "manifest.json").read_text(encoding="utf-8"))
        except (OSError, json.JSONDecodeError) as exc:
            logger.info("run %s has no usable manifest: %s", name, exc)
            rows.append((name, "", "", None, None, None, None, None, INCOMPLETE))
            continue
        rows.append(_row(name, manifest))
    return ReportSummary(rows=tuple(rows))


def _text(value: Any) -> str:
    if value is None:
        return "-"
    if isinstance(value, float):
        return format(value, ".6g")
    return str(value)


def write_report(results_dir: Path, out: Path) -> ReportSummary:
    summary = collect_runs(results_dir)
    write_csv(Path(out) / "summary.csv", COLUMNS, summary.rows)
    widths = [max([len(column)] + [len(_text(row[index])) for row in summary.rows]) for index, column in enumerate(COLUMNS)]
    lines = ["  ".join(column.ljust(width) for column, width in zip(COLUMNS, widths))]
    for row in summary.rows:
        lines.append("  ".join(_text(value).ljust(width) for value, width in zip(row, widths)))
    (Path(out) / "summary.txt").write_text("\n".join(lines) + "\n", encoding="utf-8")
    return summary
