"""Writers for result files.

Every float goes through :func:`format_float` (``%.17g``) so that a value
read back from CSV is the same double that was written.
"""
from __future__ import annotations

import csv
import json
import math
from pathlib import Path
from typing import Any, Iterable, Sequence

import numpy as np


def format_float(value: float) -> str:
    value = float(value)
    if math.isnan(value):
        return "nan"
    if math.isinf(value):
        return "inf" if value > 0 else "-inf"
    return format(value, ".17g")


def _cell(value: Any) -> str:
    if isinstance(value, (bool, np.bool_)):
        return "true" if value else "false"
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        return format_float(value)
    return "" if value is None else str(value)


def write_csv(path: Path, header: Sequence[str], rows: Iterable[Sequence[Any]]) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", newline="", encoding="utf-8") as handle:
        writer = csv.writer(handle, lineterminator="\n")
        writer.writerow(header)
        for row in rows:
            writer.writerow([_cell(value) for value in row])
    return path


def write_json(path: Path, payload: Any) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n", encoding="utf-8")
    return path


def read_json(path: Path) -> Any:
    return json.loads(Path(path).read_text(encoding="utf-8"))


PLOT_SCRIPT = '''"""Plots the CSV files of this run directory (needs matplotlib)."""
import csv
import sys
from pathlib import Path

import matplotlib.pyplot as plt

PLOTS = {{
{entries}
}}


def _columns(path):
    with open(path, newline="") as handle:
        rows = list(csv.DictReader(handle))
    return {{key: [float(row[key]) for row in rows] for key in rows[0]}} if rows else {{}}


def main(directory="."):
    for name, (x, ys, log_y) in PLOTS.items():
        path = Path(directory) / name
        if not path.exists():
            continue
        data = _columns(path)
        figure, axis = plt.subplots()
        for y in ys:
            axis.plot(data[x], data[y], label=y)
        if log_y:
            axis.set_yscale("log")
        axis.set_xlabel(x)
        axis.legend()
        figure.savefig(path.with_suffix(".png"), dpi=150)
        plt.close(figure)


if __name__ == "__main__":
    main(*sys.argv[1:])
'''


def write_plot_script(directory: Path, plots: dict) -> Path:
    """Emit ``plot_results.py`` for ``{csv_name: (x, [y...], log_y)}``."""

    entries = "\n".join(f"    {name!r}: ({x!r}, {list(ys)!r}, {log_y!r})," for name, (x, ys, log_y) in sorted(plots.items()))
    path = Path(directory) / "plot_results.py"
    path.write_text(PLOT_SCRIPT.format(entries=entries), encoding="utf-8")
    return path
