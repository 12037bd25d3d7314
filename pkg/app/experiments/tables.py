"""Result tables: frozen column orders, cell formatting, CSV and JSON writers.

Rows are plain dicts holding raw values. None means "no value" and is shown
as "--". Floats are printed with two decimals and a dot as decimal
separator. JSON keeps the raw numbers (None -> null). Column meanings:
docs/CSV_COLUMNS.md.
"""

from __future__ import annotations

import csv
import io
import json
import math
import statistics
import sys
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Optional, Sequence

DASH = "--"

COMPLEXITY_COLUMNS: tuple[str, ...] = (
    "n",
    "var_no_caf",
    "var_caf",
    "var_reduction_pct",
    "constr_cilp",
    "constr_cpa_no_caf",
    "constr_cpa_caf",
    "constr_reduction_no_caf_pct",
    "constr_reduction_caf_pct",
)

SOLVE_COLUMNS: tuple[str, ...] = (
    "n",
    "variant",
    "backend",
    "runs",
    "of_avg",
    "of_dev",
    "time_avg",
    "time_dev",
    "build_avg",
    "build_dev",
    "comp_avg",
    "comp_dev",
    "solve_avg",
    "solve_dev",
    "iters_avg",
    "iters_dev",
    "cuts_avg",
    "cuts_dev",
    "reads_avg",
    "qpu_us_avg",
    "gap_pct",
    "feas_pct",
    "error",
)


@dataclass(frozen=True)
class Table:
    columns: tuple[str, ...]
    rows: tuple[dict[str, Any], ...]

    def column(self, name: str) -> list[Any]:
        return [row.get(name) for row in self.rows]


def round_half_up(value: float) -> int:
    """Whole-percent rounding: 19.5 -> 20, 95.38 -> 95."""
    return int(math.floor(value + 0.5))


def percent_reduction(before: Optional[float], after: Optional[float]) -> Optional[int]:
    if before is None or after is None or before == 0:
        return None
    return round_half_up((before - after) / before * 100.0)


def mean_dev(values: Sequence[float]) -> tuple[Optional[float], Optional[float]]:
    """Mean and population standard deviation; (None, None) for no values."""
    if not values:
        return None, None
    return statistics.fmean(values), statistics.pstdev(values)


def format_cell(value: Any) -> str:
    if value is None:
        return DASH
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return f"{value:.2f}"
    return str(value)


def render_csv(table: Table) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(table.columns)
    for row in table.rows:
        writer.writerow([format_cell(row.get(c)) for c in table.columns])
    return buf.getvalue()


def render_json(table: Table) -> str:
    doc = {
        "columns": list(table.columns),
        "rows": [{c: row.get(c) for c in table.columns} for row in table.rows],
    }
    return json.dumps(doc, indent=2) + "\n"


def write_table(table: Table, output: Optional[Path], fmt: str = "csv") -> Optional[Path]:
    """Write to output, or to stdout when output is None."""
    text = render_json(table) if fmt == "json" else render_csv(table)
    if output is None:
        sys.stdout.write(text)
        return None
    output = Path(output)
    output.parent.mkdir(parents=True, exist_ok=True)
    output.write_text(text, encoding="utf-8")
    return output
