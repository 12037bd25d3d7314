"""--check mode: compare emitted tables against expected_tables.yaml."""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path
from typing import Any, Optional

import yaml
from colorama import Fore, Style, init

from app.cutting.cpa_engine import Backend
from app.experiments.tables import Table, percent_reduction

EXPECTED_PATH = Path(__file__).with_name("expected_tables.yaml")


@dataclass(frozen=True)
class CheckResult:
    n: int
    column: str
    expected: Any
    actual: Any
    passed: bool
    note: str = ""


def load_expected(path: Path = EXPECTED_PATH) -> dict:
    with open(path, encoding="utf-8") as f:
        return yaml.safe_load(f)


def expected_optimum(expected: dict, n: int, caf: bool) -> Optional[float]:
    opt = expected["optimum"]
    if caf and n in opt.get("caf_differs", {}):
        return float(opt["caf_differs"][n])
    value = opt["no_caf"].get(n)
    return float(value) if value is not None else None


def _exact(n: int, column: str, expected: Any, actual: Any) -> CheckResult:
    return CheckResult(n, column, expected, actual, actual == expected)


def check_complexity(table: Table, expected: Optional[dict] = None) -> list[CheckResult]:
    expected = expected or load_expected()
    ref = expected["complexity"]
    rel = float(expected["tolerance"]["cpa_constraints_rel"])
    results: list[CheckResult] = []
    for row in table.rows:
        n = row.get("n")
        if not isinstance(n, int):
            continue
        for column in ("var_no_caf", "var_caf", "constr_cilp"):
            if n in ref.get(column, {}):
                results.append(_exact(n, column, ref[column][n], row.get(column)))
        for column in ("constr_cpa_no_caf", "constr_cpa_caf"):
            if n in ref.get(column, {}) and row.get(column) is not None:
                want = ref[column][n]
                got = row[column]
                results.append(CheckResult(
                    n, column, want, got, abs(got - want) <= rel * want,
                    note=f"+-{rel:.0%}",
                ))
        recomputed = percent_reduction(row.get("var_no_caf"), row.get("var_caf"))
        results.append(_exact(n, "var_reduction_pct", recomputed, row.get("var_reduction_pct")))
    return results


def check_solve(table: Table, expected: Optional[dict] = None) -> list[CheckResult]:
    """OF of exact-backend rows; annealing rows are hardware-dependent and skipped."""
    expected = expected or load_expected()
    tol = float(expected["tolerance"]["objective_abs"])
    results: list[CheckResult] = []
    for row in table.rows:
        if row.get("backend") != Backend.EXACT.value or row.get("of_avg") is None:
            continue
        n = row["n"]
        caf = str(row["variant"]).endswith("+caf")
        want = expected_optimum(expected, n, caf)
        if want is None:
            continue
        got = row["of_avg"]
        results.append(CheckResult(
            n, f"of_avg[{row['variant']}]", want, round(got, 2),
            abs(got - want) <= tol + 1e-9, note=f"+-{tol}",
        ))
    return results


def report(results: list[CheckResult]) -> int:
    """Print one coloured line per check; 1 if anything deviates, else 0."""
    init()
    failed = 0
    for r in results:
        if r.passed:
            print(Fore.GREEN + f"✅ n={r.n} {r.column}: {r.actual}" + Style.RESET_ALL)
        else:
            failed += 1
            print(Fore.RED + f"❌ n={r.n} {r.column}: expected {r.expected} {r.note}, got {r.actual}"
                  + Style.RESET_ALL)
    colour = Fore.RED if failed else Fore.GREEN
    print(colour + f"{len(results) - failed}/{len(results)} checks passed" + Style.RESET_ALL)
    return 1 if failed else 0
