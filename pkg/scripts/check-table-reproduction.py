#!/usr/bin/env python3
"""
Validation: published tables on berlin52 prefixes.

Default (a few minutes at most):
1. Model-size table for n = 5..15 against expected_tables.yaml.
2. Exact solve table for n = 5..10, all four variants (OF within 0.01).
3. CPA and CILP objectives agree on every exact row.

With --slow:
4. Model-size table and exact CPA optima up to n = 45.
5. Annealing on CPA+CAF, n = 5..7: the optimum in at least 4 of 5 runs;
   n = 8: GAP <= 2% in at least 3 of 5 runs.
6. Hybrid emulation on CPA+CAF, n = 12, 15, 20, 25: a tour within 2% in 5 of 5 runs.
"""

from pathlib import Path

from check_support import BERLIN52, SLOW, berlin, check, finish, section

from app.cutting.cpa_engine import Backend, CpaConfig, Outcome, run_cpa
from app.experiments.commands import cmd_complexity, cmd_solve
from app.experiments.spec import ALL_VARIANTS, ExperimentSpec, Variant
from app.experiments.table_check import (
    check_complexity,
    check_solve,
    expected_optimum,
    load_expected,
    report,
)

EXPECTED = load_expected()
RUNS = 5
SEED = 42

section("model-size table")
sizes = tuple(range(5, 16)) + ((20, 25, 30, 35, 40, 45) if SLOW else ())
complexity = cmd_complexity(ExperimentSpec(instance_path=Path(BERLIN52), sizes=sizes))
check(report(check_complexity(complexity, EXPECTED)) == 0, f"Var / Constr for n = {sizes[0]}..{sizes[-1]}")

section("exact solve table")
solve = cmd_solve(ExperimentSpec(instance_path=Path(BERLIN52), sizes=tuple(range(5, 11)),
                                 variants=ALL_VARIANTS))
check(report(check_solve(solve, EXPECTED)) == 0, "OF of every exact row")
by_key = {(row["n"], row["variant"]): row["of_avg"] for row in solve.rows}
same = all(
    by_key[(n, f"cilp+{f}")] is not None
    and abs(by_key[(n, f"cilp+{f}")] - by_key[(n, f"cpa+{f}")]) < 1e-6
    for n in range(5, 11) for f in ("caf", "no_caf")
)
check(same, "CPA = CILP on every exact row")

if SLOW:
    section("exact optima up to n = 45")
    large = tuple(range(11, 16)) + (20, 25, 30, 35, 40, 45)
    cpa_only = (Variant("cpa", False), Variant("cpa", True))
    big = cmd_solve(ExperimentSpec(instance_path=Path(BERLIN52), sizes=large, variants=cpa_only))
    check(report(check_solve(big, EXPECTED)) == 0, "OF of every exact CPA row")

    section("annealing, CPA+CAF")
    for n in (5, 6, 7, 8):
        optimum = expected_optimum(EXPECTED, n, caf=True)
        instance = berlin(n, caf=True)
        gaps = []
        for r in range(RUNS):
            trace = run_cpa(instance, CpaConfig(backend=Backend.ANNEAL, seed=SEED + r, sweeps=2000))
            if trace.objective is not None:
                gaps.append((trace.objective - optimum) / optimum * 100.0)
        if n < 8:
            hits = sum(1 for g in gaps if g < 0.01)
            check(hits >= 4, f"n={n}: optimum in {hits}/{RUNS} runs")
        else:
            close = sum(1 for g in gaps if g <= 2.0)
            check(close >= 3, f"n={n}: GAP <= 2% in {close}/{RUNS} runs")

    section("hybrid emulation, CPA+CAF")
    for n in (12, 15, 20, 25):
        optimum = expected_optimum(EXPECTED, n, caf=True)
        instance = berlin(n, caf=True)
        good = 0
        for r in range(RUNS):
            trace = run_cpa(instance, CpaConfig(backend=Backend.HYBRID, seed=SEED + r))
            if trace.outcome is Outcome.FEASIBLE_TOUR and trace.objective <= optimum * 1.02:
                good += 1
        check(good == RUNS, f"n={n}: tour within 2% in {good}/{RUNS} runs")

finish("Table reproduction")
