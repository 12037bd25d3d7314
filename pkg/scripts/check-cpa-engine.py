#!/usr/bin/env python3
"""
Validation: cutting-plane engine, run statistics and trace export.

Tests:
1. Subtour detection and cut generation (dedup, full set, existing cuts).
2. Exact CPA reaches the published optima, with and without CAF; with
   --slow, exact CPA+CAF at n = 30..45 finishes within ten minutes each.
3. CPA and CILP agree on the exact backend for small n.
4. Iteration cap: ceil(n/2) by default, IterationLimit when it binds.
5. Every iteration cuts exactly the cycles of its solution.
6. GAP / feasibility statistics.
7. Trace JSON validates against the schema; without timings it is byte-stable.
8. Anneal and hybrid backends on small instances, including multi-cut
   QUBOs at n=7.
"""

import json
import time
from dataclasses import replace

import jsonschema

from check_support import SLOW, berlin, check, finish, raises, section

from app.cutting.cpa_engine import (
    Backend,
    CpaConfig,
    NotDegreeFeasible,
    Outcome,
    cuts_from_subtours,
    detect_subtours,
    gap_and_feasibility,
    run_cilp,
    run_cpa,
)
from app.cutting.trace_codec import trace_to_dict, trace_to_json, validate_trace
from app.model.domain import RestrictedModel
from app.model.formulation import evaluate
from app.solvers.annealer import ReadSchedule
from app.solvers.hybrid import HybridSettings

OPTIMA = {5: 2314.55, 6: 2315.15, 7: 2321.39, 8: 2550.94, 9: 2820.38, 10: 2826.50,
          11: 4038.44, 12: 4056.68, 13: 4564.46, 14: 4946.85, 15: 4967.30}
CAF_OPTIMA = {6: 2323.20, 9: 2874.44, 14: 4965.33}
UNCAPPED = CpaConfig(max_iterations=100)

section("separation")
model5 = RestrictedModel(instance=berlin(5))
split = evaluate(model5, [(1, 2), (2, 3), (3, 1), (4, 5), (5, 4)])
subtours = detect_subtours(split, 5)
check(subtours == [frozenset({1, 2, 3}), frozenset({4, 5})], "two subtours, ordered by smallest vertex")
cuts = cuts_from_subtours(subtours, 5)
check([c.subset for c in cuts] == subtours and [c.rhs for c in cuts] == [2, 1], "one SEC per subtour")
check(len(cuts_from_subtours(subtours, 5, existing=frozenset({frozenset({4, 5})}))) == 1,
      "existing cuts are skipped")
check(cuts_from_subtours([{1, 2, 3, 4, 5}], 5) == [], "the full vertex set is never a cut")
check(len(cuts_from_subtours([{1, 2}, {2, 1}], 5)) == 1, "repeated subsets are cut once")
broken = evaluate(model5, [(1, 2), (2, 1)])
check(raises(NotDegreeFeasible, detect_subtours, broken, 5), "degree-infeasible input is rejected")

section("exact CPA optima")
cpa_max = 15 if SLOW else 12
for n in range(5, cpa_max + 1):
    trace = run_cpa(berlin(n), UNCAPPED)
    check(trace.outcome is Outcome.OPTIMAL and abs(trace.objective - OPTIMA[n]) < 0.01,
          f"n={n}: {trace.objective} after {trace.iteration_count} iterations (expected {OPTIMA[n]:.2f})")
for n, want in CAF_OPTIMA.items():
    if n > cpa_max:
        continue
    trace = run_cpa(berlin(n, caf=True), UNCAPPED)
    check(trace.outcome is Outcome.OPTIMAL and abs(trace.objective - want) < 0.01,
          f"n={n} CAF: {trace.objective} (expected {want:.2f})")
if SLOW:
    # the default cap of ceil(n/2) iterations, as in the solve tables
    for n in (30, 35, 40, 45):
        started = time.perf_counter()
        large = run_cpa(berlin(n, caf=True), CpaConfig())
        took = time.perf_counter() - started
        check(large.outcome in (Outcome.OPTIMAL, Outcome.ITERATION_LIMIT) and took < 600.0,
              f"n={n} CAF: exact CPA in {took:.1f}s, {large.iteration_count} iterations")

section("CPA = CILP")
for n in range(5, 9):
    cpa = run_cpa(berlin(n), UNCAPPED)
    cilp = run_cilp(berlin(n), Backend.EXACT)
    check(cilp.outcome is Outcome.OPTIMAL and abs(cpa.objective - cilp.objective) < 1e-6,
          f"n={n}: CPA {cpa.objective:.2f} = CILP {cilp.objective:.2f}")
    check(cilp.initial_cuts == 2 ** n - 2 - n and cilp.total_cuts == 0 and cilp.iteration_count == 1,
          f"n={n}: CILP starts with every SEC")

section("iteration cap")
check(CpaConfig().iteration_cap(9) == 5 and CpaConfig().iteration_cap(10) == 5, "cap is ceil(n/2)")
check(CpaConfig(max_iterations=3).iteration_cap(40) == 3, "explicit cap wins")
check(raises(ValueError, CpaConfig, Backend.EXACT, 0), "cap 0 is rejected")
check(CpaConfig(backend=Backend.HYBRID).budget == 5.0 and CpaConfig().budget is None,
      "hybrid budget defaults to 5 s, exact runs unbounded")
one = run_cpa(berlin(12), CpaConfig(max_iterations=1))
check(one.outcome is Outcome.ITERATION_LIMIT and one.iteration_count == 1, "cap 1 on n=12 stops early")
check(one.objective is None and one.tour is None and one.total_cuts >= 2,
      "no objective without a tour, cuts are still reported")

section("cuts per iteration")
trace10 = run_cpa(berlin(10), UNCAPPED)
per_iteration = True
seen = set()
for it in trace10.iterations[:-1]:
    cycles = detect_subtours(it.solution, 10)
    per_iteration &= [c.subset for c in it.cuts_added] == cycles
    per_iteration &= not (seen & set(cycles))
    seen.update(cycles)
check(per_iteration, "each iteration cuts its own cycles, never twice")
check(trace10.iterations[-1].cuts_added == () and trace10.final_solution.is_tour, "last iteration is a tour")
check(trace10.tour[0] == 1 and sorted(trace10.tour) == list(range(1, 11)), "tour visits every vertex from 1")
check(trace10.total_reads == 0 and trace10.solver_modeled_us == 0, "exact backend uses no reads")
check(trace10.total_time >= trace10.solve_time >= 0.0, "solve time is part of the total")

section("gap and feasibility")
base = run_cpa(berlin(6), UNCAPPED)
opt = base.objective
last = base.iterations[-1]
worse = replace(base, iterations=(replace(last, solution=replace(last.solution, objective=opt * 1.1)),))
missing = replace(base, outcome=Outcome.NO_FEASIBLE)
gf = gap_and_feasibility([base, worse, missing], opt)
check(gf.gaps[0] == 0.0 and abs(gf.gaps[1] - 10.0) < 1e-9 and gf.gaps[2] is None, "per-run gaps")
check(abs(gf.gap_avg - 5.0) < 1e-9 and abs(gf.feas_pct - 200.0 / 3.0) < 1e-9,
      "gap over feasible runs, feasibility over all runs")
none_found = gap_and_feasibility([missing], opt)
check(none_found.gap_avg is None and none_found.feas_pct == 0.0, "no tour: no gap")
check(gap_and_feasibility([], opt).feas_pct == 0.0, "no runs")
check(raises(ValueError, gap_and_feasibility, [base], 0.0), "optimum must be positive")

section("trace export")
doc = json.loads(trace_to_json(trace10))
check(doc["outcome"] == "Optimal" and doc["formulation"] == "cpa" and doc["backend"] == "exact",
      "trace header")
check(len(doc["iterations"]) == trace10.iteration_count and "time" in doc["iterations"][0],
      "one entry per iteration, timings included")
stable_a = trace_to_json(run_cpa(berlin(9), UNCAPPED), include_timings=False)
stable_b = trace_to_json(run_cpa(berlin(9), UNCAPPED), include_timings=False)
check(stable_a == stable_b, "same run without timings: identical bytes")
check('"time"' not in stable_a, "timings omitted")
bad = trace_to_dict(trace10)
bad["extra"] = 1
check(raises(jsonschema.ValidationError, validate_trace, bad), "unknown top-level keys are rejected")
cilp_doc = trace_to_dict(run_cilp(berlin(5), Backend.EXACT))
validate_trace(cilp_doc)
check(cilp_doc["initial_cuts"] == 25 and cilp_doc["formulation"] == "cilp", "CILP trace")

section("anneal backend")
annealed = run_cpa(berlin(5), CpaConfig(backend=Backend.ANNEAL, sweeps=300, seed=3))
first = annealed.iterations[0]
check(first.num_reads_used == 1000, "first iteration uses 1000 reads")
check(annealed.solver_modeled_us == 215 * annealed.total_reads, "modelled QPU time is 215 us per read")
check(annealed.objective is None or annealed.objective >= OPTIMA[5] - 1e-6,
      "an annealed tour never beats the optimum")
check(annealed.outcome is not Outcome.OPTIMAL, "annealing never claims optimality")
validate_trace(trace_to_dict(annealed))
again = run_cpa(berlin(5), CpaConfig(backend=Backend.ANNEAL, sweeps=300, seed=3))
check(trace_to_json(annealed, include_timings=False) == trace_to_json(again, include_timings=False),
      "same seed: identical anneal trace")
cilp_anneal = run_cilp(berlin(5), Backend.ANNEAL, CpaConfig(backend=Backend.ANNEAL, sweeps=300), cuts_max=4)
check(cilp_anneal.iterations[0].num_reads_used == 1400, "CILP reads follow |C|_max")

section("anneal backend, n=7")
quick = CpaConfig(backend=Backend.ANNEAL, sweeps=20, seed=11, max_iterations=4,
                  read_schedule=ReadSchedule(n_start=32, per_cut=8))
annealed7 = run_cpa(berlin(7, caf=True), quick)
check(annealed7.iteration_count >= 1 and annealed7.iterations[0].num_reads_used == 32,
      "n=7 CAF anneal CPA runs with a short schedule")
check(annealed7.objective is None or annealed7.objective >= OPTIMA[7] - 1e-6, "never below the optimum")
added = [c.subset for it in annealed7.iterations for c in it.cuts_added]
check(len(added) == len(set(added)), "no cut is added twice")
cilp7 = run_cilp(berlin(7, caf=True), Backend.ANNEAL, quick, cuts_max=2)
check(cilp7.initial_cuts == 119 and cilp7.iterations[0].num_reads_used == 48,
      "n=7 CILP: the 119-cut QUBO anneals")

section("hybrid emulation")
hybrid_cfg = CpaConfig(backend=Backend.HYBRID, seed=5, hybrid=HybridSettings(max_rounds=2))
hybrid = run_cilp(berlin(6), Backend.HYBRID, hybrid_cfg)
check(hybrid.outcome is Outcome.FEASIBLE_TOUR, "hybrid finds a tour on n=6")
check(hybrid.objective is not None and hybrid.objective >= OPTIMA[6] - 1e-6, "never below the optimum")
check(hybrid.total_reads in (32, 64), "32 anneal reads per round")
hybrid_cpa = run_cpa(berlin(7), hybrid_cfg)
check(hybrid_cpa.outcome in (Outcome.FEASIBLE_TOUR, Outcome.ITERATION_LIMIT), "hybrid CPA ends")
check(all(it.solution is not None for it in hybrid_cpa.iterations), "every hybrid iteration has a permutation")
hybrid7 = run_cilp(berlin(7), Backend.HYBRID, hybrid_cfg)
check(hybrid7.initial_cuts == 119 and hybrid7.total_reads in (32, 64), "hybrid n=7 CILP samples its QUBO")
check(hybrid7.objective is None or hybrid7.objective >= OPTIMA[7] - 1e-6, "hybrid CILP never below the optimum")

finish("CPA engine")
