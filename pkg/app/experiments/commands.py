"""CLI verbs: model-size table, solve table, QUBO export.

Every (n, variant, run) is an independent job executed through
service.experiment_runner, so output order never depends on the worker
count. A failing job becomes a row of "--" cells; the command goes on.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional, Sequence

from app.cutting.cpa_engine import (
    Backend,
    CpaConfig,
    CpaTrace,
    gap_and_feasibility,
    run_cilp,
    run_cpa,
)
from app.cutting.trace_codec import trace_to_json
from app.experiments.spec import ExperimentSpec, Variant
from app.experiments.tables import (
    COMPLEXITY_COLUMNS,
    SOLVE_COLUMNS,
    Table,
    mean_dev,
    percent_reduction,
)
from app.instances.tsplib_io import RawInstance, build_costs, load_tsplib, truncate
from app.model.domain import Instance, RestrictedModel, TspToolkitError
from app.model.formulation import (
    MAX_ENUMERATION_N,
    degree_constraint_count,
    enumerate_all_secs,
    sec_count_complete,
)
from app.preprocessing.caf import CafConfig, caf_filter
from app.solvers.annealer import ReadSchedule
from app.solvers.qubo_backend import to_qubo, write_qubo_file
from service.experiment_runner import ExperimentRunner

log = logging.getLogger("FULL")
imp = logging.getLogger("IMPORTANT")

LARGE_N_FROM: int = 20


def build_variant_instance(raw: RawInstance, n: int, caf: bool) -> Instance:
    """First n nodes, complete arcs, optionally CAF-reduced with k = ceil(n/2)."""
    instance = build_costs(truncate(raw, n))
    return caf_filter(instance, CafConfig.for_n(n)) if caf else instance


# ---------------------------------------------------------------------------
# Jobs
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class SolveJob:
    raw: RawInstance
    n: int
    variant: Variant
    backend: Backend
    run_index: int
    seed: int
    sweeps: int = 2000
    budget_s: Optional[float] = None
    read_schedule: ReadSchedule = field(default_factory=ReadSchedule)
    cuts_max: int = 0


@dataclass(frozen=True)
class RunSummary:
    n: int
    variant: Variant
    run_index: int
    seed: int
    trace: Optional[CpaTrace] = None
    error: Optional[str] = None

    @property
    def objective(self) -> Optional[float]:
        return self.trace.objective if self.trace else None


def run_solve_job(job: SolveJob) -> RunSummary:
    """Top-level so it can be pickled into a process pool."""
    log.debug("[JOB] n=%d %s %s run=%d seed=%d", job.n, job.variant.label,
              job.backend.value, job.run_index, job.seed)
    try:
        instance = build_variant_instance(job.raw, job.n, job.variant.caf)
        cfg = CpaConfig(
            backend=job.backend,
            per_iteration_budget=None if job.backend is Backend.EXACT else job.budget_s,
            read_schedule=job.read_schedule,
            seed=job.seed,
            sweeps=job.sweeps,
        )
        if job.variant.formulation == "cpa":
            trace = run_cpa(instance, cfg)
        else:
            trace = run_cilp(instance, job.backend, cfg, cuts_max=job.cuts_max)
    except TspToolkitError as exc:
        imp.warning("[JOB] n=%d %s run=%d failed: %s", job.n, job.variant.label, job.run_index, exc,
                    extra={"type": "job", "evt": "failed"})
        return RunSummary(job.n, job.variant, job.run_index, job.seed,
                          error=f"{type(exc).__name__}: {exc}")
    return RunSummary(job.n, job.variant, job.run_index, job.seed, trace=trace)


def _reference_jobs(spec: ExperimentSpec, raw: RawInstance, keys: Sequence[tuple[int, bool]]) -> list[SolveJob]:
    return [
        SolveJob(raw=raw, n=n, variant=Variant("cpa", caf), backend=Backend.EXACT,
                 run_index=0, seed=spec.seed, read_schedule=spec.read_schedule)
        for n, caf in keys
    ]


def _references(spec: ExperimentSpec, raw: RawInstance, runner: ExperimentRunner,
                keys: Sequence[tuple[int, bool]]) -> dict[tuple[int, bool], RunSummary]:
    """Exact CPA run per (n, caf): optimum for GAP, |C|_max for CILP reads."""
    keys = sorted(set(keys))
    results = runner.map(run_solve_job, _reference_jobs(spec, raw, keys))
    return dict(zip(keys, results))


def _load(spec: ExperimentSpec) -> RawInstance:
    raw = load_tsplib(spec.instance_path)
    spec.check_sizes(raw.dimension)
    return raw


# ---------------------------------------------------------------------------
# complexity
# ---------------------------------------------------------------------------


def cmd_complexity(spec: ExperimentSpec, runner: Optional[ExperimentRunner] = None) -> Table:
    """Var / Constr of the four variants and the two reductions, per n."""
    runner = runner or ExperimentRunner(spec.workers)
    raw = _load(spec)
    refs = _references(spec, raw, runner, [(n, caf) for n in spec.sizes for caf in (False, True)])

    rows = []
    exact_var_red: list[tuple[int, float]] = []
    for n in spec.sizes:
        var_no_caf = n * (n - 1)
        var_caf = build_variant_instance(raw, n, True).num_arcs
        degree = degree_constraint_count(n)
        constr_cilp = degree + sec_count_complete(n) if n <= MAX_ENUMERATION_N else None

        constr_cpa = {}
        for caf in (False, True):
            ref = refs[(n, caf)]
            constr_cpa[caf] = degree + ref.trace.total_cuts if ref.trace else None

        rows.append({
            "n": n,
            "var_no_caf": var_no_caf,
            "var_caf": var_caf,
            "var_reduction_pct": percent_reduction(var_no_caf, var_caf),
            "constr_cilp": constr_cilp,
            "constr_cpa_no_caf": constr_cpa[False],
            "constr_cpa_caf": constr_cpa[True],
            "constr_reduction_no_caf_pct": percent_reduction(constr_cilp, constr_cpa[False]),
            "constr_reduction_caf_pct": percent_reduction(constr_cilp, constr_cpa[True]),
        })
        exact_var_red.append((n, (var_no_caf - var_caf) / var_no_caf * 100.0))
        imp.info("[COMPLEXITY] n=%d var=%d/%d constr_cilp=%s constr_cpa=%s/%s", n,
                 var_no_caf, var_caf, constr_cilp, constr_cpa[False], constr_cpa[True],
                 extra={"type": "complexity", "evt": "row"})

    for label, picked in (
        ("mean", [v for _, v in exact_var_red]),
        (f"mean_n>={LARGE_N_FROM}", [v for n, v in exact_var_red if n >= LARGE_N_FROM]),
    ):
        avg, _ = mean_dev(picked)
        rows.append({"n": label, "var_reduction_pct": avg})

    return Table(COMPLEXITY_COLUMNS, tuple(rows))


# ---------------------------------------------------------------------------
# solve
# ---------------------------------------------------------------------------


def _solve_row(spec: ExperimentSpec, n: int, variant: Variant, runs: list[RunSummary],
               optimum: Optional[float]) -> dict:
    traces = [r.trace for r in runs if r.trace is not None]
    errors = [r.error for r in runs if r.error]
    row: dict = {"n": n, "variant": variant.label, "backend": spec.backend.value, "runs": len(runs)}

    objectives = [t.objective for t in traces if t.objective is not None]
    row["of_avg"], row["of_dev"] = mean_dev(objectives)
    for key, values in (
        ("time", [t.total_time for t in traces]),
        ("build", [t.build_time for t in traces]),
        ("comp", [t.computation_time for t in traces]),
        ("solve", [t.solve_time for t in traces]),
        ("iters", [float(t.iteration_count) for t in traces]),
        ("cuts", [float(t.total_cuts) for t in traces]),
    ):
        row[f"{key}_avg"], row[f"{key}_dev"] = mean_dev(values)
    row["reads_avg"], _ = mean_dev([float(t.total_reads) for t in traces])
    row["qpu_us_avg"], _ = mean_dev([float(t.solver_modeled_us) for t in traces])

    feasible = len(objectives)
    row["feas_pct"] = 100.0 * feasible / len(runs) if runs else None
    if optimum is not None and traces:
        row["gap_pct"] = gap_and_feasibility(traces, optimum).gap_avg
    else:
        row["gap_pct"] = None
    row["error"] = errors[0] if errors else None
    return row


def _write_traces(spec: ExperimentSpec, summaries: Sequence[RunSummary], traces_dir: Path,
                  include_timings: bool) -> None:
    traces_dir.mkdir(parents=True, exist_ok=True)
    for s in summaries:
        if s.trace is None:
            continue
        name = f"n{s.n}_{s.variant.label}_{spec.backend.value}_run{s.run_index}.json"
        (traces_dir / name).write_text(trace_to_json(s.trace, include_timings), encoding="utf-8")


def cmd_solve(
    spec: ExperimentSpec,
    runner: Optional[ExperimentRunner] = None,
    traces_dir: Optional[Path] = None,
    include_timings: bool = True,
) -> Table:
    """OF / Time / Solve / Iters / Cuts statistics plus GAP and Feas per (n, variant)."""
    runner = runner or ExperimentRunner(spec.workers)
    raw = _load(spec)
    refs = _references(spec, raw, runner, [(n, v.caf) for n in spec.sizes for v in spec.variants])

    planned: list[tuple[int, Variant, int]] = []
    jobs: list[SolveJob] = []
    preset: dict[tuple[int, Variant, int], RunSummary] = {}
    for n in spec.sizes:
        for variant in spec.variants:
            ref = refs[(n, variant.caf)]
            cuts_max = ref.trace.total_cuts if ref.trace else 0
            for run in range(spec.effective_runs):
                key = (n, variant, run)
                planned.append(key)
                if variant.formulation == "cilp" and n > spec.cilp_limit:
                    too_large = f"TooLarge: CILP limited to n <= {spec.cilp_limit} for {spec.backend.value}"
                    preset[key] = RunSummary(n, variant, run, spec.run_seed(run), error=too_large)
                elif spec.backend is Backend.EXACT and variant.formulation == "cpa":
                    preset[key] = ref
                else:
                    jobs.append(SolveJob(
                        raw=raw, n=n, variant=variant, backend=spec.backend, run_index=run,
                        seed=spec.run_seed(run), sweeps=spec.sweeps, budget_s=spec.budget_s,
                        read_schedule=spec.read_schedule, cuts_max=cuts_max,
                    ))

    done = {(s.n, s.variant, s.run_index): s for s in runner.map(run_solve_job, jobs)}
    summaries = [preset.get(key) or done[key] for key in planned]
    if traces_dir is not None:
        _write_traces(spec, summaries, traces_dir, include_timings)

    rows = []
    for n in spec.sizes:
        for variant in spec.variants:
            runs = [s for s in summaries if s.n == n and s.variant == variant]
            optimum = refs[(n, variant.caf)].objective
            row = _solve_row(spec, n, variant, runs, optimum)
            rows.append(row)
            imp.info("[SOLVE] n=%d %s %s of=%s feas=%s gap=%s", n, variant.label,
                     spec.backend.value, row["of_avg"], row["feas_pct"], row["gap_pct"],
                     extra={"type": "solve", "evt": "row"})
    return Table(SOLVE_COLUMNS, tuple(rows))


# ---------------------------------------------------------------------------
# export-qubo
# ---------------------------------------------------------------------------


def cmd_export_qubo(
    spec: ExperimentSpec,
    n: int,
    variant: Variant,
    output: Path,
    penalty: Optional[float] = None,
) -> Path:
    """QUBO of the initial model: no cuts for CPA, every SEC for CILP."""
    raw = load_tsplib(spec.instance_path)
    instance = build_variant_instance(raw, n, variant.caf)
    cuts = tuple(enumerate_all_secs(n)) if variant.formulation == "cilp" else ()
    qubo = to_qubo(RestrictedModel(instance=instance, cuts=cuts), penalty)
    path = write_qubo_file(qubo, output)
    imp.info("[EXPORT] n=%d %s vars=%d -> %s", n, variant.label, qubo.num_vars, path,
             extra={"type": "export", "evt": "qubo"})
    return path
