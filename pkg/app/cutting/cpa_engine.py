"""Cutting-plane loop over the restricted model.

Each iteration solves the restricted model (degree constraints plus the
active SECs) with one backend, splits the solution into directed cycles
and, if there is more than one, adds an SEC for every cycle at once. The
loop ends on a single Hamiltonian cycle, on an iteration without a
feasible solution, or at the iteration cap (ceil(n/2) by default).

Backends:
  exact             branch-and-bound over the assignment relaxation
  anneal            QUBO + simulated annealing, best feasible sample
  hybrid_emulation  QUBO anneal rounds + permutation search under a wall-clock budget

Only the exact backend proves optimality; tours from the other two are
reported as FeasibleTour.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from enum import Enum
from typing import FrozenSet, Iterable, Optional, Sequence

from app.model.domain import (
    ArcSolution,
    Instance,
    RestrictedModel,
    SecCut,
    TspToolkitError,
)
from app.model.formulation import enumerate_all_secs, successor_cycles
from app.solvers.annealer import (
    PhaseTimer,
    ReadMode,
    ReadSchedule,
    TimeBreakdown,
    account_time,
    anneal,
    compute_num_reads,
)
from app.solvers.exact_backend import heuristic_tour, solve_restricted_exact
from app.solvers.hybrid import HybridSettings, solve_hybrid
from app.solvers.qubo_backend import to_qubo

log = logging.getLogger("FULL")
imp = logging.getLogger("IMPORTANT")

HYBRID_DEFAULT_BUDGET_S: float = 5.0


class NotDegreeFeasible(TspToolkitError, ValueError):
    """Subtours are only defined for a successor permutation."""


class Backend(Enum):
    EXACT = "exact"
    ANNEAL = "anneal"
    HYBRID = "hybrid_emulation"


class Outcome(Enum):
    OPTIMAL = "Optimal"
    FEASIBLE_TOUR = "FeasibleTour"
    NO_FEASIBLE = "NoFeasible"
    ITERATION_LIMIT = "IterationLimit"

    @property
    def has_tour(self) -> bool:
        return self in (Outcome.OPTIMAL, Outcome.FEASIBLE_TOUR)


@dataclass(frozen=True)
class CpaConfig:
    backend: Backend = Backend.EXACT
    max_iterations: Optional[int] = None
    per_iteration_budget: Optional[float] = None
    read_schedule: ReadSchedule = field(default_factory=ReadSchedule)
    seed: int = 0
    sweeps: int = 2000
    penalty: Optional[float] = None
    hybrid: HybridSettings = field(default_factory=HybridSettings)

    def __post_init__(self) -> None:
        if self.max_iterations is not None and self.max_iterations < 1:
            raise ValueError(f"max_iterations must be >= 1, got {self.max_iterations}")
        if self.per_iteration_budget is not None and self.per_iteration_budget <= 0:
            raise ValueError(f"per_iteration_budget must be positive, got {self.per_iteration_budget}")
        if self.sweeps < 1:
            raise ValueError(f"sweeps must be >= 1, got {self.sweeps}")

    def iteration_cap(self, n: int) -> int:
        """ceil(n/2): at most n/2 disjoint subtours exist."""
        return self.max_iterations if self.max_iterations is not None else math.ceil(n / 2)

    @property
    def budget(self) -> Optional[float]:
        if self.backend is Backend.HYBRID and self.per_iteration_budget is None:
            return HYBRID_DEFAULT_BUDGET_S
        return self.per_iteration_budget


@dataclass(frozen=True)
class IterationRecord:
    index: int
    solution: Optional[ArcSolution]
    cuts_added: tuple[SecCut, ...]
    num_reads_used: int
    time_breakdown: TimeBreakdown
    nodes_explored: int = 0
    feasible_samples: int = 0


@dataclass(frozen=True)
class CpaTrace:
    instance_name: str
    n: int
    num_arcs: int
    backend: Backend
    formulation: str
    seed: int
    iterations: tuple[IterationRecord, ...]
    outcome: Outcome
    initial_cuts: int = 0

    @property
    def total_cuts(self) -> int:
        return sum(len(it.cuts_added) for it in self.iterations)

    @property
    def final_solution(self) -> Optional[ArcSolution]:
        if not self.iterations:
            return None
        return self.iterations[-1].solution

    @property
    def objective(self) -> Optional[float]:
        """Tour cost when the run ended with a Hamiltonian cycle."""
        if not self.outcome.has_tour or self.final_solution is None:
            return None
        return self.final_solution.objective

    @property
    def iteration_count(self) -> int:
        return len(self.iterations)

    @property
    def total_time(self) -> float:
        return sum(it.time_breakdown.total for it in self.iterations)

    @property
    def solve_time(self) -> float:
        """Wall time spent inside the solver itself."""
        return sum(it.time_breakdown.sampling for it in self.iterations)

    @property
    def computation_time(self) -> float:
        return sum(it.time_breakdown.computation for it in self.iterations)

    @property
    def build_time(self) -> float:
        return sum(it.time_breakdown.build for it in self.iterations)

    @property
    def total_reads(self) -> int:
        return sum(it.num_reads_used for it in self.iterations)

    @property
    def solver_modeled_us(self) -> int:
        return sum(it.time_breakdown.solver_modeled_us for it in self.iterations)

    @property
    def tour(self) -> Optional[tuple[int, ...]]:
        """Vertices in visiting order starting at 1, for tour outcomes."""
        solution = self.final_solution
        if solution is None or not self.outcome.has_tour:
            return None
        cycles = successor_cycles(self.n, solution.successors)
        return cycles[0] if len(cycles) == 1 else None


# ---------------------------------------------------------------------------
# Separation
# ---------------------------------------------------------------------------


def detect_subtours(solution: ArcSolution, n: int) -> list[FrozenSet[int]]:
    """Vertex sets of the directed cycles, ordered by smallest member."""
    if not solution.degree_feasible:
        raise NotDegreeFeasible(
            f"selection of {len(solution.selected)} arcs is not a successor permutation"
        )
    return [frozenset(cycle) for cycle in successor_cycles(n, solution.successors)]


def cuts_from_subtours(
    subtours: Sequence[Iterable[int]],
    n: int,
    existing: FrozenSet[FrozenSet[int]] = frozenset(),
) -> list[SecCut]:
    """One SEC per proper subtour, skipping subsets already cut or repeated."""
    cuts: list[SecCut] = []
    seen = set(existing)
    for members in subtours:
        subset = frozenset(members)
        if len(subset) > n - 1 or len(subset) < 2 or subset in seen:
            continue
        seen.add(subset)
        cuts.append(SecCut(subset))
    return cuts


# ---------------------------------------------------------------------------
# One solve of a restricted model
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class _Solve:
    solution: Optional[ArcSolution]
    proven_optimal: bool
    num_reads: int
    nodes: int
    feasible_samples: int


def _solve_model(
    model: RestrictedModel,
    backend: Backend,
    cfg: CpaConfig,
    timer: PhaseTimer,
    stream: int,
    read_cuts: int,
    read_mode: ReadMode,
    tour_hint: Optional[ArcSolution] = None,
) -> _Solve:
    if backend is Backend.EXACT:
        with timer.phase("sampling"):
            result = solve_restricted_exact(model, cfg.budget, incumbent=tour_hint)
        return _Solve(result.solution, result.optimal, 0, result.nodes_explored, 0)

    with timer.phase("conversion"):
        qubo = to_qubo(model, cfg.penalty)

    if backend is Backend.ANNEAL:
        reads = compute_num_reads(cfg.read_schedule, read_cuts, read_mode)
        with timer.phase("sampling"):
            samples = anneal(qubo, reads, cfg.sweeps, cfg.seed, stream=stream)
        return _Solve(samples.best_feasible, False, samples.num_reads_used, 0, samples.feasible_count)

    budget = cfg.budget if cfg.budget is not None else HYBRID_DEFAULT_BUDGET_S
    settings = HybridSettings(
        budget_s=budget,
        reads_per_round=cfg.hybrid.reads_per_round,
        sweeps=cfg.hybrid.sweeps,
        moves_per_vertex=cfg.hybrid.moves_per_vertex,
        stall_rounds=cfg.hybrid.stall_rounds,
        max_rounds=cfg.hybrid.max_rounds,
    )
    result = solve_hybrid(model, qubo, settings, cfg.seed, stream, timer=timer)
    found = 1 if result.solution is not None else 0
    return _Solve(result.solution, False, result.num_reads_used, result.rounds, found)


def _record(index: int, solve: _Solve, cuts: Sequence[SecCut], timer: PhaseTimer, cfg: CpaConfig) -> IterationRecord:
    return IterationRecord(
        index=index,
        solution=solve.solution,
        cuts_added=tuple(cuts),
        num_reads_used=solve.num_reads,
        time_breakdown=account_time(timer.phases, solve.num_reads, cfg.read_schedule),
        nodes_explored=solve.nodes,
        feasible_samples=solve.feasible_samples,
    )


# ---------------------------------------------------------------------------
# Drivers
# ---------------------------------------------------------------------------


def run_cpa(instance: Instance, cfg: CpaConfig) -> CpaTrace:
    """Cutting-plane loop from the cut-free restricted model."""
    n = instance.n
    cap = cfg.iteration_cap(n)
    iterations: list[IterationRecord] = []
    outcome = Outcome.ITERATION_LIMIT

    timer = PhaseTimer()
    with timer.phase("build"):
        model = RestrictedModel(instance=instance)
        # one polished tour bounds every iteration of an exact run
        hint = heuristic_tour(instance) if cfg.backend is Backend.EXACT else None

    for k in range(1, cap + 1):
        solve = _solve_model(model, cfg.backend, cfg, timer, stream=k,
                             read_cuts=len(model.cuts), read_mode=ReadMode.CPA, tour_hint=hint)

        if solve.solution is None:
            iterations.append(_record(k, solve, (), timer, cfg))
            outcome = Outcome.NO_FEASIBLE
            imp.info("[CPA] %s n=%d it=%d no feasible solution", instance.name, n, k,
                     extra={"type": "cpa", "evt": "no_feasible"})
            break

        with timer.phase("decode"):
            subtours = detect_subtours(solve.solution, n)
            cuts = cuts_from_subtours(subtours, n, existing=model.cut_subsets)

        log.debug(
            "[CPA] it=%d backend=%s objective=%.2f cycles=%d new_cuts=%d reads=%d",
            k, cfg.backend.value, solve.solution.objective, len(subtours), len(cuts), solve.num_reads,
        )

        if len(subtours) == 1:
            iterations.append(_record(k, solve, (), timer, cfg))
            outcome = Outcome.OPTIMAL if solve.proven_optimal else Outcome.FEASIBLE_TOUR
            break

        iterations.append(_record(k, solve, cuts, timer, cfg))
        timer = PhaseTimer()
        with timer.phase("build"):
            model = model.with_cuts(tuple(cuts))

    trace = CpaTrace(
        instance_name=instance.name,
        n=n,
        num_arcs=instance.num_arcs,
        backend=cfg.backend,
        formulation="cpa",
        seed=cfg.seed,
        iterations=tuple(iterations),
        outcome=outcome,
    )
    imp.info(
        "[CPA] %s n=%d arcs=%d backend=%s outcome=%s iters=%d cuts=%d objective=%s",
        instance.name, n, instance.num_arcs, cfg.backend.value, outcome.value,
        trace.iteration_count, trace.total_cuts,
        f"{trace.objective:.2f}" if trace.objective is not None else "--",
        extra={"type": "cpa", "evt": "done"},
    )
    return trace


def run_cilp(
    instance: Instance,
    backend: Backend,
    cfg: Optional[CpaConfig] = None,
    cuts_max: int = 0,
) -> CpaTrace:
    """Single solve of the model with every SEC enumerated up front.

    cuts_max is |C|_max of a prior CPA run and drives the anneal read count.
    cfg supplies seeds, sweeps and budgets; its backend field is ignored.
    """
    cfg = cfg or CpaConfig(backend=backend)
    n = instance.n

    timer = PhaseTimer()
    with timer.phase("build"):
        model = RestrictedModel(instance=instance, cuts=tuple(enumerate_all_secs(n)))

    solve = _solve_model(model, backend, cfg, timer, stream=1,
                         read_cuts=cuts_max, read_mode=ReadMode.CILP)
    if solve.solution is None:
        outcome = Outcome.NO_FEASIBLE
    elif solve.proven_optimal:
        outcome = Outcome.OPTIMAL
    elif solve.solution.is_tour:
        outcome = Outcome.FEASIBLE_TOUR
    else:
        outcome = Outcome.NO_FEASIBLE

    trace = CpaTrace(
        instance_name=instance.name,
        n=n,
        num_arcs=instance.num_arcs,
        backend=backend,
        formulation="cilp",
        seed=cfg.seed,
        iterations=(_record(1, solve, (), timer, cfg),),
        outcome=outcome,
        initial_cuts=len(model.cuts),
    )
    imp.info(
        "[CILP] %s n=%d arcs=%d secs=%d backend=%s outcome=%s objective=%s",
        instance.name, n, instance.num_arcs, len(model.cuts), backend.value, outcome.value,
        f"{trace.objective:.2f}" if trace.objective is not None else "--",
        extra={"type": "cilp", "evt": "done"},
    )
    return trace


# ---------------------------------------------------------------------------
# Run statistics
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class GapFeasibility:
    gaps: tuple[Optional[float], ...]
    gap_avg: Optional[float]
    feas_pct: float


def gap_and_feasibility(runs: Sequence[CpaTrace], optimum: float) -> GapFeasibility:
    """GAP over feasible runs only; gap_avg is None when no run found a tour."""
    if optimum <= 0:
        raise ValueError(f"optimum must be positive, got {optimum}")
    if not runs:
        return GapFeasibility(gaps=(), gap_avg=None, feas_pct=0.0)
    gaps = tuple(
        (run.objective - optimum) / optimum * 100.0 if run.objective is not None else None
        for run in runs
    )
    feasible = [g for g in gaps if g is not None]
    gap_avg = math.fsum(feasible) / len(feasible) if feasible else None
    return GapFeasibility(
        gaps=gaps,
        gap_avg=gap_avg,
        feas_pct=100.0 * len(feasible) / len(runs),
    )
