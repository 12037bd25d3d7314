"""Hybrid solver emulation under a wall-clock budget.

Alternates two modules in rounds until the budget runs out or the
incumbent stops improving:

  - quantum module stand-in: a short batch of QUBO anneals (app.solvers.annealer);
  - classical module: simulated annealing over successor permutations. Degree
    constraints hold by construction; active-cut violations and filtered
    arcs cost P = n * c_max + 1 each.

The classical module starts from the incumbent and from the lowest-energy
degree-feasible anneal sample. The result is the best permutation that
satisfies every active cut using only candidate arcs. This is an
emulation of a hybrid service, not a reproduction of one.
"""

from __future__ import annotations

import logging
import math
import time
from dataclasses import dataclass
from typing import Optional

import numpy as np

from app.model.domain import ArcSolution, RestrictedModel
from app.model.formulation import evaluate
from app.solvers.annealer import AnnealResult, PhaseTimer, anneal
from app.solvers.qubo_backend import QuboProblem, decode

log = logging.getLogger("FULL")

CLOCK_CHECK_EVERY: int = 256


@dataclass(frozen=True)
class HybridSettings:
    budget_s: float = 5.0
    reads_per_round: int = 32
    sweeps: int = 100
    moves_per_vertex: int = 200
    stall_rounds: int = 2
    max_rounds: Optional[int] = None


@dataclass(frozen=True)
class HybridResult:
    solution: Optional[ArcSolution]
    rounds: int
    num_reads_used: int
    budget_hit: bool


class _PermutationEnergy:
    """cost + P * (filtered arcs used + active cuts violated) of a successor list."""

    def __init__(self, model: RestrictedModel, penalty: float):
        instance = model.instance
        n = instance.n
        self.n = n
        self.cost = np.asarray(instance.costs, dtype=float)
        self.allowed = np.zeros((n, n), dtype=bool)
        idx = np.asarray(instance.arcs) - 1
        self.allowed[idx[:, 0], idx[:, 1]] = True
        self.cut_masks = sorted(model.cut_masks)
        self.penalty = penalty

    def cycles(self, succ: list[int]) -> list[int]:
        seen = [False] * self.n
        masks = []
        for start in range(self.n):
            if seen[start]:
                continue
            m = 0
            v = start
            while not seen[v]:
                seen[v] = True
                m |= 1 << v
                v = succ[v]
            masks.append(m)
        return masks

    def violations(self, succ: list[int]) -> int:
        rows = np.arange(self.n)
        bad = int(np.count_nonzero(~self.allowed[rows, succ]))
        masks = self.cycles(succ)
        if len(masks) > 1:
            for cut in self.cut_masks:
                if all((cm & cut) == 0 or (cm & cut) == cm for cm in masks):
                    bad += 1
        return bad

    def __call__(self, succ: list[int]) -> tuple[float, int]:
        objective = float(self.cost[np.arange(self.n), succ].sum())
        bad = self.violations(succ)
        return objective + self.penalty * bad, bad


def _cycle_members(succ: list[int], start: int) -> set[int]:
    members = {start}
    v = succ[start]
    while v != start:
        members.add(v)
        v = succ[v]
    return members


def _propose(succ: list[int], rng: np.random.Generator) -> Optional[list[int]]:
    """Successor swap, vertex relocation or 2-opt reversal; None if degenerate."""
    n = len(succ)
    kind = int(rng.integers(0, 3))
    new = list(succ)
    if kind == 0:
        a, b = (int(v) for v in rng.choice(n, size=2, replace=False))
        if succ[a] == b or succ[b] == a:
            return None
        new[a], new[b] = succ[b], succ[a]
        return new
    if kind == 1:
        v = int(rng.integers(0, n))
        pred = succ.index(v)
        nxt = succ[v]
        if nxt == pred:
            return None
        x = int(rng.integers(0, n))
        if x in (v, pred):
            return None
        new[pred] = nxt
        new[v] = succ[x]
        new[x] = v
        return new
    a = int(rng.integers(0, n))
    members = _cycle_members(succ, a)
    if len(members) < 4:
        return None
    c = int(rng.choice(sorted(members)))
    b = succ[a]
    if c in (a, b):
        return None
    d = succ[c]
    segment = [b]
    while segment[-1] != c:
        segment.append(succ[segment[-1]])
    for k in range(1, len(segment)):
        new[segment[k]] = segment[k - 1]
    new[a] = c
    new[b] = d
    return new


def _classical_search(
    start: list[int],
    energy_of: _PermutationEnergy,
    rng: np.random.Generator,
    moves: int,
    t_start: float,
    deadline: float,
) -> tuple[list[int], float, int]:
    current = list(start)
    current_e, current_bad = energy_of(current)
    best, best_e, best_bad = list(current), current_e, current_bad
    t_end = t_start * 1e-3
    for step in range(moves):
        if step % CLOCK_CHECK_EVERY == 0 and time.perf_counter() > deadline:
            break
        temperature = t_start * (t_end / t_start) ** (step / max(1, moves - 1))
        candidate = _propose(current, rng)
        if candidate is None:
            continue
        cand_e, cand_bad = energy_of(candidate)
        delta = cand_e - current_e
        if delta <= 0 or rng.random() < math.exp(-delta / temperature):
            current, current_e, current_bad = candidate, cand_e, cand_bad
            if current_e < best_e:
                best, best_e, best_bad = list(current), current_e, current_bad
    return best, best_e, best_bad


def _random_tour(n: int, rng: np.random.Generator) -> list[int]:
    order = [int(v) for v in rng.permutation(n)]
    succ = [0] * n
    for k, v in enumerate(order):
        succ[v] = order[(k + 1) % n]
    return succ


def _seed_from_samples(qubo: QuboProblem, model: RestrictedModel, result: AnnealResult) -> Optional[list[int]]:
    for bits in result.sampleset.record.sample:
        solution, _ = decode(qubo, bits, model)
        if solution.degree_feasible:
            succ = solution.successors
            return [succ[v] - 1 for v in range(1, model.n + 1)]
    return None


def solve_hybrid(
    model: RestrictedModel,
    qubo: QuboProblem,
    settings: HybridSettings,
    seed: int,
    stream: int,
    timer: Optional[PhaseTimer] = None,
) -> HybridResult:
    """Best restricted-model-feasible permutation found within the budget."""
    timer = timer or PhaseTimer()
    started = time.perf_counter()
    deadline = started + settings.budget_s
    n = model.n
    energy_of = _PermutationEnergy(model, qubo.penalty_weight)
    rng = np.random.default_rng([seed, stream, 1])
    mean_cost = float(np.mean([model.instance.cost(i, j) for i, j in model.instance.arcs]))
    t_start = 0.1 * mean_cost
    moves = settings.moves_per_vertex * n

    incumbent: Optional[list[int]] = None
    incumbent_cost = math.inf
    rounds = reads = stall = 0
    budget_hit = False
    while True:
        if time.perf_counter() > deadline:
            budget_hit = True
            break
        if settings.max_rounds is not None and rounds >= settings.max_rounds:
            break
        rounds += 1

        with timer.phase("sampling"):
            samples = anneal(qubo, settings.reads_per_round, settings.sweeps, seed, stream=stream * 100_000 + rounds)
        reads += samples.num_reads_used
        with timer.phase("decode"):
            starts = []
            if incumbent is not None:
                starts.append(incumbent)
            sampled = _seed_from_samples(qubo, model, samples)
            starts.append(sampled if sampled is not None else _random_tour(n, rng))

        improved = False
        with timer.phase("sampling"):
            for start in starts:
                best, best_e, bad = _classical_search(start, energy_of, rng, moves, t_start, deadline)
                if bad == 0 and best_e < incumbent_cost - 1e-9:
                    incumbent, incumbent_cost = best, best_e
                    improved = True
        stall = 0 if improved else stall + 1
        log.debug("[HYBRID] round=%d incumbent=%s stall=%d", rounds, incumbent_cost, stall)
        if incumbent is not None and stall >= settings.stall_rounds:
            break

    solution = None
    if incumbent is not None:
        arcs = [(v + 1, incumbent[v] + 1) for v in range(n)]
        solution = evaluate(model, arcs)
    return HybridResult(solution=solution, rounds=rounds, num_reads_used=reads, budget_hit=budget_hit)
