"""Pure formulation helpers: constraint counts, SEC enumeration, evaluation.

Implements the counting laws of the complete ILP (2n degree constraints,
2^n - 2 - n subtour elimination constraints), explicit SEC enumeration for
small n, evaluation of an arc selection against a restricted model, cycle
decomposition and violated-cut detection.

Everything here is deterministic and side-effect free: no logging, no
clock, no files, no environment reads.
"""

from __future__ import annotations

import math
from itertools import combinations
from typing import Iterable, Sequence

import networkx as nx

from app.model.domain import (
    Arc,
    ArcSolution,
    ComplexityStats,
    OutOfRange,
    RestrictedModel,
    SecCut,
    TooLarge,
    UnknownArc,
)

MAX_COUNT_N: int = 62
MAX_ENUMERATION_N: int = 22


# ---------------------------------------------------------------------------
# Counting laws
# ---------------------------------------------------------------------------


def degree_constraint_count(n: int) -> int:
    """One outgoing and one incoming equality per vertex."""
    if n < 3:
        raise OutOfRange(f"n must be >= 3, got {n}")
    return 2 * n


def sec_count_complete(n: int) -> int:
    """Number of SECs of the complete model: subsets with 2 <= |S| <= n-1."""
    if n < 3:
        raise OutOfRange(f"n must be >= 3, got {n}")
    if n > MAX_COUNT_N:
        raise TooLarge(f"2^{n} does not fit a signed 64-bit count (max n={MAX_COUNT_N})")
    return 2 ** n - 2 - n


def enumerate_all_secs(n: int) -> list[SecCut]:
    """Every SEC of the complete model, ordered by size then lexicographically."""
    if n < 3:
        raise OutOfRange(f"n must be >= 3, got {n}")
    if n > MAX_ENUMERATION_N:
        raise TooLarge(f"enumerating 2^{n} subsets exceeds the guard n <= {MAX_ENUMERATION_N}")
    vertices = range(1, n + 1)
    return [
        SecCut(frozenset(subset))
        for size in range(2, n)
        for subset in combinations(vertices, size)
    ]


def complexity_of(model: RestrictedModel, complete: bool = False) -> ComplexityStats:
    """Var/Constr of a model: active cuts (CPA) or the full SEC family (CILP)."""
    n = model.n
    secs = sec_count_complete(n) if complete else len(model.cuts)
    return ComplexityStats(
        num_vars=model.instance.num_arcs,
        num_degree_constraints=degree_constraint_count(n),
        num_sec_constraints=secs,
    )


# ---------------------------------------------------------------------------
# Cycle structure
# ---------------------------------------------------------------------------


def successor_cycles(n: int, successors: dict[int, int]) -> list[tuple[int, ...]]:
    """Directed cycles of a successor permutation, in visiting order.

    Each cycle starts at its smallest vertex; cycles are ordered by that
    vertex. The permutation must cover 1..n.
    """
    seen = [False] * (n + 1)
    cycles: list[tuple[int, ...]] = []
    for start in range(1, n + 1):
        if seen[start]:
            continue
        cycle = []
        v = start
        while not seen[v]:
            seen[v] = True
            cycle.append(v)
            v = successors[v]
        cycles.append(tuple(cycle))
    return cycles


def weak_components(n: int, selected: Iterable[Arc]) -> list[frozenset[int]]:
    """Weakly connected components of (1..n, selected), for diagnostics only."""
    graph = nx.Graph()
    graph.add_nodes_from(range(1, n + 1))
    graph.add_edges_from(selected)
    comps = [frozenset(c) for c in nx.connected_components(graph)]
    return sorted(comps, key=min)


def cycle_masks(cycles: Sequence[Sequence[int]]) -> list[int]:
    masks = []
    for cycle in cycles:
        m = 0
        for v in cycle:
            m |= 1 << (v - 1)
        masks.append(m)
    return masks


def violated_cut_masks(cycles_as_masks: Sequence[int], cut_masks: frozenset[int]) -> list[int]:
    """Active cuts violated by a permutation with the given cycle masks.

    A permutation puts |S| selected arcs inside S exactly when S is a union
    of its cycles, so only unions of cycles can be violated. Unions are
    enumerated when that is cheaper than scanning the cut pool.
    """
    c = len(cycles_as_masks)
    if c <= 1 or not cut_masks:
        return []
    if (1 << c) - 2 <= len(cut_masks):
        found = []
        for pick in range(1, (1 << c) - 1):
            m = 0
            for k in range(c):
                if pick >> k & 1:
                    m |= cycles_as_masks[k]
            if m in cut_masks:
                found.append(m)
        return sorted(found)
    return sorted(
        m for m in cut_masks
        if all((cm & m) == 0 or (cm & m) == cm for cm in cycles_as_masks)
    )


# ---------------------------------------------------------------------------
# Evaluation
# ---------------------------------------------------------------------------


def evaluate(model: RestrictedModel, selected: Iterable[Arc]) -> ArcSolution:
    """Objective, degree feasibility and cycle count of an arc selection."""
    instance = model.instance
    arcs = sorted(set(selected))
    arc_set = instance.arc_set
    for arc in arcs:
        if arc not in arc_set:
            raise UnknownArc(f"arc {arc} is not a candidate arc of the instance")

    n = instance.n
    objective = math.fsum(instance.cost(i, j) for i, j in arcs)

    out_deg = [0] * (n + 1)
    in_deg = [0] * (n + 1)
    for i, j in arcs:
        out_deg[i] += 1
        in_deg[j] += 1
    degree_feasible = all(out_deg[v] == 1 and in_deg[v] == 1 for v in range(1, n + 1))

    if degree_feasible:
        cycle_count = len(successor_cycles(n, dict(arcs)))
    else:
        cycle_count = len(weak_components(n, arcs))

    return ArcSolution(
        selected=tuple(arcs),
        objective=objective,
        degree_feasible=degree_feasible,
        cycle_count=cycle_count,
    )


def cut_lhs(cut: SecCut, selected: Iterable[Arc]) -> int:
    members = cut.subset
    return sum(1 for i, j in selected if i in members and j in members)


def violated_cuts(model: RestrictedModel, solution: ArcSolution) -> list[SecCut]:
    """Active cuts whose left-hand side exceeds |S| - 1 for this solution."""
    return [c for c in model.cuts if cut_lhs(c, solution.selected) > c.rhs]


def satisfies_model(model: RestrictedModel, solution: ArcSolution) -> bool:
    """Degree constraints and every active cut hold."""
    if not solution.degree_feasible:
        return False
    cycles = successor_cycles(model.n, solution.successors)
    return not violated_cut_masks(cycle_masks(cycles), model.cut_masks)
