"""Exact solvers for the restricted model and independent TSP oracles.

solve_restricted_exact is a depth-first branch-and-bound over the
assignment relaxation (degree constraints only). A node whose assignment
violates an active cut S branches on the selected arcs inside S, in
mutually exclusive children: child k forbids arc a_k and requires
a_1..a_{k-1}. Only active cuts prune; new SECs are the cutting-plane
engine's job.

Upper bounds come from a nearest-neighbour tour improved by 2-opt and
Or-opt, and from Karp patching of every branched node's cycle cover. They
only speed up pruning; the exploration order stays depth-first.

held_karp and brute_force_tsp solve the full TSP (single Hamiltonian
cycle) and serve as oracles for small n.
"""

from __future__ import annotations

import logging
import time
from dataclasses import dataclass, field
from itertools import permutations
from typing import FrozenSet, Optional, Sequence

import numpy as np
from scipy.optimize import linear_sum_assignment

from app.model.domain import (
    Arc,
    ArcSolution,
    Infeasible,
    Instance,
    RestrictedModel,
    TooLarge,
    TspToolkitError,
)
from app.model.formulation import evaluate, violated_cut_masks

log = logging.getLogger("FULL")

HELD_KARP_MAX_N: int = 18
BRUTE_FORCE_MAX_N: int = 10
LOCAL_SEARCH_MAX_PASSES: int = 500
OR_OPT_MAX_SEGMENT: int = 3
EPS: float = 1e-9


class BudgetExhausted(TspToolkitError):
    """The time budget ran out; incumbent is the best feasible selection found, if any."""

    def __init__(self, message: str, incumbent: Optional[ArcSolution] = None):
        super().__init__(message)
        self.incumbent = incumbent


@dataclass(frozen=True)
class BnbNode:
    """Branch-and-bound subproblem; arcs are 0-based (row, col) pairs."""
    forbidden_arcs: FrozenSet[Arc] = field(default_factory=frozenset)
    required_arcs: FrozenSet[Arc] = field(default_factory=frozenset)
    lower_bound: float = 0.0


@dataclass(frozen=True)
class ExactResult:
    solution: ArcSolution
    optimal: bool
    nodes_explored: int
    wall_time: float


# ---------------------------------------------------------------------------
# Matrices and the assignment relaxation
# ---------------------------------------------------------------------------


def masked_cost_matrix(instance: Instance) -> tuple[np.ndarray, float]:
    """0-based cost matrix with non-candidate entries set to n * c_max + 1."""
    n = instance.n
    big = n * instance.max_arc_cost + 1.0
    matrix = np.full((n, n), big)
    if instance.arcs:
        idx = np.asarray(instance.arcs) - 1
        matrix[idx[:, 0], idx[:, 1]] = instance.costs[idx[:, 0], idx[:, 1]]
    return matrix, big


def _solve_assignment(matrix: np.ndarray, big: float) -> Optional[tuple[np.ndarray, float]]:
    rows, cols = linear_sum_assignment(matrix)
    chosen = matrix[rows, cols]
    if np.any(chosen >= big):
        return None
    return cols, float(chosen.sum())


def _solution_from_successors(successors: np.ndarray, instance: Instance) -> ArcSolution:
    arcs = [(i + 1, int(j) + 1) for i, j in enumerate(successors)]
    return evaluate(RestrictedModel(instance=instance), arcs)


def hungarian_assignment(costs: np.ndarray) -> ArcSolution:
    """Minimum-cost perfect matching of the out/in bipartite graph.

    Masked entries (np.inf) are forbidden. The result is a union of
    directed cycles covering every vertex.
    """
    matrix = np.array(costs, dtype=float)
    n = matrix.shape[0]
    if matrix.shape != (n, n):
        raise ValueError(f"cost matrix must be square, got {matrix.shape}")
    np.fill_diagonal(matrix, np.inf)
    finite = matrix[np.isfinite(matrix)]
    big = n * (float(finite.max()) if finite.size else 0.0) + 1.0
    matrix[~np.isfinite(matrix)] = big

    result = _solve_assignment(matrix, big)
    if result is None:
        raise Infeasible("no finite-cost perfect matching exists")
    successors, _ = result

    arcs = tuple(sorted((i + 1, int(j) + 1) for i, j in enumerate(successors)))
    costs_arr = np.where(np.isfinite(np.asarray(costs, dtype=float)), costs, 0.0)
    instance = Instance(n=n, costs=costs_arr, arcs=arcs)
    return evaluate(RestrictedModel(instance=instance), arcs)


# ---------------------------------------------------------------------------
# Heuristic incumbent
# ---------------------------------------------------------------------------


def _greedy_walk(instance: Instance) -> Optional[list[int]]:
    n = instance.n
    allowed = instance.arc_set
    tour = [1]
    visited = {1}
    current = 1
    while len(tour) < n:
        options = [
            j for j in range(1, n + 1)
            if j not in visited and (current, j) in allowed
        ]
        if not options:
            return None
        current = min(options, key=lambda j: (instance.cost(tour[-1], j), j))
        tour.append(current)
        visited.add(current)
    if (tour[-1], 1) not in allowed:
        return None
    return tour


def _tour_solution(instance: Instance, tour: Sequence[int]) -> ArcSolution:
    arcs = list(zip(tour, list(tour[1:]) + [tour[0]]))
    return evaluate(RestrictedModel(instance=instance), arcs)


def nearest_neighbor_tour(instance: Instance) -> Optional[ArcSolution]:
    """Greedy tour from vertex 1; None when the walk dead-ends on the arc set."""
    tour = _greedy_walk(instance)
    return _tour_solution(instance, tour) if tour is not None else None


def _best_two_opt(matrix: np.ndarray, order: np.ndarray) -> tuple[float, int, int]:
    """Best reversal of order[i+1..j]; exact for asymmetric costs too."""
    n = len(order)
    nxt = np.roll(order, -1)
    fwd = matrix[order, nxt]
    rev = matrix[nxt, order]
    pf = np.concatenate(([0.0], np.cumsum(fwd)))
    pr = np.concatenate(([0.0], np.cumsum(rev)))
    i = np.arange(n)[:, None]
    j = np.arange(n)[None, :]
    valid = (j > i + 1) & (j <= n - 1)
    jj = np.minimum(j, n - 1)
    inner = (pr[jj] - pr[np.minimum(i + 1, n)]) - (pf[jj] - pf[np.minimum(i + 1, n)])
    delta = (matrix[order[i], order[jj]] + matrix[order[np.minimum(i + 1, n - 1)], nxt[jj]]
             - fwd[i] - fwd[jj] + inner)
    delta = np.where(valid, delta, np.inf)
    k = int(np.argmin(delta))
    return float(delta.flat[k]), k // n, k % n


def _best_or_opt(matrix: np.ndarray, order: np.ndarray) -> tuple[float, Optional[np.ndarray]]:
    """Best move of a segment of 1..OR_OPT_MAX_SEGMENT vertices, vertex order[0] fixed."""
    n = len(order)
    best_delta, best_order = np.inf, None
    for length in range(1, min(OR_OPT_MAX_SEGMENT, n - 2) + 1):
        for s in range(1, n - length + 1):
            seg = order[s:s + length]
            prev, after = order[s - 1], order[(s + length) % n]
            removed = matrix[prev, seg[0]] + matrix[seg[-1], after] - matrix[prev, after]
            rest = np.concatenate((order[:s], order[s + length:]))
            rest_next = np.roll(rest, -1)
            delta = (matrix[rest, seg[0]] + matrix[seg[-1], rest_next]
                     - matrix[rest, rest_next] - removed)
            # putting the segment back where it was
            delta[s - 1] = np.inf
            q = int(np.argmin(delta))
            if delta[q] < best_delta:
                best_delta = float(delta[q])
                best_order = np.concatenate((rest[:q + 1], seg, rest[q + 1:]))
    return best_delta, best_order


def improve_tour(instance: Instance, tour: Sequence[int]) -> list[int]:
    """2-opt and Or-opt descent on the instance's arc set; best move per pass.

    tour is 1-based and starts at vertex 1; so does the result. Moves that
    would use a non-candidate arc carry the mask cost and are never taken.
    """
    matrix, _ = masked_cost_matrix(instance)
    order = np.asarray(tour, dtype=np.int64) - 1
    if len(order) < 4:
        return [int(v) + 1 for v in order]
    for _ in range(LOCAL_SEARCH_MAX_PASSES):
        two_delta, i, j = _best_two_opt(matrix, order)
        or_delta, or_order = _best_or_opt(matrix, order)
        if min(two_delta, or_delta) >= -EPS:
            break
        if two_delta <= or_delta:
            order = np.concatenate((order[:i + 1], order[i + 1:j + 1][::-1], order[j + 1:]))
        else:
            order = or_order
    return [int(v) + 1 for v in order]


def heuristic_tour(instance: Instance) -> Optional[ArcSolution]:
    """Nearest-neighbour tour polished by improve_tour; None if the walk dead-ends."""
    walk = _greedy_walk(instance)
    if walk is None:
        return None
    greedy = _tour_solution(instance, walk)
    polished = _tour_solution(instance, improve_tour(instance, walk))
    return polished if polished.objective < greedy.objective - EPS else greedy


# ---------------------------------------------------------------------------
# Branch-and-bound over the restricted model
# ---------------------------------------------------------------------------


def _cycles_of(successors: np.ndarray) -> list[int]:
    """Cycle bitmasks (bit v-1 for vertex v) of a 0-based successor array."""
    n = len(successors)
    seen = [False] * n
    masks = []
    for start in range(n):
        if seen[start]:
            continue
        m = 0
        v = start
        while not seen[v]:
            seen[v] = True
            m |= 1 << v
            v = int(successors[v])
        masks.append(m)
    return masks


def _node_matrix(base: np.ndarray, big: float, node: BnbNode) -> np.ndarray:
    matrix = base.copy()
    for i, j in node.forbidden_arcs:
        matrix[i, j] = big
    for i, j in node.required_arcs:
        keep = matrix[i, j]
        matrix[i, :] = big
        matrix[:, j] = big
        matrix[i, j] = keep
    return matrix


def _patch_cycles(
    successors: np.ndarray,
    base: np.ndarray,
    big: float,
    cut_masks: frozenset[int],
) -> Optional[np.ndarray]:
    """Karp patching: merge cycles until no active cut is violated.

    The smallest violated subset S is a union of cycles; the cheapest
    exchange a->s(a), b->s(b) into a->s(b), b->s(a) with a in S and b
    outside joins two cycles across the border of S. Every merge removes a
    cycle, so the loop ends. None when a merge would need a non-candidate arc.
    """
    succ = successors.copy()
    n = len(succ)
    while True:
        violated = violated_cut_masks(_cycles_of(succ), cut_masks)
        if not violated:
            return succ
        subset = min(violated, key=lambda m: (bin(m).count("1"), m))
        inside = np.array([v for v in range(n) if subset >> v & 1])
        outside = np.array([v for v in range(n) if not subset >> v & 1])
        delta = (base[inside[:, None], succ[outside][None, :]]
                 + base[outside[None, :], succ[inside][:, None]]
                 - base[inside, succ[inside]][:, None]
                 - base[outside, succ[outside]][None, :])
        k = int(np.argmin(delta))
        a, b = int(inside[k // outside.size]), int(outside[k % outside.size])
        if base[a, succ[b]] >= big or base[b, succ[a]] >= big:
            return None
        succ[a], succ[b] = succ[b], succ[a]


def solve_restricted_exact(
    model: RestrictedModel,
    budget: Optional[float] = None,
    incumbent: Optional[ArcSolution] = None,
) -> ExactResult:
    """Optimal selection under degree constraints and every active cut.

    incumbent, if given, must satisfy the model (any Hamiltonian tour does);
    otherwise heuristic_tour supplies one when the model has cuts.
    """
    started = time.perf_counter()
    instance = model.instance
    n = instance.n
    base, big = masked_cost_matrix(instance)
    cut_masks = model.cut_masks

    if incumbent is None and cut_masks:
        # any Hamiltonian tour satisfies every SEC
        incumbent = heuristic_tour(instance)
    incumbent_value = incumbent.objective if incumbent is not None else float("inf")

    stack = [BnbNode()]
    nodes = 0
    exhausted = False
    while stack:
        if budget is not None and time.perf_counter() - started > budget:
            exhausted = True
            break
        node = stack.pop()
        nodes += 1
        if node.lower_bound >= incumbent_value - EPS:
            continue

        result = _solve_assignment(_node_matrix(base, big, node), big)
        if result is None:
            continue
        successors, value = result
        if value >= incumbent_value - EPS:
            continue

        violated = violated_cut_masks(_cycles_of(successors), cut_masks)
        if not violated:
            incumbent = _solution_from_successors(successors, instance)
            incumbent_value = incumbent.objective
            continue

        patched = _patch_cycles(successors, base, big, cut_masks)
        if patched is not None:
            patched_value = float(base[np.arange(n), patched].sum())
            if patched_value < incumbent_value - EPS:
                incumbent = _solution_from_successors(patched, instance)
                incumbent_value = incumbent.objective
                if value >= incumbent_value - EPS:
                    continue

        subset = min(violated, key=lambda m: (bin(m).count("1"), m))
        inside = [(v, int(successors[v])) for v in range(n) if subset >> v & 1]
        inside.sort(key=lambda a: (base[a], a))

        children = []
        required = set(node.required_arcs)
        for arc in inside:
            children.append(BnbNode(
                forbidden_arcs=node.forbidden_arcs | {arc},
                required_arcs=frozenset(required),
                lower_bound=value,
            ))
            required.add(arc)
        stack.extend(reversed(children))

    wall = time.perf_counter() - started
    if exhausted:
        log.debug("[EXACT] budget %.2fs exhausted after %d nodes", budget, nodes)
        if incumbent is None:
            raise BudgetExhausted(
                f"budget of {budget}s exhausted after {nodes} nodes without a feasible selection"
            )
        return ExactResult(incumbent, optimal=False, nodes_explored=nodes, wall_time=wall)
    if incumbent is None:
        raise Infeasible(
            f"no selection satisfies the degree constraints and {len(model.cuts)} active cuts"
        )
    log.debug(
        "[EXACT] n=%d cuts=%d nodes=%d objective=%.2f time=%.3fs",
        n, len(model.cuts), nodes, incumbent.objective, wall,
    )
    return ExactResult(incumbent, optimal=True, nodes_explored=nodes, wall_time=wall)


# ---------------------------------------------------------------------------
# Oracles
# ---------------------------------------------------------------------------


def _inf_cost_matrix(instance: Instance) -> np.ndarray:
    matrix = np.full((instance.n, instance.n), np.inf)
    if instance.arcs:
        idx = np.asarray(instance.arcs) - 1
        matrix[idx[:, 0], idx[:, 1]] = instance.costs[idx[:, 0], idx[:, 1]]
    return matrix


def _tour_result(instance: Instance, tour: list[int], nodes: int, started: float) -> ExactResult:
    arcs = list(zip(tour, tour[1:] + tour[:1]))
    solution = evaluate(RestrictedModel(instance=instance), arcs)
    return ExactResult(
        solution=solution,
        optimal=True,
        nodes_explored=nodes,
        wall_time=time.perf_counter() - started,
    )


def held_karp(instance: Instance) -> ExactResult:
    """Optimal Hamiltonian tour by dynamic programming over subsets."""
    n = instance.n
    if n > HELD_KARP_MAX_N:
        raise TooLarge(f"held_karp supports n <= {HELD_KARP_MAX_N}, got {n}")
    started = time.perf_counter()
    cost = _inf_cost_matrix(instance)

    # vertex 1 is the depot; bit j stands for vertex j + 2
    m = n - 1
    full = 1 << m
    dp = np.full((full, m), np.inf)
    parent = np.full((full, m), -1, dtype=np.int16)
    for j in range(m):
        dp[1 << j, j] = cost[0, j + 1]

    masks = np.arange(full)
    popcount = np.zeros(full, dtype=np.int64)
    for b in range(m):
        popcount += (masks >> b) & 1

    inner = cost[1:, 1:]
    for size in range(2, m + 1):
        layer = masks[popcount == size]
        for j in range(m):
            with_j = layer[((layer >> j) & 1) == 1]
            prev = with_j ^ (1 << j)
            candidates = dp[prev] + inner[:, j][None, :]
            best = np.argmin(candidates, axis=1)
            dp[with_j, j] = candidates[np.arange(len(with_j)), best]
            parent[with_j, j] = best

    closing = dp[full - 1] + cost[1:, 0]
    last = int(np.argmin(closing))
    if not np.isfinite(closing[last]):
        raise Infeasible("the arc set admits no Hamiltonian cycle")

    order = []
    mask, j = full - 1, last
    while j >= 0:
        order.append(j)
        k = int(parent[mask, j])
        mask ^= 1 << j
        j = k
    tour = [1] + [v + 2 for v in reversed(order)]
    return _tour_result(instance, tour, nodes=full * m, started=started)


def brute_force_tsp(instance: Instance) -> ExactResult:
    """Minimum over all (n-1)! directed tours starting at vertex 1."""
    n = instance.n
    if n > BRUTE_FORCE_MAX_N:
        raise TooLarge(f"brute_force_tsp supports n <= {BRUTE_FORCE_MAX_N}, got {n}")
    started = time.perf_counter()
    cost = _inf_cost_matrix(instance)

    paths = np.array(list(permutations(range(1, n))), dtype=np.int64)
    totals = cost[0, paths[:, 0]] + cost[paths[:, -1], 0]
    totals = totals + cost[paths[:, :-1], paths[:, 1:]].sum(axis=1)
    best = int(np.argmin(totals))
    if not np.isfinite(totals[best]):
        raise Infeasible("the arc set admits no Hamiltonian cycle")
    tour = [1] + [int(v) + 1 for v in paths[best]]
    return _tour_result(instance, tour, nodes=len(paths), started=started)
