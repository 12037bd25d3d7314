#!/usr/bin/env python3
"""
Validation: exact solvers.

Tests:
1. Assignment relaxation returns a cycle cover of minimum cost.
2. Restricted branch-and-bound with every SEC equals Held-Karp and brute force.
3. Published optima for n = 5..12 (Held-Karp cross-check).
4. Heuristic incumbent: 2-opt and Or-opt polish the nearest-neighbour tour.
5. Given incumbents and patched upper bounds never change the optimum.
6. Active cuts only: a model without cuts returns the assignment optimum.
7. Budget handling: incumbent -> optimal=False, no incumbent -> BudgetExhausted.
8. Oracles refuse sizes beyond their guards.
"""

import numpy as np

from check_support import SLOW, berlin, check, finish, raises, section

from app.model.domain import Infeasible, RestrictedModel, SecCut, TooLarge
from app.model.formulation import enumerate_all_secs, satisfies_model
from app.solvers.exact_backend import (
    BudgetExhausted,
    brute_force_tsp,
    held_karp,
    heuristic_tour,
    hungarian_assignment,
    improve_tour,
    masked_cost_matrix,
    nearest_neighbor_tour,
    solve_restricted_exact,
)

OPTIMA = {5: 2314.55, 6: 2315.15, 7: 2321.39, 8: 2550.94, 9: 2820.38, 10: 2826.50,
          11: 4038.44, 12: 4056.68, 13: 4564.46, 14: 4946.85, 15: 4967.30}

section("assignment relaxation")
costs = np.array([
    [np.inf, 1.0, 9.0, 9.0],
    [1.0, np.inf, 9.0, 9.0],
    [9.0, 9.0, np.inf, 2.0],
    [9.0, 9.0, 2.0, np.inf],
])
ap = hungarian_assignment(costs)
check(ap.selected == ((1, 2), (2, 1), (3, 4), (4, 3)), "two 2-cycles are the cheapest cover")
check(abs(ap.objective - 6.0) < 1e-12 and ap.cycle_count == 2, "cover cost 6, two cycles")
blocked = costs.copy()
blocked[0, :] = np.inf
check(raises(Infeasible, hungarian_assignment, blocked), "a vertex without outgoing arcs is infeasible")

inst5 = berlin(5)
free = solve_restricted_exact(RestrictedModel(instance=inst5))
matrix, big = masked_cost_matrix(inst5)
check(big == 5 * inst5.max_arc_cost + 1, "mask value is n * c_max + 1")
check(free.optimal and free.solution.degree_feasible, "no cuts: assignment optimum")
check(free.solution.objective <= brute_force_tsp(inst5).solution.objective + 1e-9,
      "assignment bound never exceeds the tour optimum")

section("restricted B&B vs oracles")
for n in range(5, 9):
    inst = berlin(n)
    model = RestrictedModel(instance=inst, cuts=tuple(enumerate_all_secs(n)))
    bnb = solve_restricted_exact(model)
    hk = held_karp(inst)
    bf = brute_force_tsp(inst)
    same = abs(bnb.solution.objective - hk.solution.objective) < 1e-6 \
        and abs(hk.solution.objective - bf.solution.objective) < 1e-6
    check(bnb.optimal and bnb.solution.is_tour and same, f"n={n}: B&B = Held-Karp = brute force")
    check(satisfies_model(model, bnb.solution), f"n={n}: B&B solution satisfies every SEC")

section("published optima")
hk_max = 15 if SLOW else 12
for n in range(5, hk_max + 1):
    got = held_karp(berlin(n)).solution.objective
    check(abs(got - OPTIMA[n]) < 0.01, f"n={n}: Held-Karp {got:.2f} (expected {OPTIMA[n]:.2f})")
bf10 = brute_force_tsp(berlin(10)) if SLOW else brute_force_tsp(berlin(8))
check(bf10.solution.is_tour, "brute force returns a tour")


section("heuristic incumbent")
for n in (8, 10, 12):
    inst = berlin(n)
    walk = nearest_neighbor_tour(inst)
    polished = heuristic_tour(inst)
    check(polished.is_tour and polished.objective <= walk.objective + 1e-9,
          f"n={n}: polished tour {polished.objective:.2f} <= nearest neighbour {walk.objective:.2f}")
    check(polished.objective >= OPTIMA[n] - 0.01, f"n={n}: never below the optimum")
inst10 = berlin(10)
order = improve_tour(inst10, list(range(1, 11)))
check(order[0] == 1 and sorted(order) == list(range(1, 11)), "improve_tour keeps a permutation from vertex 1")


def tour_cost(inst, tour):
    return sum(inst.cost(a, b) for a, b in zip(tour, tour[1:] + tour[:1]))


check(tour_cost(inst10, order) <= tour_cost(inst10, list(range(1, 11))) + 1e-9, "improve_tour never worsens")
check(improve_tour(berlin(3), [1, 2, 3]) == [1, 2, 3], "fewer than four vertices: unchanged")
caf12 = berlin(12, caf=True)
on_caf = heuristic_tour(caf12)
check(on_caf is None or set(on_caf.selected) <= caf12.arc_set, "CAF tours use candidate arcs only")

section("given incumbents and patched bounds")
for n in (8, 9):
    inst = berlin(n)
    model = RestrictedModel(instance=inst, cuts=tuple(enumerate_all_secs(n)))
    seeded = solve_restricted_exact(model, incumbent=nearest_neighbor_tour(inst))
    check(seeded.optimal and abs(seeded.solution.objective - OPTIMA[n]) < 0.01,
          f"n={n}: a weak incumbent still ends at the optimum")
    tight = solve_restricted_exact(model, incumbent=held_karp(inst).solution)
    check(tight.optimal and abs(tight.solution.objective - OPTIMA[n]) < 0.01,
          f"n={n}: an optimal incumbent is kept")
few = RestrictedModel(instance=berlin(10), cuts=(SecCut(frozenset({1, 2})), SecCut(frozenset({3, 4, 5}))))
few_result = solve_restricted_exact(few)
check(few_result.optimal and satisfies_model(few, few_result.solution), "two active cuts: optimum satisfies both")
check(few_result.solution.objective <= heuristic_tour(berlin(10)).objective + 1e-9,
      "the restricted optimum never exceeds a tour")
section("active cuts only")
split_cut = SecCut(frozenset({1, 2}))
partial = solve_restricted_exact(RestrictedModel(instance=inst5, cuts=(split_cut,)))
sel = set(partial.solution.selected)
check(not ((1, 2) in sel and (2, 1) in sel), "the active cut {1,2} holds")
check(partial.optimal, "partial model solved to optimality")

section("budget")
nn = nearest_neighbor_tour(berlin(8))
check(nn is not None and nn.is_tour, "nearest-neighbour tour on the complete graph")
cut_model = RestrictedModel(instance=berlin(8), cuts=(SecCut(frozenset({1, 2})),))
early = solve_restricted_exact(cut_model, budget=1e-12)
check(not early.optimal and early.solution.is_tour, "exhausted budget returns the incumbent")
try:
    solve_restricted_exact(RestrictedModel(instance=berlin(8)), budget=1e-12)
    check(False, "no incumbent -> BudgetExhausted")
except BudgetExhausted as exc:
    check(exc.incumbent is None, "no incumbent -> BudgetExhausted")

section("guards")
check(raises(TooLarge, held_karp, berlin(19)), "Held-Karp stops at n=18")
check(raises(TooLarge, brute_force_tsp, berlin(11)), "brute force stops at n=10")

finish("Exact backend")
