#!/usr/bin/env python3
"""
Validation: model domain types and pure formulation helpers.

Tests:
1. Counting laws: 2n degree constraints, 2^n - 2 - n SECs, published CILP totals.
2. SEC enumeration order and size guards.
3. evaluate: objective, degree feasibility, cycle counts, unknown arcs.
4. Violated cuts: only unions of cycles are violated; both detection paths agree.
5. RestrictedModel validation and immutability of with_cuts.
"""

import numpy as np

from check_support import berlin, check, finish, raises, section

from app.model.domain import (
    ArcSolution,
    Instance,
    OutOfRange,
    RestrictedModel,
    SecCut,
    TooLarge,
    UnknownArc,
    complete_arcs,
)
from app.model.formulation import (
    complexity_of,
    cycle_masks,
    degree_constraint_count,
    enumerate_all_secs,
    evaluate,
    satisfies_model,
    sec_count_complete,
    successor_cycles,
    violated_cut_masks,
    violated_cuts,
    weak_components,
)

section("counting laws")
CILP_TOTALS = {5: 35, 6: 68, 7: 133, 8: 262, 9: 519, 10: 1032, 11: 2057,
               13: 8203, 15: 32781, 20: 1048594}
for n, total in CILP_TOTALS.items():
    check(degree_constraint_count(n) + sec_count_complete(n) == total,
          f"CILP constraints at n={n} = {total}")
check(sec_count_complete(3) == 3, "n=3 has three 2-subsets")
check(raises(OutOfRange, sec_count_complete, 2), "n=2 is OutOfRange")
check(raises(TooLarge, sec_count_complete, 63), "n=63 overflows the count guard")
check(sec_count_complete(62) == 2 ** 62 - 64, "n=62 still counts")
for n in (5, 10, 20, 45):
    check(len(complete_arcs(n)) == n * (n - 1), f"complete arc count n={n}")

section("enumeration")
secs5 = enumerate_all_secs(5)
check(len(secs5) == sec_count_complete(5), "enumerate_all_secs(5) has 25 cuts")
check(secs5[0].subset == frozenset({1, 2}), "first cut is {1,2}")
check(secs5[-1].subset == frozenset({2, 3, 4, 5}), "last cut is {2,3,4,5}")
check(all(2 <= len(c.subset) <= 4 for c in secs5), "sizes are 2..n-1")
check(raises(TooLarge, enumerate_all_secs, 23), "enumeration guard at n=23")
check(SecCut(frozenset({1, 3})).mask == 0b101 and SecCut(frozenset({1, 3})).rhs == 1,
      "cut mask and rhs")
check(raises(ValueError, SecCut, frozenset({4})), "single-vertex cut is rejected")

section("evaluate")
inst = berlin(5)
model = RestrictedModel(instance=inst)
tour = [(1, 2), (2, 3), (3, 4), (4, 5), (5, 1)]
sol = evaluate(model, tour)
expected = sum(inst.cost(i, j) for i, j in tour)
check(abs(sol.objective - expected) < 1e-9, "objective is the arc cost sum")
check(sol.degree_feasible and sol.cycle_count == 1 and sol.is_tour, "5-cycle is a tour")
split = evaluate(model, [(1, 2), (2, 3), (3, 1), (4, 5), (5, 4)])
check(split.degree_feasible and split.cycle_count == 2, "(1,2,3)(4,5) has two cycles")
check(successor_cycles(5, split.successors) == [(1, 2, 3), (4, 5)], "cycles in visiting order")
broken = evaluate(model, [(1, 2), (2, 1), (3, 4)])
check(not broken.degree_feasible, "missing arcs break degree feasibility")
check(broken.cycle_count == len(weak_components(5, broken.selected)) == 3,
      "degree-infeasible cycle_count counts weak components")
check(raises(UnknownArc, evaluate, model, [(1, 1)]), "self-loop is an unknown arc")
reduced = inst.with_arcs(((1, 2), (2, 1), (2, 3), (3, 2), (3, 4), (4, 3), (4, 5), (5, 4), (5, 1), (1, 5)))
check(raises(UnknownArc, evaluate, RestrictedModel(instance=reduced), [(1, 3)]),
      "filtered arc is an unknown arc")

section("violated cuts")
cut123 = SecCut(frozenset({1, 2, 3}))
cut12 = SecCut(frozenset({1, 2}))
cut45 = SecCut(frozenset({4, 5}))
m2 = RestrictedModel(instance=inst, cuts=(cut123, cut12, cut45))
check([c.subset for c in violated_cuts(m2, split)] == [cut123.subset, cut45.subset],
      "split violates {1,2,3} and {4,5} but not {1,2}")
check(not satisfies_model(m2, split), "split does not satisfy the model")
check(satisfies_model(m2, sol), "a tour satisfies every SEC")
check(satisfies_model(model, split), "without cuts the split is feasible")

rng = np.random.default_rng(7)
agree = True
for _ in range(200):
    perm = rng.permutation(9) + 1
    succ = {v + 1: int(perm[v]) for v in range(9)}
    if any(k == v for k, v in succ.items()):
        continue
    masks = cycle_masks(successor_cycles(9, succ))
    pool = frozenset(int(m) for m in rng.integers(1, (1 << 9) - 1, size=40))
    by_scan = sorted(m for m in pool if all((cm & m) in (0, cm) for cm in masks))
    agree &= violated_cut_masks(masks, pool) == by_scan
    if len(masks) > 1:
        union = masks[0] | masks[1]
        agree &= union in violated_cut_masks(masks, frozenset({union}))
check(agree, "union enumeration and pool scan agree on random permutations")

section("restricted model")
check(raises(ValueError, RestrictedModel, inst, (cut12, SecCut(frozenset({1, 2})))),
      "duplicate cuts are rejected")
check(raises(ValueError, RestrictedModel, inst, (SecCut(frozenset({1, 2, 3, 4, 5})),)),
      "a cut over V is rejected")
check(raises(OutOfRange, RestrictedModel, inst, (SecCut(frozenset({4, 6})),)),
      "out-of-range cut member is rejected")
grown = model.with_cuts((cut12,))
check(model.cuts == () and grown.cuts == (cut12,), "with_cuts returns a new model")
stats = complexity_of(grown)
check((stats.num_vars, stats.num_degree_constraints, stats.num_sec_constraints) == (20, 10, 1),
      "complexity of a CPA model")
check(complexity_of(model, complete=True).total_constraints == 35, "complexity of the CILP model")
check(raises(OutOfRange, Instance, 2, np.zeros((2, 2))), "instance needs 3 vertices")
check(isinstance(sol, ArcSolution), "evaluate returns an ArcSolution")

finish("Core model")
