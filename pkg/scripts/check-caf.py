#!/usr/bin/env python3
"""
Validation: cost-based arc filtering.

Tests:
1. Reduced variable counts on berlin52 prefixes match the published sizes.
2. The reduced arc set is symmetric, keeps costs and contains every kept pair.
3. Dirac certificate holds for k = ceil(n/2) on every n in 5..45.
4. Filtered graphs keep a Hamiltonian cycle (Held-Karp, n <= 12).
5. Bad inputs: k out of range, incomplete input, asymmetric arc set.
"""

from check_support import SLOW, berlin, check, finish, raises, section

from app.model.domain import Infeasible
from app.preprocessing.caf import (
    AsymmetricArcSet,
    BadK,
    CafConfig,
    caf_filter,
    default_k,
    hamiltonicity_certificate,
    nearest_neighbours,
)
from app.solvers.exact_backend import held_karp

CAF_VARS = {5: 18, 6: 24, 7: 34, 8: 42, 9: 58, 10: 64, 11: 88, 12: 96, 13: 118, 14: 126,
            15: 154, 20: 262, 25: 420, 30: 562, 35: 806, 40: 1056, 45: 1358}

section("variable counts")
for n, want in CAF_VARS.items():
    got = berlin(n, caf=True).num_arcs
    check(got == want, f"n={n}: {got} arcs with CAF (expected {want})")

section("structure")
full = berlin(10)
reduced = caf_filter(full, CafConfig.for_n(10))
arcs = reduced.arc_set
check(all((j, i) in arcs for i, j in arcs), "reduced arc set is symmetric")
check(reduced.costs is full.costs, "costs are shared, not changed")
kept = all((i, j) in arcs for i in range(1, 11) for j in nearest_neighbours(full, i, 5))
check(kept, "every vertex keeps its 5 nearest neighbours")
check(default_k(5) == 3 and default_k(10) == 5 and default_k(45) == 23, "k = ceil(n/2)")
check(nearest_neighbours(full, 1, 3) == sorted(
    (j for j in range(2, 11)), key=lambda j: (full.cost(1, j), j))[:3],
      "neighbours ordered by (cost, index)")

section("Dirac certificate")
all_certified = all(hamiltonicity_certificate(berlin(n, caf=True)) for n in range(5, 46))
check(all_certified, "certificate holds for n = 5..45")
check(hamiltonicity_certificate(full), "complete graph is certified")
sparse = caf_filter(full, CafConfig(k=1))
check(not hamiltonicity_certificate(sparse), "k=1 is inconclusive")

section("feasibility preserved")
hk_max = 15 if SLOW else 12
for n in range(5, hk_max + 1):
    try:
        result = held_karp(berlin(n, caf=True))
        check(result.solution.is_tour, f"n={n}: reduced graph has a Hamiltonian cycle")
    except Infeasible:
        check(False, f"n={n}: reduced graph has a Hamiltonian cycle")
check(abs(held_karp(berlin(6, caf=True)).solution.objective - 2323.20) < 0.01,
      "n=6: filtered optimum 2323.20 is above the full optimum 2315.15")

section("errors")
check(raises(BadK, CafConfig, 0), "k=0 is rejected")
check(raises(BadK, caf_filter, full, CafConfig(k=10)), "k=n is rejected")
check(raises(BadK, caf_filter, reduced, CafConfig(k=3)), "CAF needs a complete input")
one_way = full.with_arcs(((1, 2), (2, 3), (3, 1)) + tuple(
    (i, j) for i in range(4, 11) for j in range(4, 11) if i != j))
check(raises(AsymmetricArcSet, hamiltonicity_certificate, one_way), "asymmetric arc set is rejected")

finish("CAF")
