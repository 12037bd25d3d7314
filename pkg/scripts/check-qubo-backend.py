#!/usr/bin/env python3
"""
Validation: penalty QUBO encoding.

Tests:
1. Slack weights represent exactly 0..|S|-1.
2. Variable registry: arcs first (instance order), then slack bits per cut.
3. Several cuts: arc and slack labels never share a key.
4. Exhaustive check (dimod.ExactSolver), n=5 CAF without cuts: the minimum
   energy over all degree-feasible assignments is the restricted optimum,
   and every infeasible assignment costs more.
5. Exhaustive check, n=5 CAF with two cuts: the ground state carries slack
   bits and decodes to the restricted optimum.
6. Exhaustive check, n=4 with every SEC: feasible minimum is the tour
   optimum, violations never undercut it, encoded slack is optimal.
7. energy() and energies() agree; decode drops slack bits.
8. Text export is deterministic and carries the variable count.
"""

import itertools

import dimod
import numpy as np

from check_support import berlin, check, finish, raises, section

from app.model.domain import RestrictedModel, SecCut
from app.model.formulation import enumerate_all_secs, evaluate, satisfies_model
from app.solvers.exact_backend import brute_force_tsp, solve_restricted_exact
from app.solvers.qubo_backend import (
    ArcVar,
    LengthMismatch,
    SlackVar,
    auto_penalty,
    decode,
    encode_solution,
    energies,
    energy,
    export_qubo_text,
    slack_weights_for,
    to_qubo,
)

section("slack weights")
for size in range(2, 20):
    w = slack_weights_for(size)
    values = {sum(c * b for c, b in zip(w, bits)) for bits in itertools.product((0, 1), repeat=len(w))}
    check(values == set(range(size)), f"|S|={size}: weights {w} cover 0..{size - 1}")

section("registry")
inst5 = berlin(5, caf=True)
model5 = RestrictedModel(instance=inst5)
q5 = to_qubo(model5)
check(q5.num_vars == 18 and q5.num_slack_vars == 0, "n=5 CAF without cuts has 18 variables")
check(q5.tags == tuple(ArcVar(i, j) for i, j in inst5.arcs), "arc variables follow instance order")
check(q5.penalty_weight == auto_penalty(model5) == 5 * inst5.max_arc_cost + 1, "P = n * c_max + 1")
check(all(a < b for a, b in q5.quadratic), "quadratic keys are upper triangular")
cut = SecCut(frozenset({1, 2, 3}))
qc = to_qubo(model5.with_cuts((cut,)))
check(qc.tags[18:] == (SlackVar(0, 0), SlackVar(0, 1)), "slack bits follow the arcs")
check(raises(ValueError, to_qubo, model5, -1.0), "non-positive penalty is rejected")

section("registry with several cuts")
inst6 = berlin(6)
cuts6 = (SecCut(frozenset({1, 2})), SecCut(frozenset({3, 4})), SecCut(frozenset({1, 2, 3})))
q6 = to_qubo(RestrictedModel(instance=inst6, cuts=cuts6))
check(q6.num_vars == inst6.num_arcs + 4, "30 arcs plus 1 + 1 + 2 slack bits")
check(len(set(q6.tags)) == q6.num_vars and sorted(q6.var_registry.values()) == list(range(q6.num_vars)),
      "every label is distinct and every index is used once")
check(SlackVar(2, 1) != ArcVar(2, 1) and hash(SlackVar(2, 1)) == hash(ArcVar(2, 1)),
      "slack and arc labels with equal fields stay different keys")
check(q6.var_registry[SlackVar(2, 1)] != q6.var_registry[ArcVar(2, 1)], "slack bit (2, 1) has its own index")
check(len(q6.linear) == q6.num_vars and max(b for _, b in q6.quadratic) < q6.num_vars,
      "linear and quadratic views cover every variable")
check(isinstance(q6.bqm, dimod.BinaryQuadraticModel) and q6.bqm.vartype is dimod.BINARY, "a BINARY dimod BQM")

section("exhaustive n=5 CAF, no cuts")
exact = solve_restricted_exact(model5).solution.objective


def exact_rows(qubo):
    """ExactSolver rows with columns in QUBO label order."""
    sampleset = dimod.ExactSolver().sample(qubo.bqm)
    labels = list(sampleset.variables)
    columns = [labels.index(tag) for tag in qubo.tags]
    return sampleset, sampleset.record.sample[:, columns], sampleset.record.energy


every5, states, e = exact_rows(q5)
m = q5.num_vars
arcs = np.array(inst5.arcs)
out_inc = np.zeros((m, 5))
in_inc = np.zeros((m, 5))
out_inc[np.arange(m), arcs[:, 0] - 1] = 1
in_inc[np.arange(m), arcs[:, 1] - 1] = 1
feasible = ((states @ out_inc) == 1).all(axis=1) & ((states @ in_inc) == 1).all(axis=1)
check(len(every5) == 1 << 18, "ExactSolver lists all 2^18 assignments")
check(abs(e[feasible].min() - exact) < 1e-6, "min feasible energy is the restricted optimum")
check(bool((e[~feasible] >= e[feasible].min()).all()), "every infeasible assignment costs more")
check(bool((e[~feasible] >= q5.penalty_weight).all()), "every degree violation pays at least P")
check(bool(np.allclose(e, energies(q5, states))), "energies() matches the BQM on every row")

section("exhaustive n=5 CAF, cuts with slack bits")
model5c = model5.with_cuts((SecCut(frozenset({1, 2})), SecCut(frozenset({4, 5}))))
q5c = to_qubo(model5c)
check(q5c.num_slack_vars == 2, "one slack bit per two-vertex cut")
every5c, states_c, e_c = exact_rows(q5c)
exact_c = solve_restricted_exact(model5c).solution.objective
first, first_ok = decode(q5c, states_c[int(np.argmin(e_c))], model5c)
check(first_ok and first.is_tour, "ground state decodes to a feasible tour")
check(abs(float(e_c.min()) - exact_c) < 1e-6 and abs(first.objective - exact_c) < 1e-6,
      f"ground energy is the restricted optimum {exact_c:.2f}")
check(abs(every5c.first.energy - exact_c) < 1e-6, "SampleSet.first agrees")

section("exhaustive n=4, every SEC")
inst4 = berlin(4)
model4 = RestrictedModel(instance=inst4, cuts=tuple(enumerate_all_secs(4)))
q4 = to_qubo(model4)
arcs4 = inst4.arcs
best_feasible = float("inf")
violating = []
for pattern in range(1 << len(arcs4)):
    selected = [arcs4[k] for k in range(len(arcs4)) if pattern >> k & 1]
    value = energy(q4, encode_solution(q4, selected))
    if satisfies_model(model4, evaluate(model4, selected)):
        best_feasible = min(best_feasible, value)
    else:
        violating.append(value)
tour4 = brute_force_tsp(inst4).solution.objective
check(abs(best_feasible - tour4) < 1e-6, "min feasible energy is the tour optimum")
check(min(violating) >= best_feasible, "no violating assignment undercuts it")

rng = np.random.default_rng(3)
slack_idx = [q4.var_registry[t] for t in q4.tags if isinstance(t, SlackVar)]
slack_ok = True
for _ in range(4):
    selected = [a for a in arcs4 if rng.random() < 0.4]
    base = encode_solution(q4, selected).astype(float)
    combos = ((np.arange(1 << len(slack_idx))[:, None] >> np.arange(len(slack_idx))) & 1)
    trial = np.tile(base, (len(combos), 1))
    trial[:, slack_idx] = combos
    slack_ok &= bool(energies(q4, trial).min() >= energy(q4, base) - 1e-6)
check(slack_ok, "encoded slack values minimise the energy")

section("evaluation helpers")
bits = rng.integers(0, 2, size=(32, qc.num_vars))
vec = energies(qc, bits.astype(float))
check(all(abs(vec[r] - energy(qc, bits[r])) < 1e-6 for r in range(32)), "energy and energies agree")
tour = list(brute_force_tsp(inst5).solution.selected)
x = encode_solution(qc, tour)
x_noise = x.copy()
x_noise[18:] = 1 - x_noise[18:]
sol, _ = decode(qc, x_noise, qc.model)
check(sol.selected == tuple(tour) and sol.is_tour, "decode ignores slack bits")
check(raises(LengthMismatch, energy, qc, [0] * 3), "wrong bit count is rejected")

section("text export")
text = export_qubo_text(q5)
check(text.splitlines()[0] == "# tsp-cutplane qubo v1", "magic header")
check("# variables: 18" in text, "header carries the variable count")
check(text == export_qubo_text(to_qubo(RestrictedModel(instance=berlin(5, caf=True)))),
      "export is deterministic")
check(sum(1 for line in text.splitlines() if not line.startswith("#")) == 18 + len(q5.quadratic),
      "one line per linear and quadratic term")

finish("QUBO backend")
