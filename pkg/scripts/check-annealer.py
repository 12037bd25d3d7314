#!/usr/bin/env python3
"""
Validation: simulated annealer, read schedule and time accounting.

Tests:
1. Read schedule: 1000 + 100 * cuts capped at 4651 reads, 215 us per read.
2. Temperature ladder endpoints and monotonicity.
3. A single-variable QUBO anneals to its ground state; the sampler is dimod-compatible.
4. Reads are reproducible and do not depend on batching.
5. Distinct arc patterns decode like single rows; multi-cut QUBOs anneal.
6. A small restricted model is solved to its optimum.
7. Time accounting: modelled QPU time, totals, negative phases.
"""

import dimod
import numpy as np

from check_support import berlin, check, finish, raises, section

from app.model.domain import RestrictedModel, SecCut
from app.solvers.annealer import (
    LadderAnnealingSampler,
    PhaseTimer,
    ReadMode,
    ReadSchedule,
    account_time,
    anneal,
    compute_num_reads,
    temperature_ladder,
)
from app.solvers.exact_backend import solve_restricted_exact
from app.solvers.qubo_backend import ArcVar, QuboProblem, decode, to_qubo

section("read schedule")
sched = ReadSchedule()
check(sched.time_per_read_us == 215 and sched.num_reads_max == 4651, "215 us per read, 4651 reads max")
check(compute_num_reads(sched, 0) == 1000, "no cuts: 1000 reads")
check(compute_num_reads(sched, 10) == 2000, "10 cuts: 2000 reads")
check(compute_num_reads(sched, 36) == 4600 and compute_num_reads(sched, 37) == 4651,
      "the cap binds from 37 cuts")
check(compute_num_reads(sched, 12, ReadMode.CILP) == compute_num_reads(sched, 12),
      "CILP follows the same law")
check(raises(ValueError, compute_num_reads, sched, -1), "negative cut count is rejected")
check(raises(ValueError, ReadSchedule, 0), "non-positive n_start is rejected")

section("temperature ladder")
q5 = to_qubo(RestrictedModel(instance=berlin(5, caf=True)))
ladder = temperature_ladder(q5, 500)
check(len(ladder) == 500 and abs(ladder[0] - q5.penalty_weight) < 1e-9, "ladder starts at P")
check(abs(ladder[-1] - 1e-3 * np.mean(np.abs(q5.linear))) < 1e-9, "ladder ends at 1e-3 * mean|linear|")
check(bool(np.all(np.diff(ladder) < 0)), "ladder is strictly decreasing")
check(len(temperature_ladder(q5, 1)) == 1, "one sweep, one temperature")

section("single variable")
single = QuboProblem(
    bqm=dimod.BinaryQuadraticModel({ArcVar(1, 2): -1.0}, {}, 0.0, dimod.BINARY),
    penalty_weight=1.0,
)
ss = anneal(single, num_reads=8, sweeps=50, seed=1)
check(bool(np.all(ss.sampleset.record.sample == 1)), "every read ends in x = 1")
check(bool(np.allclose(ss.sampleset.record.energy, -1.0)), "energy -1")
check(ss.best_feasible is None and ss.num_reads_used == 8, "no model, nothing to decode")
check(ss.feasible_count == 0, "no model, no feasible rows")
check(raises(ValueError, anneal, single, 0, 10, 1), "zero reads is rejected")
check(raises(ValueError, anneal, single, 4, 0, 1), "zero sweeps is rejected")

section("dimod sampler")
sampler = LadderAnnealingSampler()
pair = dimod.BinaryQuadraticModel({"a": 1.0, "b": 1.0}, {("a", "b"): -3.0}, 0.0, dimod.BINARY)
result = sampler.sample(pair, num_reads=10, num_sweeps=100, seed=3)
check(isinstance(result, dimod.SampleSet) and len(result) == 10, "returns a dimod.SampleSet, one row per read")
check(result.first.sample == {"a": 1, "b": 1} and abs(result.first.energy + 1.0) < 1e-12,
      "lowest row is the ground state")
check(sorted(result.record.read_index.tolist()) == list(range(10)), "every read index appears once")
check(bool(np.allclose(result.record.energy, pair.energies((result.record.sample, list(result.variables))))),
      "row energies match the BQM")
check(raises(ValueError, sampler.sample, pair.change_vartype(dimod.SPIN, inplace=False)),
      "SPIN models are rejected")
check(raises(ValueError, sampler.sample, pair, num_reads=2, num_sweeps=5, betas=np.ones(4)),
      "beta count must match sweeps")

section("reproducibility")
a = anneal(q5, num_reads=20, sweeps=200, seed=7, stream=3)
b = anneal(q5, num_reads=20, sweeps=200, seed=7, stream=3, batch_size=3)
c = anneal(q5, num_reads=20, sweeps=200, seed=8, stream=3)
ra, rb, rc = a.sampleset.record, b.sampleset.record, c.sampleset.record
check(np.array_equal(ra.sample, rb.sample) and np.array_equal(ra.read_index, rb.read_index)
      and np.array_equal(ra.energy, rb.energy), "same seed and stream, any batching: identical samples")
check(not np.array_equal(ra.sample, rc.sample), "another seed differs")
order = list(zip(ra.energy.tolist(), ra.read_index.tolist()))
check(order == sorted(order), "samples sorted by (energy, read index)")
check(a.feasible_count == int(np.count_nonzero(ra.feasible)), "feasible count")

section("decoding distinct arc patterns")
# feasibility per row must match decoding that row on its own
check(all(decode(q5, row, q5.model)[1] == bool(flag) for row, flag in zip(ra.sample, ra.feasible)),
      "shared-pattern decoding agrees with per-row decoding")
model7 = RestrictedModel(
    instance=berlin(7, caf=True),
    cuts=(SecCut(frozenset({1, 2})), SecCut(frozenset({3, 4, 5})), SecCut(frozenset({1, 2, 6}))),
)
q7 = to_qubo(model7)
res7 = anneal(q7, num_reads=6, sweeps=20, seed=5)
check(res7.num_reads_used == 6 and len(res7.sampleset) == 6, "multi-cut n=7 QUBO anneals")
check(list(res7.sampleset.variables) == list(q7.tags), "sample columns follow the QUBO labels")

section("small model")
model5 = RestrictedModel(instance=berlin(5, caf=True))
exact = solve_restricted_exact(model5).solution.objective
found = anneal(to_qubo(model5), num_reads=64, sweeps=1000, seed=42)
check(found.best_feasible is not None, "some read is degree-feasible")
check(found.best_feasible is not None and abs(found.best_feasible.objective - exact) < 1e-6,
      f"best decoded assignment is the optimum {exact:.2f}")

section("time accounting")
tb = account_time({"build": 1.0, "conversion": 0.5, "sampling": 2.0, "decode": 0.25}, 100, sched)
check(tb.solver_modeled_us == 21500, "100 reads model 21500 us")
check(abs(tb.total - 3.75) < 1e-12 and abs(tb.computation - 2.75) < 1e-12, "total and computation")
check(raises(ValueError, account_time, {"sampling": -1.0}, 1, sched), "negative phase is rejected")
timer = PhaseTimer()
with timer.phase("build"):
    pass
with timer.phase("build"):
    pass
check(set(timer.phases) == {"build"} and timer.phases["build"] >= 0.0, "phases accumulate by name")

finish("Annealer")
