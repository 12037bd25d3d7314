"""Simulated-annealing stand-in for the annealing QPU, plus read/time accounting.

Each read is an independent single-flip Metropolis anneal over a geometric
temperature ladder from T0 = P down to 1e-3 * mean|linear|. Every read has
its own random stream derived from (seed, stream, read index), so results
do not depend on how reads are batched or parallelised. Reads of a batch are
vectorised with numpy behind a dimod-compatible sampler that returns a
dimod.SampleSet; nothing in here reads the wall clock to imitate
hardware timings: QPU time is modelled as num_reads * (annealing + readout).
"""

from __future__ import annotations

import logging
import time
from contextlib import contextmanager
from dataclasses import dataclass, field
from enum import Enum
from typing import Iterator, Mapping, Optional

import dimod
import numpy as np

from app.model.domain import ArcSolution
from app.solvers.qubo_backend import QuboProblem, decode_arcs

log = logging.getLogger("FULL")

DEFAULT_BATCH_SIZE: int = 1024
RANDOM_CHUNK_SWEEPS: int = 32


# ---------------------------------------------------------------------------
# Read schedule
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class ReadSchedule:
    n_start: int = 1000
    per_cut: int = 100
    annealing_time_us: int = 100
    readout_time_us: int = 115
    t_max_us: int = 1_000_000

    def __post_init__(self) -> None:
        for name in ("n_start", "per_cut", "annealing_time_us", "readout_time_us", "t_max_us"):
            if getattr(self, name) <= 0:
                raise ValueError(f"{name} must be positive, got {getattr(self, name)}")

    @property
    def time_per_read_us(self) -> int:
        return self.annealing_time_us + self.readout_time_us

    @property
    def num_reads_max(self) -> int:
        return self.t_max_us // self.time_per_read_us


class ReadMode(Enum):
    """CPA counts cuts added so far; CILP uses the largest cut count seen in a CPA run."""
    CPA = "cpa"
    CILP = "cilp"


def compute_num_reads(schedule: ReadSchedule, cuts: int, mode: ReadMode = ReadMode.CPA) -> int:
    """min(n_start + per_cut * cuts, num_reads_max); same law for both modes."""
    if cuts < 0:
        raise ValueError(f"cut count must be nonnegative, got {cuts} ({mode.value})")
    return min(schedule.n_start + schedule.per_cut * cuts, schedule.num_reads_max)


# ---------------------------------------------------------------------------
# Time accounting
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class TimeBreakdown:
    """Build / conversion / QPU (overhead + modelled solver) / decode, in seconds.

    solver_modeled_us is the modelled QPU solver time; sampling is the wall
    time the classical emulator actually spent and is kept apart from it.
    """
    build: float = 0.0
    conversion: float = 0.0
    overhead: float = 0.0
    solver_modeled_us: int = 0
    sampling: float = 0.0
    decode: float = 0.0
    total: float = 0.0

    @property
    def computation(self) -> float:
        return self.conversion + self.overhead + self.sampling + self.decode


class PhaseTimer:
    """Accumulates wall time per named phase."""

    def __init__(self) -> None:
        self.phases: dict[str, float] = {}

    @contextmanager
    def phase(self, name: str) -> Iterator[None]:
        started = time.perf_counter()
        try:
            yield
        finally:
            self.phases[name] = self.phases.get(name, 0.0) + time.perf_counter() - started


def account_time(phases: Mapping[str, float], num_reads: int, schedule: ReadSchedule) -> TimeBreakdown:
    for name, seconds in phases.items():
        if seconds < 0:
            raise ValueError(f"phase {name!r} has negative duration {seconds}")
    build = phases.get("build", 0.0)
    conversion = phases.get("conversion", 0.0)
    overhead = phases.get("overhead", 0.0)
    sampling = phases.get("sampling", 0.0)
    decode_s = phases.get("decode", 0.0)
    return TimeBreakdown(
        build=build,
        conversion=conversion,
        overhead=overhead,
        solver_modeled_us=num_reads * schedule.time_per_read_us,
        sampling=sampling,
        decode=decode_s,
        total=build + conversion + overhead + sampling + decode_s,
    )


# ---------------------------------------------------------------------------
# Sampling
# ---------------------------------------------------------------------------


def geometric_ladder(t_start: float, mean_linear: float, sweeps: int) -> np.ndarray:
    """Temperatures, one per sweep, from t_start down to 1e-3 * mean_linear."""
    t_end = 1e-3 * mean_linear if mean_linear > 0 else 1e-3
    t_end = min(t_end, t_start)
    if sweeps == 1:
        return np.array([t_end])
    return t_start * (t_end / t_start) ** (np.arange(sweeps) / (sweeps - 1))


def temperature_ladder(qubo: QuboProblem, sweeps: int) -> np.ndarray:
    """Geometric temperatures, one per sweep, from P down to 1e-3 * mean|linear|."""
    mean_linear = float(np.mean(np.abs(qubo.linear))) if qubo.num_vars else 0.0
    return geometric_ladder(qubo.penalty_weight, mean_linear, sweeps)


def _neighbour_arrays(
    bqm: dimod.BinaryQuadraticModel,
    labels: list,
) -> tuple[np.ndarray, list[np.ndarray], list[np.ndarray]]:
    linear, (rows, cols, biases), _ = bqm.to_numpy_vectors(variable_order=labels)
    keep = biases != 0.0
    rows, cols, biases = rows[keep], cols[keep], biases[keep]
    src = np.concatenate([rows, cols]).astype(np.int64)
    dst = np.concatenate([cols, rows]).astype(np.int64)
    val = np.concatenate([biases, biases]).astype(float)
    order = np.lexsort((dst, src))
    src, dst, val = src[order], dst[order], val[order]
    bounds = np.searchsorted(src, np.arange(len(labels) + 1))
    idx = [dst[bounds[i]:bounds[i + 1]] for i in range(len(labels))]
    vals = [val[bounds[i]:bounds[i + 1]] for i in range(len(labels))]
    return np.asarray(linear, dtype=float), idx, vals


def _anneal_batch(
    h: np.ndarray,
    nbr_idx: list[np.ndarray],
    nbr_val: list[np.ndarray],
    betas: np.ndarray,
    rngs: list[np.random.Generator],
) -> np.ndarray:
    m = len(h)
    states = np.array([rng.integers(0, 2, m) for rng in rngs], dtype=float).reshape(len(rngs), m)
    local = np.tile(h, (len(rngs), 1))
    for i in range(m):
        if nbr_idx[i].size:
            local[:, nbr_idx[i]] += states[:, [i]] * nbr_val[i][None, :]

    sweeps = len(betas)
    for s0 in range(0, sweeps, RANDOM_CHUNK_SWEEPS):
        span = min(RANDOM_CHUNK_SWEEPS, sweeps - s0)
        uniforms = np.stack([rng.random((span, m)) for rng in rngs], axis=1)
        for t in range(span):
            beta = betas[s0 + t]
            u = uniforms[t]
            for i in range(m):
                delta = (1.0 - 2.0 * states[:, i]) * local[:, i]
                accept = (delta <= 0.0) | (u[:, i] < np.exp(-beta * np.maximum(delta, 0.0)))
                rows = np.flatnonzero(accept)
                if rows.size == 0:
                    continue
                step = 1.0 - 2.0 * states[rows, i]
                states[rows, i] += step
                if nbr_idx[i].size:
                    local[np.ix_(rows, nbr_idx[i])] += step[:, None] * nbr_val[i][None, :]
    return states


class LadderAnnealingSampler:
    """dimod-compatible simulated annealer for BINARY BQMs.

    Every read is an independent single-flip Metropolis anneal seeded from
    (seed, stream, read index). sample() returns a dimod.SampleSet whose rows
    are sorted by (energy, read_index) and carry a read_index data vector.
    Without betas the ladder runs from max|bias| down to 1e-3 * mean|linear|.
    """

    def __init__(self) -> None:
        self.parameters: dict[str, list] = {
            "num_reads": [],
            "num_sweeps": [],
            "betas": [],
            "seed": [],
            "stream": [],
            "batch_size": [],
        }
        self.properties: dict[str, object] = {}

    def sample(
        self,
        bqm: dimod.BinaryQuadraticModel,
        num_reads: int = 1,
        num_sweeps: int = 1000,
        betas: Optional[np.ndarray] = None,
        seed: int = 0,
        stream: int = 0,
        batch_size: int = DEFAULT_BATCH_SIZE,
    ) -> dimod.SampleSet:
        if bqm.vartype is not dimod.BINARY:
            raise ValueError(f"expected a BINARY model, got {bqm.vartype.name}")
        if num_reads < 1:
            raise ValueError(f"num_reads must be >= 1, got {num_reads}")
        if num_sweeps < 1:
            raise ValueError(f"sweeps must be >= 1, got {num_sweeps}")

        labels = list(bqm.variables)
        h, nbr_idx, nbr_val = _neighbour_arrays(bqm, labels)
        if betas is None:
            scale = float(np.max(np.abs(h))) if len(h) else 1.0
            mean_linear = float(np.mean(np.abs(h))) if len(h) else 0.0
            betas = 1.0 / geometric_ladder(max(scale, 1e-3), mean_linear, num_sweeps)
        betas = np.asarray(betas, dtype=float)
        if betas.shape != (num_sweeps,):
            raise ValueError(f"expected {num_sweeps} betas, got shape {betas.shape}")

        blocks = []
        for start in range(0, num_reads, batch_size):
            stop = min(start + batch_size, num_reads)
            rngs = [np.random.default_rng([seed, stream, r]) for r in range(start, stop)]
            blocks.append(_anneal_batch(h, nbr_idx, nbr_val, betas, rngs))
        states = np.vstack(blocks).astype(np.int8)
        sample_energies = np.asarray(bqm.energies((states, labels)), dtype=float)

        order = np.lexsort((np.arange(num_reads), sample_energies))
        return dimod.SampleSet.from_samples(
            (states[order], labels),
            dimod.BINARY,
            sample_energies[order],
            info={"num_sweeps": num_sweeps, "seed": seed, "stream": stream},
            sort_labels=False,
            read_index=order,
        )


@dataclass(frozen=True)
class AnnealResult:
    """Sorted sample set plus the cheapest decoded tour.

    sampleset rows carry read_index and feasible (restricted-model feasible
    after decoding) data vectors.
    """
    sampleset: dimod.SampleSet = field(repr=False, compare=False)
    best_feasible: Optional[ArcSolution] = None
    num_reads_used: int = 0
    best_feasible_energy: Optional[float] = None

    @property
    def feasible_count(self) -> int:
        return int(np.count_nonzero(self.sampleset.record.feasible))


def anneal(
    qubo: QuboProblem,
    num_reads: int,
    sweeps: int,
    seed: int,
    stream: int = 0,
    batch_size: int = DEFAULT_BATCH_SIZE,
) -> AnnealResult:
    """num_reads independent anneals of the QUBO; rows sorted by (energy, read index)."""
    sampled = LadderAnnealingSampler().sample(
        qubo.bqm,
        num_reads=num_reads,
        num_sweeps=sweeps,
        betas=1.0 / temperature_ladder(qubo, sweeps),
        seed=seed,
        stream=stream,
        batch_size=batch_size,
    )
    record = sampled.record
    rows = len(record)
    feasible = np.zeros(rows, dtype=bool)
    objective = np.full(rows, np.inf)
    solutions: list[ArcSolution] = []
    inverse = np.zeros(rows, dtype=np.int64)

    model = qubo.model
    if model is not None:
        # reads that differ only in slack bits decode to the same tour
        patterns, inverse = np.unique(record.sample[:, :qubo.num_arc_vars], axis=0, return_inverse=True)
        inverse = inverse.reshape(-1)
        decoded = [decode_arcs(qubo, pattern, model) for pattern in patterns]
        solutions = [solution for solution, _ in decoded]
        pattern_ok = np.array([ok for _, ok in decoded], dtype=bool)
        pattern_obj = np.array([s.objective if ok else np.inf for s, ok in decoded], dtype=float)
        feasible = pattern_ok[inverse]
        objective = pattern_obj[inverse]

    sampleset = dimod.SampleSet.from_samples(
        (record.sample, list(sampled.variables)),
        dimod.BINARY,
        record.energy,
        info=sampled.info,
        sort_labels=False,
        read_index=record.read_index,
        feasible=feasible,
    )

    # rows are already in (energy, read index) order, so argmin breaks ties that way
    best_row: Optional[int] = None
    candidates = np.flatnonzero(feasible)
    if candidates.size:
        best_row = int(candidates[np.argmin(objective[candidates])])
    best_energy = float(record.energy[best_row]) if best_row is not None else None
    log.debug(
        "[ANNEAL] vars=%d reads=%d sweeps=%d seed=%d stream=%d patterns=%d feasible=%d best=%s",
        qubo.num_vars, num_reads, sweeps, seed, stream, len(solutions), int(candidates.size),
        f"{best_energy:.2f}" if best_energy is not None else "none",
    )
    return AnnealResult(
        sampleset=sampleset,
        best_feasible=solutions[inverse[best_row]] if best_row is not None else None,
        num_reads_used=num_reads,
        best_feasible_energy=best_energy,
    )
