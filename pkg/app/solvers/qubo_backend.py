"""Penalty QUBO encoding of a restricted model, built as a dimod BQM.

Energy of an assignment:

    sum c_ij x_ij
    + P * sum_i (sum_j x_ij - 1)^2          (one outgoing arc)
    + P * sum_j (sum_i x_ij - 1)^2          (one incoming arc)
    + P * sum_S (sum_{i,j in S} x_ij + slack_S - (|S| - 1))^2

slack_S is a binary-encoded integer over ceil(log2 |S|) bits with weights
1, 2, 4, ... and a clipped top weight, so exactly 0..|S|-1 is
representable. Equalities get no slack. Each squared term goes through
BinaryQuadraticModel.add_linear_equality_constraint, which folds x^2 = x
and moves the constant into the offset.

With the automatic weight P = n * c_max + 1 a single unit of squared
violation outweighs any tour cost, so the minimum-energy assignment decodes
to the restricted-model optimum.

Variables are labelled ArcVar(i, j) and SlackVar(cut, bit). Arc variables
come first (instance arc order), then the slack bits of each cut in cut
order; that order is the BQM's own variable order.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import cached_property
from pathlib import Path
from typing import Optional, Sequence, Union

import dimod
import numpy as np

from app.model.domain import Arc, ArcSolution, RestrictedModel, TspToolkitError
from app.model.formulation import evaluate, satisfies_model

QUBO_TEXT_MAGIC = "# tsp-cutplane qubo v1"


class LengthMismatch(TspToolkitError, ValueError):
    pass


# frozen dataclasses compare by class as well as fields, so ArcVar(0, 1)
# and SlackVar(0, 1) are different BQM labels
@dataclass(frozen=True)
class ArcVar:
    i: int
    j: int


@dataclass(frozen=True)
class SlackVar:
    cut_index: int
    bit: int


VarTag = Union[ArcVar, SlackVar]


@dataclass(frozen=True)
class QuboProblem:
    """A BINARY dimod BQM plus what decoding and export need.

    The BQM is never mutated after to_qubo returns; the index views below
    (linear, quadratic) follow its variable order.
    """
    bqm: dimod.BinaryQuadraticModel = field(repr=False)
    penalty_weight: float
    slack_weights: tuple[tuple[int, ...], ...] = ()
    model: Optional[RestrictedModel] = field(default=None, compare=False, repr=False)

    @property
    def num_vars(self) -> int:
        return self.bqm.num_variables

    @cached_property
    def tags(self) -> tuple[VarTag, ...]:
        return tuple(self.bqm.variables)

    @cached_property
    def var_registry(self) -> dict[VarTag, int]:
        return {tag: idx for idx, tag in enumerate(self.tags)}

    @cached_property
    def num_arc_vars(self) -> int:
        return sum(1 for tag in self.tags if isinstance(tag, ArcVar))

    @property
    def num_slack_vars(self) -> int:
        return self.num_vars - self.num_arc_vars

    @property
    def offset(self) -> float:
        return float(self.bqm.offset)

    @cached_property
    def _vectors(self):
        return self.bqm.to_numpy_vectors(variable_order=list(self.tags))

    @cached_property
    def linear(self) -> np.ndarray:
        return np.asarray(self._vectors.linear_biases, dtype=float)

    @cached_property
    def quadratic(self) -> dict[tuple[int, int], float]:
        """Couplings keyed (a, b) with a < b, sorted."""
        rows, cols, biases = self._vectors.quadratic
        terms = {}
        for a, b, coeff in zip(rows.tolist(), cols.tolist(), biases.tolist()):
            terms[(a, b) if a < b else (b, a)] = float(coeff)
        return {key: terms[key] for key in sorted(terms)}


# ---------------------------------------------------------------------------
# Construction
# ---------------------------------------------------------------------------


def slack_weights_for(size: int) -> tuple[int, ...]:
    """Bit weights covering exactly 0..size-1 (size = |S| >= 2)."""
    upper = size - 1
    bits = math.ceil(math.log2(size))
    weights = [1 << b for b in range(bits - 1)]
    weights.append(upper - ((1 << (bits - 1)) - 1))
    return tuple(weights)


def auto_penalty(model: RestrictedModel) -> float:
    return model.n * model.instance.max_arc_cost + 1.0


def to_qubo(model: RestrictedModel, penalty: Optional[float] = None) -> QuboProblem:
    """Fold degree equalities and active SECs into a penalised BINARY BQM."""
    instance = model.instance
    weight = auto_penalty(model) if penalty is None else float(penalty)
    if weight <= 0:
        raise ValueError(f"penalty weight must be positive, got {weight}")

    bqm = dimod.BinaryQuadraticModel(dimod.BINARY)
    for i, j in instance.arcs:
        bqm.add_variable(ArcVar(i, j), instance.cost(i, j))

    slack_weights: list[tuple[int, ...]] = []
    for c, cut in enumerate(model.cuts):
        weights = slack_weights_for(len(cut.subset))
        slack_weights.append(weights)
        for b in range(len(weights)):
            bqm.add_variable(SlackVar(c, b), 0.0)

    outgoing: dict[int, list[tuple[ArcVar, float]]] = {v: [] for v in range(1, instance.n + 1)}
    incoming: dict[int, list[tuple[ArcVar, float]]] = {v: [] for v in range(1, instance.n + 1)}
    for i, j in instance.arcs:
        outgoing[i].append((ArcVar(i, j), 1.0))
        incoming[j].append((ArcVar(i, j), 1.0))
    for v in range(1, instance.n + 1):
        bqm.add_linear_equality_constraint(outgoing[v], weight, -1.0)
        bqm.add_linear_equality_constraint(incoming[v], weight, -1.0)

    for c, cut in enumerate(model.cuts):
        members = cut.subset
        terms: list[tuple[VarTag, float]] = [
            (ArcVar(i, j), 1.0)
            for i, j in instance.arcs
            if i in members and j in members
        ]
        terms += [(SlackVar(c, b), float(w)) for b, w in enumerate(slack_weights[c])]
        bqm.add_linear_equality_constraint(terms, weight, -float(cut.rhs))

    return QuboProblem(
        bqm=bqm,
        penalty_weight=weight,
        slack_weights=tuple(slack_weights),
        model=model,
    )


# ---------------------------------------------------------------------------
# Evaluation
# ---------------------------------------------------------------------------


def energy(qubo: QuboProblem, bits: Sequence[int]) -> float:
    x = np.asarray(bits, dtype=np.int8)
    if x.shape != (qubo.num_vars,):
        raise LengthMismatch(f"expected {qubo.num_vars} bits, got {x.shape}")
    return float(qubo.bqm.energy((x, list(qubo.tags))))


def energies(qubo: QuboProblem, states: np.ndarray) -> np.ndarray:
    """Energies of a (reads, m) 0/1 matrix whose columns follow qubo.tags."""
    x = np.asarray(states, dtype=np.int8)
    if x.ndim != 2 or x.shape[1] != qubo.num_vars:
        raise LengthMismatch(f"expected (reads, {qubo.num_vars}) states, got {x.shape}")
    return np.asarray(qubo.bqm.energies((x, list(qubo.tags))), dtype=float)


def _encode_slack(value: int, weights: tuple[int, ...]) -> list[int]:
    bits = [0] * len(weights)
    low = (1 << (len(weights) - 1)) - 1
    if value > low:
        bits[-1] = 1
        value -= weights[-1]
    for b in range(len(weights) - 1):
        bits[b] = (value >> b) & 1
    return bits


def encode_solution(qubo: QuboProblem, selected: Sequence[Arc]) -> np.ndarray:
    """Bit vector for an arc selection with exact slack values where possible."""
    model = qubo.model
    x = np.zeros(qubo.num_vars, dtype=np.int8)
    chosen = set(selected)
    for arc in chosen:
        x[qubo.var_registry[ArcVar(*arc)]] = 1
    if model is not None:
        for c, cut in enumerate(model.cuts):
            members = cut.subset
            inside = sum(1 for i, j in chosen if i in members and j in members)
            slack = max(0, cut.rhs - inside)
            for b, bit in enumerate(_encode_slack(slack, qubo.slack_weights[c])):
                x[qubo.var_registry[SlackVar(c, b)]] = bit
    return x


def decode(
    qubo: QuboProblem,
    assignment: Sequence[int],
    model: RestrictedModel,
) -> tuple[ArcSolution, bool]:
    """Arc bits back to an ArcSolution; slack bits are discarded."""
    if len(assignment) != qubo.num_vars:
        raise LengthMismatch(f"expected {qubo.num_vars} bits, got {len(assignment)}")
    return decode_arcs(qubo, assignment[:qubo.num_arc_vars], model)


def decode_arcs(
    qubo: QuboProblem,
    arc_bits: Sequence[int],
    model: RestrictedModel,
) -> tuple[ArcSolution, bool]:
    """decode() for the arc-variable prefix of an assignment."""
    if len(arc_bits) != qubo.num_arc_vars:
        raise LengthMismatch(f"expected {qubo.num_arc_vars} arc bits, got {len(arc_bits)}")
    selected = [
        (tag.i, tag.j)
        for tag, bit in zip(qubo.tags[:qubo.num_arc_vars], arc_bits)
        if bit
    ]
    solution = evaluate(model, selected)
    return solution, satisfies_model(model, solution)


# ---------------------------------------------------------------------------
# Text export
# ---------------------------------------------------------------------------


def export_qubo_text(qubo: QuboProblem) -> str:
    """Plain-text QUBO: header comments, then one `i j coeff` line per term.

    Linear terms are written as `i i coeff`. Floats use repr, so the file
    reproduces the coefficients bit for bit.
    """
    lines = [
        QUBO_TEXT_MAGIC,
        f"# variables: {qubo.num_vars}",
        f"# arc_variables: {qubo.num_arc_vars}",
        f"# slack_variables: {qubo.num_slack_vars}",
        f"# offset: {qubo.offset!r}",
        f"# penalty: {qubo.penalty_weight!r}",
    ]
    for tag in qubo.tags:
        idx = qubo.var_registry[tag]
        if isinstance(tag, ArcVar):
            lines.append(f"# var {idx} x {tag.i} {tag.j}")
        else:
            weight = qubo.slack_weights[tag.cut_index][tag.bit]
            lines.append(f"# var {idx} s {tag.cut_index} {tag.bit} {weight}")
    for idx in range(qubo.num_vars):
        lines.append(f"{idx} {idx} {float(qubo.linear[idx])!r}")
    for (a, b), coeff in qubo.quadratic.items():
        lines.append(f"{a} {b} {coeff!r}")
    return "\n".join(lines) + "\n"


def write_qubo_file(qubo: QuboProblem, path: str | Path) -> Path:
    target = Path(path)
    target.parent.mkdir(parents=True, exist_ok=True)
    target.write_text(export_qubo_text(qubo), encoding="utf-8")
    return target
