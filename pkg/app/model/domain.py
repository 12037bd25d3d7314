"""Passive TSP model domain types for tsp-cutplane.

These types define the shared vocabulary for the whole toolkit: the
instance (vertices, costs, candidate arcs), subtour elimination cuts, the
restricted master model of the cutting-plane loop, arc solutions and model
complexity records.

They are passive data definitions only. They do not solve, log, read the
clock, or touch files and environment variables. Evaluation lives in
app.model.formulation.

Vertices are 1-based (1..n) everywhere in the public API. The cost matrix
is stored 0-based, so cost(i, j) == costs[i - 1, j - 1].

This module uses only the Python standard library plus numpy for the
cost matrix.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property
from typing import FrozenSet, Tuple

import numpy as np

Arc = Tuple[int, int]


# ---------------------------------------------------------------------------
# Errors
# ---------------------------------------------------------------------------


class TspToolkitError(Exception):
    """Base class for every error raised by the toolkit."""


class OutOfRange(TspToolkitError, ValueError):
    """A size or index argument lies outside its allowed range."""


class TooLarge(TspToolkitError, ValueError):
    """The requested enumeration or table would exceed its size guard."""


class UnknownArc(TspToolkitError, ValueError):
    """An arc is not part of the instance's candidate arc set."""


class Infeasible(TspToolkitError):
    """No selection satisfies the constraints of the model."""


# ---------------------------------------------------------------------------
# Instance
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Instance:
    """A TSP instance: |V| = n, symmetric real cost matrix, candidate arcs.

    arcs is the complete arc set A (n(n-1) ordered pairs) or a CAF-reduced
    subset. Arcs are kept sorted, without self-loops.
    """
    n: int
    costs: np.ndarray = field(compare=False, repr=False)
    arcs: Tuple[Arc, ...] = field(default_factory=tuple)
    name: str = ""

    def __post_init__(self) -> None:
        if self.n < 3:
            raise OutOfRange(f"instance needs at least 3 vertices, got {self.n}")
        if self.costs.shape != (self.n, self.n):
            raise ValueError(
                f"cost matrix shape {self.costs.shape} does not match n={self.n}"
            )
        for i, j in self.arcs:
            if i == j:
                raise ValueError(f"self-loop ({i},{i}) is not a valid arc")
            if not (1 <= i <= self.n and 1 <= j <= self.n):
                raise OutOfRange(f"arc ({i},{j}) outside 1..{self.n}")

    def cost(self, i: int, j: int) -> float:
        return float(self.costs[i - 1, j - 1])

    @cached_property
    def arc_set(self) -> FrozenSet[Arc]:
        return frozenset(self.arcs)

    @property
    def num_arcs(self) -> int:
        return len(self.arcs)

    @property
    def is_complete(self) -> bool:
        return len(self.arcs) == self.n * (self.n - 1)

    @cached_property
    def max_arc_cost(self) -> float:
        if not self.arcs:
            return 0.0
        return max(self.cost(i, j) for i, j in self.arcs)

    def with_arcs(self, arcs: Tuple[Arc, ...]) -> "Instance":
        """Same vertices and costs over another candidate arc set."""
        return Instance(n=self.n, costs=self.costs, arcs=tuple(sorted(arcs)), name=self.name)


def complete_arcs(n: int) -> Tuple[Arc, ...]:
    """All n(n-1) ordered pairs (i, j), i != j, in lexicographic order."""
    return tuple((i, j) for i in range(1, n + 1) for j in range(1, n + 1) if i != j)


# ---------------------------------------------------------------------------
# Cuts and the restricted model
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class SecCut:
    """Subtour elimination constraint: sum of x_ij over i, j in S <= |S| - 1.

    The subset is stored explicitly; the cut for S and the cut for its
    complement are different objects.
    """
    subset: FrozenSet[int]

    def __post_init__(self) -> None:
        if len(self.subset) < 2:
            raise ValueError(f"a cut needs at least 2 vertices, got {sorted(self.subset)}")

    @property
    def rhs(self) -> int:
        return len(self.subset) - 1

    @cached_property
    def mask(self) -> int:
        """Bitmask with bit (v - 1) set for every member v."""
        bits = 0
        for v in self.subset:
            bits |= 1 << (v - 1)
        return bits

    def sorted_members(self) -> Tuple[int, ...]:
        return tuple(sorted(self.subset))


@dataclass(frozen=True)
class RestrictedModel:
    """Objective + degree constraints + the active cut list over instance.arcs.

    The sense is always minimisation.
    """
    instance: Instance
    cuts: Tuple[SecCut, ...] = field(default_factory=tuple)
    sense: str = "minimize"

    def __post_init__(self) -> None:
        n = self.instance.n
        seen: set[FrozenSet[int]] = set()
        for cut in self.cuts:
            if cut.subset in seen:
                raise ValueError(f"duplicate cut over {cut.sorted_members()}")
            seen.add(cut.subset)
            if len(cut.subset) > n - 1:
                raise ValueError(f"cut over {len(cut.subset)} vertices must be a proper subset")
            if min(cut.subset) < 1 or max(cut.subset) > n:
                raise OutOfRange(f"cut members {cut.sorted_members()} outside 1..{n}")

    @property
    def n(self) -> int:
        return self.instance.n

    @cached_property
    def cut_subsets(self) -> FrozenSet[FrozenSet[int]]:
        return frozenset(c.subset for c in self.cuts)

    @cached_property
    def cut_masks(self) -> FrozenSet[int]:
        return frozenset(c.mask for c in self.cuts)

    @cached_property
    def cut_by_mask(self) -> dict[int, SecCut]:
        return {c.mask: c for c in self.cuts}

    def with_cuts(self, new_cuts: Tuple[SecCut, ...]) -> "RestrictedModel":
        return RestrictedModel(instance=self.instance, cuts=self.cuts + tuple(new_cuts))


# ---------------------------------------------------------------------------
# Solutions and statistics
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class ArcSolution:
    """Binary arc selection (x_ij = 1 for arcs in selected).

    degree_feasible: every vertex has exactly one outgoing and one incoming
    selected arc. cycle_count counts directed cycles of the successor
    permutation when degree_feasible, weak components otherwise.
    """
    selected: Tuple[Arc, ...]
    objective: float
    degree_feasible: bool
    cycle_count: int

    @cached_property
    def successors(self) -> dict[int, int]:
        return dict(self.selected)

    @property
    def is_tour(self) -> bool:
        return self.degree_feasible and self.cycle_count == 1


@dataclass(frozen=True)
class ComplexityStats:
    """Model size: decision variables and constraint counts."""
    num_vars: int
    num_degree_constraints: int
    num_sec_constraints: int

    @property
    def total_constraints(self) -> int:
        return self.num_degree_constraints + self.num_sec_constraints
