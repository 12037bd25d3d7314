"""Cost-based Arc Filtering (CAF).

For each vertex i the k cheapest neighbours j are kept (ties broken by the
smaller vertex index) and both (i, j) and (j, i) enter the reduced arc set.
Costs are unchanged.

With k = ceil(n/2) every vertex keeps at least ceil(n/2) distinct
neighbours in the undirected support, so Dirac's minimum-degree condition
certifies a Hamiltonian cycle. CAF is exact with respect to feasibility
but only heuristic with respect to optimality: the optimal tour of the
complete graph may use a filtered arc (berlin52 prefix n=6 is one such case).

Pure module: no logging, no clock, no I/O.
"""

from __future__ import annotations

from dataclasses import dataclass

import networkx as nx

from app.model.domain import Arc, Instance, TspToolkitError


class BadK(TspToolkitError, ValueError):
    pass


class AsymmetricArcSet(TspToolkitError, ValueError):
    pass


@dataclass(frozen=True)
class CafConfig:
    k: int
    symmetrize: bool = True

    def __post_init__(self) -> None:
        if self.k < 1:
            raise BadK(f"k must be positive, got {self.k}")
        if not self.symmetrize:
            raise BadK("CAF always symmetrizes the kept neighbour pairs")

    @classmethod
    def for_n(cls, n: int) -> "CafConfig":
        return cls(k=default_k(n))


def default_k(n: int) -> int:
    """ceil(n/2): the smallest k for which Dirac's bound applies."""
    if n < 3:
        raise BadK(f"n must be >= 3, got {n}")
    return (n + 1) // 2


def nearest_neighbours(instance: Instance, i: int, k: int) -> list[int]:
    """The k cheapest j != i, ordered by (cost, index)."""
    others = [j for j in range(1, instance.n + 1) if j != i]
    others.sort(key=lambda j: (instance.cost(i, j), j))
    return others[:k]


def caf_filter(instance: Instance, cfg: CafConfig) -> Instance:
    """Reduce a complete instance to the symmetrised k-nearest-neighbour arcs."""
    n = instance.n
    if not instance.is_complete:
        raise BadK("CAF expects the complete arc set as input")
    if not (1 <= cfg.k <= n - 1):
        raise BadK(f"k must be in 1..{n - 1}, got {cfg.k}")

    kept: set[Arc] = set()
    for i in range(1, n + 1):
        for j in nearest_neighbours(instance, i, cfg.k):
            kept.add((i, j))
            kept.add((j, i))
    return instance.with_arcs(tuple(kept))


def undirected_support(instance: Instance) -> nx.Graph:
    graph = nx.Graph()
    graph.add_nodes_from(range(1, instance.n + 1))
    graph.add_edges_from(instance.arcs)
    return graph


def hamiltonicity_certificate(reduced: Instance) -> bool:
    """True proves a Hamiltonian cycle exists (min degree >= n/2); False is inconclusive."""
    arc_set = reduced.arc_set
    for i, j in reduced.arcs:
        if (j, i) not in arc_set:
            raise AsymmetricArcSet(f"arc ({i},{j}) has no reverse arc")
    graph = undirected_support(reduced)
    n = reduced.n
    return all(2 * degree >= n for _, degree in graph.degree())
