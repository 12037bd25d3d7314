"""JSON form of a CpaTrace.

Cuts are written as sorted vertex lists and tours in visiting order from
vertex 1. Wall-clock fields are optional: with include_timings=False two
runs with the same seed serialise to identical bytes. The modelled QPU time
is deterministic and is always written.

Layout: docs/TRACE_SCHEMA.md.
"""

from __future__ import annotations

import json
from typing import Any, Optional

import jsonschema

from app.cutting.cpa_engine import CpaTrace, IterationRecord
from app.solvers.annealer import TimeBreakdown

TRACE_SCHEMA_VERSION = 1

_NUMBER_OR_NULL = {"type": ["number", "null"]}
_TIME_SCHEMA = {
    "type": "object",
    "required": ["build", "conversion", "overhead", "sampling", "decode", "total"],
    "properties": {k: {"type": "number", "minimum": 0} for k in
                   ("build", "conversion", "overhead", "sampling", "decode", "total")},
    "additionalProperties": False,
}

TRACE_SCHEMA: dict[str, Any] = {
    "$schema": "https://json-schema.org/draft/2020-12/schema",
    "title": "tsp-cutplane trace",
    "type": "object",
    "required": [
        "schema_version", "instance", "n", "num_arcs", "backend", "formulation",
        "seed", "outcome", "objective", "tour", "total_cuts", "initial_cuts",
        "total_reads", "solver_modeled_us", "iterations",
    ],
    "properties": {
        "schema_version": {"const": TRACE_SCHEMA_VERSION},
        "instance": {"type": "string"},
        "n": {"type": "integer", "minimum": 3},
        "num_arcs": {"type": "integer", "minimum": 0},
        "backend": {"enum": ["exact", "anneal", "hybrid_emulation"]},
        "formulation": {"enum": ["cpa", "cilp"]},
        "seed": {"type": "integer"},
        "outcome": {"enum": ["Optimal", "FeasibleTour", "NoFeasible", "IterationLimit"]},
        "objective": _NUMBER_OR_NULL,
        "tour": {"type": ["array", "null"], "items": {"type": "integer", "minimum": 1}},
        "total_cuts": {"type": "integer", "minimum": 0},
        "initial_cuts": {"type": "integer", "minimum": 0},
        "total_reads": {"type": "integer", "minimum": 0},
        "solver_modeled_us": {"type": "integer", "minimum": 0},
        "iterations": {
            "type": "array",
            "items": {
                "type": "object",
                "required": [
                    "index", "objective", "degree_feasible", "cycle_count",
                    "cuts_added", "num_reads", "solver_modeled_us",
                    "nodes_explored", "feasible_samples",
                ],
                "properties": {
                    "index": {"type": "integer", "minimum": 1},
                    "objective": _NUMBER_OR_NULL,
                    "degree_feasible": {"type": ["boolean", "null"]},
                    "cycle_count": {"type": ["integer", "null"]},
                    "cuts_added": {
                        "type": "array",
                        "items": {"type": "array", "minItems": 2,
                                  "items": {"type": "integer", "minimum": 1}},
                    },
                    "num_reads": {"type": "integer", "minimum": 0},
                    "solver_modeled_us": {"type": "integer", "minimum": 0},
                    "nodes_explored": {"type": "integer", "minimum": 0},
                    "feasible_samples": {"type": "integer", "minimum": 0},
                    "time": _TIME_SCHEMA,
                },
                "additionalProperties": False,
            },
        },
    },
    "additionalProperties": False,
}


def _time_to_dict(tb: TimeBreakdown) -> dict[str, float]:
    return {
        "build": tb.build,
        "conversion": tb.conversion,
        "overhead": tb.overhead,
        "sampling": tb.sampling,
        "decode": tb.decode,
        "total": tb.total,
    }


def _iteration_to_dict(it: IterationRecord, include_timings: bool) -> dict[str, Any]:
    solution = it.solution
    doc: dict[str, Any] = {
        "index": it.index,
        "objective": solution.objective if solution else None,
        "degree_feasible": solution.degree_feasible if solution else None,
        "cycle_count": solution.cycle_count if solution else None,
        "cuts_added": [list(c.sorted_members()) for c in it.cuts_added],
        "num_reads": it.num_reads_used,
        "solver_modeled_us": it.time_breakdown.solver_modeled_us,
        "nodes_explored": it.nodes_explored,
        "feasible_samples": it.feasible_samples,
    }
    if include_timings:
        doc["time"] = _time_to_dict(it.time_breakdown)
    return doc


def trace_to_dict(trace: CpaTrace, include_timings: bool = True) -> dict[str, Any]:
    tour: Optional[tuple[int, ...]] = trace.tour
    return {
        "schema_version": TRACE_SCHEMA_VERSION,
        "instance": trace.instance_name,
        "n": trace.n,
        "num_arcs": trace.num_arcs,
        "backend": trace.backend.value,
        "formulation": trace.formulation,
        "seed": trace.seed,
        "outcome": trace.outcome.value,
        "objective": trace.objective,
        "tour": list(tour) if tour is not None else None,
        "total_cuts": trace.total_cuts,
        "initial_cuts": trace.initial_cuts,
        "total_reads": trace.total_reads,
        "solver_modeled_us": trace.solver_modeled_us,
        "iterations": [_iteration_to_dict(it, include_timings) for it in trace.iterations],
    }


def validate_trace(doc: dict[str, Any]) -> None:
    """Raise jsonschema.ValidationError when doc does not match TRACE_SCHEMA."""
    jsonschema.validate(instance=doc, schema=TRACE_SCHEMA)


def trace_to_json(trace: CpaTrace, include_timings: bool = True) -> str:
    doc = trace_to_dict(trace, include_timings=include_timings)
    validate_trace(doc)
    return json.dumps(doc, indent=2, sort_keys=True) + "\n"
