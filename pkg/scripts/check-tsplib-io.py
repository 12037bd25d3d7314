#!/usr/bin/env python3
"""
Validation: TSPLIB EUC_2D reader.

Tests:
1. berlin52 parses: 52 nodes, first node (565, 575), name kept.
2. Costs are exact real Euclidean distances, symmetric, zero diagonal.
3. Header keys without colons and extra whitespace are accepted.
4. Unsupported EDGE_WEIGHT_TYPE, bad rows and dimension mismatches are rejected.
5. format -> parse keeps every coordinate bit for bit.
6. truncate keeps the first n nodes and rejects out-of-range n.
"""

import math

from check_support import BERLIN52, check, finish, raises, section

from app.instances.tsplib_io import (
    DimensionMismatch,
    MalformedLine,
    UnsupportedEdgeWeightType,
    build_costs,
    format_tsplib,
    load_tsplib,
    parse_tsplib,
    truncate,
)
from app.model.domain import OutOfRange

TINY = """NAME: tiny
TYPE: TSP
DIMENSION: 4
EDGE_WEIGHT_TYPE: EUC_2D
NODE_COORD_SECTION
1 0 0
2 3 0
3 3 4
4 0 4
EOF
"""

section("berlin52")
raw = load_tsplib(BERLIN52)
check(raw.dimension == 52 and len(raw.coords) == 52, "berlin52 has 52 nodes")
check((raw.coords[0].x, raw.coords[0].y) == (565.0, 575.0), "first node is (565, 575)")
check(raw.name == "berlin52", "NAME is kept")

inst = build_costs(truncate(raw, 5))
check(abs(inst.cost(1, 2) - math.hypot(565 - 25, 575 - 185)) < 1e-9, "cost(1,2) is the real distance")
check(bool((inst.costs == inst.costs.T).all()), "cost matrix is symmetric")
check(all(inst.costs[i, i] == 0 for i in range(5)), "diagonal is zero")
check(inst.num_arcs == 20 and inst.is_complete, "complete arc set has n(n-1) arcs")

section("grammar")
tiny = parse_tsplib(TINY)
check(tiny.dimension == 4, "colon form parses")
no_colon = parse_tsplib(TINY.replace(": ", " ").replace("DIMENSION 4", "  DIMENSION    4  "))
check(no_colon == tiny, "keys without colons and extra whitespace parse the same")
check(parse_tsplib(TINY.replace("EOF\n", "")) == tiny, "EOF is optional")
check(abs(build_costs(tiny).cost(1, 3) - 5.0) < 1e-12, "3-4-5 triangle distance")

section("errors")
check(raises(UnsupportedEdgeWeightType, parse_tsplib, TINY.replace("EUC_2D", "GEO")),
      "GEO is rejected")
check(raises(MalformedLine, parse_tsplib, TINY.replace("3 3 4", "3 3 four")),
      "non-numeric row is rejected")
try:
    parse_tsplib(TINY.replace("3 3 4", "3 3"))
    check(False, "short row carries its line number")
except MalformedLine as exc:
    check(exc.line_no == 8, "short row carries its line number")
check(raises(DimensionMismatch, parse_tsplib, TINY.replace("DIMENSION: 4", "DIMENSION: 5")),
      "DIMENSION larger than the row count is rejected")
check(raises(DimensionMismatch, parse_tsplib, TINY.replace("DIMENSION: 4\n", "")),
      "missing DIMENSION is rejected")
check(raises(MalformedLine, parse_tsplib, TINY.replace("4 0 4", "5 0 4")),
      "non-consecutive node id is rejected")

section("format / truncate")
check(parse_tsplib(format_tsplib(raw)) == raw, "berlin52 survives format -> parse")
odd = parse_tsplib(TINY.replace("3 3 4", "3 0.1 1e-7"))
check(parse_tsplib(format_tsplib(odd)) == odd, "repr floats are lossless")
t5 = truncate(raw, 5)
check(t5.dimension == 5 and t5.coords == raw.coords[:5], "truncate keeps the first 5 nodes")
check(truncate(raw, 52) is raw, "truncate to the full size is the identity")
check(raises(OutOfRange, truncate, raw, 53), "n beyond the dimension is OutOfRange")
check(raises(OutOfRange, truncate, raw, 2), "n below 3 is OutOfRange")

finish("TSPLIB reader")
