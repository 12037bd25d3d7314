"""TSPLIB instance reader for the EUC_2D subset.

Supported grammar (whitespace tolerant, colons after keys optional):

    NAME : berlin52
    COMMENT : ...              (optional)
    TYPE : TSP                 (optional)
    DIMENSION : 52
    EDGE_WEIGHT_TYPE : EUC_2D
    NODE_COORD_SECTION
    1 565.0 575.0
    ...
    EOF

Other header keys are ignored. Any EDGE_WEIGHT_TYPE other than EUC_2D is
rejected. Distances are exact real Euclidean distances; TSPLIB's
round-to-nearest-integer rule is deliberately not applied, since the
reference objective values are fractional.
"""

from __future__ import annotations

import math
import sys
from dataclasses import dataclass
from pathlib import Path
from typing import Tuple

import numpy as np

from app.model.domain import Instance, OutOfRange, TspToolkitError, complete_arcs

SUPPORTED_EDGE_WEIGHT_TYPE = "EUC_2D"


class TsplibError(TspToolkitError, ValueError):
    """Base class for TSPLIB parsing errors."""


class UnsupportedEdgeWeightType(TsplibError):
    pass


class MalformedLine(TsplibError):
    def __init__(self, line_no: int, line: str, reason: str = "malformed line"):
        super().__init__(f"line {line_no}: {reason}: {line!r}")
        self.line_no = line_no
        self.line = line


class DimensionMismatch(TsplibError):
    pass


@dataclass(frozen=True)
class NodeCoord:
    id: int
    x: float
    y: float


@dataclass(frozen=True)
class RawInstance:
    name: str
    dimension: int
    coords: Tuple[NodeCoord, ...]
    comment: str = ""
    type: str = "TSP"


# ---------------------------------------------------------------------------
# Parsing
# ---------------------------------------------------------------------------


def _split_key(line: str) -> tuple[str, str]:
    if ":" in line:
        key, _, value = line.partition(":")
        return key.strip().upper(), value.strip()
    parts = line.split(None, 1)
    return parts[0].upper(), (parts[1].strip() if len(parts) > 1 else "")


def parse_tsplib(text: str) -> RawInstance:
    """Parse an EUC_2D TSPLIB document into a RawInstance."""
    header: dict[str, str] = {}
    header_lines: dict[str, int] = {}
    coords: list[NodeCoord] = []
    in_coords = False

    for line_no, raw_line in enumerate(text.splitlines(), start=1):
        line = raw_line.strip()
        if not line:
            continue
        if in_coords:
            if line.upper() == "EOF":
                break
            parts = line.split()
            if len(parts) != 3:
                raise MalformedLine(line_no, raw_line, "expected 'id x y'")
            try:
                node_id = int(parts[0])
                x = float(parts[1])
                y = float(parts[2])
            except ValueError:
                raise MalformedLine(line_no, raw_line, "non-numeric coordinate row") from None
            if not (math.isfinite(x) and math.isfinite(y)):
                raise MalformedLine(line_no, raw_line, "coordinate is not finite")
            if node_id != len(coords) + 1:
                raise MalformedLine(
                    line_no, raw_line, f"expected node id {len(coords) + 1}"
                )
            coords.append(NodeCoord(node_id, x, y))
            continue

        key, value = _split_key(line)
        if key == "NODE_COORD_SECTION":
            in_coords = True
        elif key == "EOF":
            break
        else:
            header[key] = value
            header_lines[key] = line_no

    edge_type = header.get("EDGE_WEIGHT_TYPE", "").upper()
    if edge_type != SUPPORTED_EDGE_WEIGHT_TYPE:
        raise UnsupportedEdgeWeightType(
            f"EDGE_WEIGHT_TYPE {edge_type or '<missing>'!r} is not supported "
            f"(only {SUPPORTED_EDGE_WEIGHT_TYPE})"
        )
    if "DIMENSION" not in header:
        raise DimensionMismatch("DIMENSION keyword is missing")
    try:
        dimension = int(header["DIMENSION"])
    except ValueError:
        raise MalformedLine(
            header_lines["DIMENSION"], header["DIMENSION"], "DIMENSION is not an integer"
        ) from None
    if not in_coords:
        raise DimensionMismatch("NODE_COORD_SECTION is missing")
    if len(coords) != dimension:
        raise DimensionMismatch(
            f"DIMENSION is {dimension} but {len(coords)} coordinate rows were read"
        )
    if dimension < 3:
        raise DimensionMismatch(f"DIMENSION must be at least 3, got {dimension}")

    return RawInstance(
        name=header.get("NAME", ""),
        dimension=dimension,
        coords=tuple(coords),
        comment=header.get("COMMENT", ""),
        type=header.get("TYPE", "TSP"),
    )


def load_tsplib(path: str | Path) -> RawInstance:
    """Read a TSPLIB file; "-" reads stdin."""
    if str(path) == "-":
        return parse_tsplib(sys.stdin.read())
    return parse_tsplib(Path(path).read_text(encoding="utf-8"))


def format_tsplib(raw: RawInstance) -> str:
    """Serialise back to the supported subset; floats use repr so nothing is lost."""
    lines = [f"NAME : {raw.name}"]
    if raw.comment:
        lines.append(f"COMMENT : {raw.comment}")
    lines += [
        f"TYPE : {raw.type}",
        f"DIMENSION : {raw.dimension}",
        f"EDGE_WEIGHT_TYPE : {SUPPORTED_EDGE_WEIGHT_TYPE}",
        "NODE_COORD_SECTION",
    ]
    lines += [f"{c.id} {c.x!r} {c.y!r}" for c in raw.coords]
    lines.append("EOF")
    return "\n".join(lines) + "\n"


# ---------------------------------------------------------------------------
# Instance construction
# ---------------------------------------------------------------------------


def truncate(raw: RawInstance, n: int) -> RawInstance:
    """First n nodes in file order, ids renumbered 1..n."""
    if not (3 <= n <= raw.dimension):
        raise OutOfRange(f"n must be in 3..{raw.dimension}, got {n}")
    if n == raw.dimension:
        return raw
    coords = tuple(NodeCoord(k + 1, c.x, c.y) for k, c in enumerate(raw.coords[:n]))
    return RawInstance(
        name=f"{raw.name}[:{n}]",
        dimension=n,
        coords=coords,
        comment=raw.comment,
        type=raw.type,
    )


def build_costs(raw: RawInstance) -> Instance:
    """Complete instance with real Euclidean costs (not rounded)."""
    xy = np.array([(c.x, c.y) for c in raw.coords], dtype=float)
    diff = xy[:, None, :] - xy[None, :, :]
    costs = np.hypot(diff[..., 0], diff[..., 1])
    costs.setflags(write=False)
    return Instance(
        n=raw.dimension,
        costs=costs,
        arcs=complete_arcs(raw.dimension),
        name=raw.name,
    )


def load_instance(path: str | Path, n: int | None = None) -> Instance:
    """Parse, optionally truncate to the first n nodes, and build costs."""
    raw = load_tsplib(path)
    if n is not None:
        raw = truncate(raw, n)
    return build_costs(raw)
