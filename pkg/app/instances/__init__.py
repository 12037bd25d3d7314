from app.instances.tsplib_io import (
    DimensionMismatch,
    MalformedLine,
    NodeCoord,
    RawInstance,
    TsplibError,
    UnsupportedEdgeWeightType,
    build_costs,
    format_tsplib,
    load_instance,
    load_tsplib,
    parse_tsplib,
    truncate,
)
