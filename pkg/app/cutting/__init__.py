from app.cutting.cpa_engine import (
    Backend,
    CpaConfig,
    CpaTrace,
    GapFeasibility,
    IterationRecord,
    NotDegreeFeasible,
    Outcome,
    cuts_from_subtours,
    detect_subtours,
    gap_and_feasibility,
    run_cilp,
    run_cpa,
)
from app.cutting.trace_codec import TRACE_SCHEMA, trace_to_dict, trace_to_json, validate_trace
