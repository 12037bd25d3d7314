from app.model.domain import (
    Arc,
    ArcSolution,
    ComplexityStats,
    Infeasible,
    Instance,
    OutOfRange,
    RestrictedModel,
    SecCut,
    TooLarge,
    TspToolkitError,
    UnknownArc,
    complete_arcs,
)

from app.model.formulation import (
    complexity_of,
    degree_constraint_count,
    enumerate_all_secs,
    evaluate,
    satisfies_model,
    sec_count_complete,
    successor_cycles,
    violated_cuts,
    weak_components,
)
