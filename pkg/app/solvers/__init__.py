from app.solvers.annealer import (
    AnnealResult,
    LadderAnnealingSampler,
    PhaseTimer,
    ReadMode,
    ReadSchedule,
    TimeBreakdown,
    account_time,
    anneal,
    compute_num_reads,
)
from app.solvers.exact_backend import (
    BudgetExhausted,
    ExactResult,
    brute_force_tsp,
    heuristic_tour,
    held_karp,
    hungarian_assignment,
    improve_tour,
    nearest_neighbor_tour,
    solve_restricted_exact,
)
from app.solvers.hybrid import HybridResult, HybridSettings, solve_hybrid
from app.solvers.qubo_backend import (
    ArcVar,
    QuboProblem,
    SlackVar,
    decode,
    encode_solution,
    energy,
    export_qubo_text,
    to_qubo,
    write_qubo_file,
)
