from app.experiments.commands import (
    RunSummary,
    SolveJob,
    build_variant_instance,
    cmd_complexity,
    cmd_export_qubo,
    cmd_solve,
    run_solve_job,
)
from app.experiments.spec import ALL_VARIANTS, ExperimentSpec, Variant, parse_sizes, parse_variants
from app.experiments.tables import COMPLEXITY_COLUMNS, SOLVE_COLUMNS, Table, write_table
