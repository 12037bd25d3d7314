#!/usr/bin/env python3
"""tsp-cutplane command line.

    run.py complexity  --sizes 5-15,20        [--check]
    run.py solve       --sizes 5-10 --variant cpa+caf --backend anneal --runs 5
    run.py export-qubo --n 5 --variant cpa+caf --output out/n5.qubo
"""
import argparse
import logging
import sys
from pathlib import Path

from app.config import Config, ConfigError
from app.cutting.cpa_engine import Backend
from app.experiments.commands import cmd_complexity, cmd_export_qubo, cmd_solve
from app.experiments.spec import ExperimentSpec, parse_sizes, parse_variants
from app.experiments.table_check import check_complexity, check_solve, report
from app.experiments.tables import write_table
from app.logger import add_file_logger, setup_logging
from app.model.domain import TspToolkitError
from service.experiment_runner import ExperimentRunner

EXIT_USAGE = 2


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="JSON/YAML config file (default: tspcut.json)")
    common.add_argument("--instance", help="TSPLIB file; relative names resolve in the instance dir")
    common.add_argument("--variant", default="all",
                        help="comma list of cilp|cpa[+caf|+no_caf], or 'all'")
    common.add_argument("--seed", type=int)
    common.add_argument("--output", type=Path, help="output file (default: stdout)")
    common.add_argument("--format", dest="fmt", choices=("csv", "json"), default="csv")
    common.add_argument("--workers", type=int)
    common.add_argument("--log-dir", type=Path)
    common.add_argument("--quiet", action="store_true", help="no console logging")

    parser = argparse.ArgumentParser(prog="run.py", description="TSP cutting-plane experiments")
    sub = parser.add_subparsers(dest="verb", required=True)

    p = sub.add_parser("complexity", parents=[common], help="model size table")
    p.add_argument("--sizes", default="5-15,20,25,30,35,40,45")
    p.add_argument("--check", action="store_true", help="compare with the expected tables")

    p = sub.add_parser("solve", parents=[common], help="solve table")
    p.add_argument("--sizes", default="5-10")
    p.add_argument("--backend", choices=[b.value for b in Backend], default=Backend.EXACT.value)
    p.add_argument("--runs", type=int)
    p.add_argument("--sweeps", type=int)
    p.add_argument("--budget-s", type=float, help="per-iteration wall-clock budget")
    p.add_argument("--traces", type=Path, help="directory for per-run JSON traces")
    p.add_argument("--no-timings", action="store_true", help="omit wall-clock fields from traces")
    p.add_argument("--check", action="store_true", help="compare with the expected tables")

    p = sub.add_parser("export-qubo", parents=[common], help="write the QUBO of the initial model")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--penalty", type=float)
    p.set_defaults(variant="cpa+caf")
    return parser


def build_spec(args: argparse.Namespace, cfg: Config) -> ExperimentSpec:
    instance = Path(args.instance) if args.instance else cfg.instance_path
    if args.instance and not instance.exists() and not instance.is_absolute():
        instance = cfg.instance_dir / instance
    backend = Backend(getattr(args, "backend", Backend.EXACT.value))
    budget = getattr(args, "budget_s", None)
    if budget is None and backend is Backend.HYBRID:
        budget = cfg.hybrid_budget_s
    return ExperimentSpec(
        instance_path=instance,
        sizes=parse_sizes(args.sizes) if hasattr(args, "sizes") else (args.n,),
        variants=parse_variants(args.variant),
        backend=backend,
        runs=getattr(args, "runs", None) or cfg.runs,
        seed=cfg.seed if args.seed is None else args.seed,
        sweeps=getattr(args, "sweeps", None) or cfg.sweeps,
        budget_s=budget,
        read_schedule=cfg.read_schedule,
        cilp_max_n=cfg.cilp_max_n,
        cilp_anneal_max_n=cfg.cilp_anneal_max_n,
        workers=args.workers or cfg.workers,
        output=args.output,
        fmt=args.fmt,
    )


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        cfg = Config(args.config)
        spec = build_spec(args, cfg)
    except (ConfigError, ValueError) as exc:
        print(f"❌ {exc}", file=sys.stderr)
        return EXIT_USAGE

    # ─── logging ─────────────────────────────────────────────────
    log_dir = args.log_dir or cfg.log_dir
    _, important_log = setup_logging(log_dir, console=not args.quiet)
    run_log = add_file_logger("EXPERIMENT", log_dir / "experiments.log", level=logging.INFO)
    run_log.info("%s %s", args.verb, " ".join(sys.argv[1:]))

    runner = ExperimentRunner(spec.workers)
    try:
        if args.verb == "complexity":
            table = cmd_complexity(spec, runner)
            write_table(table, spec.output, spec.fmt)
            return report(check_complexity(table)) if args.check else 0

        if args.verb == "solve":
            table = cmd_solve(spec, runner, traces_dir=args.traces,
                              include_timings=not args.no_timings)
            write_table(table, spec.output, spec.fmt)
            return report(check_solve(table)) if args.check else 0

        if len(spec.variants) != 1:
            raise ValueError("export-qubo needs exactly one --variant")
        output = spec.output or Path(f"n{args.n}_{spec.variants[0].label}.qubo")
        cmd_export_qubo(spec, args.n, spec.variants[0], output, penalty=args.penalty)
        return 0
    except (TspToolkitError, ValueError, OSError) as exc:
        important_log.error("[CLI] %s failed: %s", args.verb, exc,
                            extra={"type": "cli", "evt": "error"})
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
