#!/usr/bin/env python3
"""
Runtime smoke validation for tsp-cutplane.
Verifies that every module imports without a config file, a log directory
or network access, and that the CLI parser knows its three verbs.
Does NOT run any experiment.
"""

import importlib
import os
import sys

# Ensure the repository root is on sys.path so that 'app' and 'service'
# packages are importable.
_REPO_ROOT = os.path.dirname(os.path.dirname(os.path.abspath(__file__)))
if _REPO_ROOT not in sys.path:
    sys.path.insert(0, _REPO_ROOT)

MODULES_TO_CHECK = [
    "app.config",
    "app.logger",
    "app.model.domain",
    "app.model.formulation",
    "app.instances.tsplib_io",
    "app.preprocessing.caf",
    "app.solvers.exact_backend",
    "app.solvers.qubo_backend",
    "app.solvers.annealer",
    "app.solvers.hybrid",
    "app.cutting.cpa_engine",
    "app.cutting.trace_codec",
    "app.experiments.spec",
    "app.experiments.tables",
    "app.experiments.commands",
    "app.experiments.table_check",
    "service.experiment_runner",
    "run",
]


def safe_env() -> None:
    """Drop config overrides so imports see the built-in defaults only."""
    for key in ("TSPCUT_CONFIG_JSON", "TSPCUT_CONFIG_PATH", "TSPCUT_INSTANCE_DIR"):
        os.environ.pop(key, None)


def main() -> int:
    safe_env()

    errors: list[str] = []

    for mod_name in MODULES_TO_CHECK:
        try:
            importlib.import_module(mod_name)
            print(f"  ✅ {mod_name}")
        except Exception as exc:
            errors.append(f"  ❌ {mod_name}: {exc}")
            print(f"  ❌ {mod_name}: {exc}")

    if not errors:
        parser = importlib.import_module("run").build_parser()
        for verb in (["complexity"], ["solve"], ["export-qubo", "--n", "5"]):
            try:
                args = parser.parse_args(verb)
                print(f"  ✅ run.py {verb[0]} parses (verb={args.verb})")
            except SystemExit:
                errors.append(f"  ❌ run.py {verb[0]} does not parse")
                print(errors[-1])

    print()
    if errors:
        print(f"❌ {len(errors)} smoke check(s) failed.")
        return 1

    print(f"✅ All {len(MODULES_TO_CHECK)} module(s) imported successfully.")
    return 0


if __name__ == "__main__":
    sys.exit(main())
