#!/usr/bin/env python3
"""
Validation: experiment layer (sizes, variants, tables, commands, config, runner).

Tests:
1. Size and variant parsing, ExperimentSpec validation.
2. Table helpers: half-up rounding, reductions, mean/dev, cell formatting, CSV/JSON.
3. complexity: published counts and reductions for n = 5, 6, 9 plus summary rows.
4. solve (exact): optima, GAP 0, CILP size guard rows, trace files;
   anneal CILP rows beyond cilp_anneal_max_n are TooLarge.
5. export-qubo: byte-identical output, variable counts, out-of-range n.
6. Config: env JSON > env path > file > defaults, instance dir override, bad values.
7. Runner: results in job order with one or two workers.
"""

import json
import os
import tempfile
from pathlib import Path

from check_support import BERLIN52, check, finish, raises, section

from app.config import ENV_INSTANCE_DIR, ENV_JSON, ENV_PATH, Config, ConfigError
from app.cutting.cpa_engine import Backend
from app.cutting.trace_codec import validate_trace
from app.experiments.commands import cmd_complexity, cmd_export_qubo, cmd_solve
from app.experiments.spec import ALL_VARIANTS, ExperimentSpec, Variant, parse_sizes, parse_variants
from app.experiments.tables import (
    Table,
    format_cell,
    mean_dev,
    percent_reduction,
    render_csv,
    render_json,
    round_half_up,
    write_table,
)
from app.model.domain import OutOfRange
from service.experiment_runner import ExperimentRunner


def _clear_env() -> None:
    for key in (ENV_JSON, ENV_PATH, ENV_INSTANCE_DIR):
        os.environ.pop(key, None)


def check_parsing() -> None:
    section("parsing")
    check(parse_sizes("5-7,20,6") == (5, 6, 7, 20), "ranges expand, duplicates dropped")
    check(raises(ValueError, parse_sizes, "5-x"), "bad range is rejected")
    check(raises(ValueError, parse_sizes, " , "), "empty size list is rejected")
    check(parse_variants("all") == ALL_VARIANTS, "'all' is the four variants")
    check(parse_variants("cpa+caf, cilp") == (Variant("cpa", True), Variant("cilp", False)),
          "comma list, bare formulation means no CAF")
    check([v.label for v in ALL_VARIANTS] == ["cilp+no_caf", "cilp+caf", "cpa+no_caf", "cpa+caf"],
          "variant labels")
    check(raises(ValueError, Variant.parse, "qaoa+caf"), "unknown formulation")
    check(raises(ValueError, Variant.parse, "cpa+fast"), "unknown filter")

    spec = ExperimentSpec(instance_path=Path(BERLIN52), sizes=(5,), runs=5)
    check(spec.effective_runs == 1, "exact backend runs once")
    check(ExperimentSpec(Path(BERLIN52), (5,), backend=Backend.ANNEAL).effective_runs == 5, "anneal runs 5 times")
    check(spec.run_seed(3) == 45, "run seed = seed + run index")
    check(raises(ValueError, ExperimentSpec, Path(BERLIN52), (5,), runs=0), "runs 0 is rejected")
    check(raises(ValueError, ExperimentSpec, Path(BERLIN52), (5,), fmt="xml"), "unknown format")
    check(raises(OutOfRange, ExperimentSpec(Path(BERLIN52), (5, 53)).check_sizes, 52), "n=53 is out of range")


def check_tables() -> None:
    section("tables")
    check(round_half_up(19.5) == 20 and round_half_up(95.38) == 95 and round_half_up(0.5) == 1,
          "half-up rounding")
    check(percent_reduction(20, 18) == 10 and percent_reduction(None, 3) is None, "reduction percent")
    check(percent_reduction(0, 0) is None, "zero base has no reduction")
    check(mean_dev([1.0, 3.0]) == (2.0, 1.0) and mean_dev([]) == (None, None), "mean and population deviation")
    check([format_cell(v) for v in (None, 3.14159, True, 5, "x")] == ["--", "3.14", "true", "5", "x"],
          "cell formatting")
    table = Table(("n", "value"), ({"n": 5, "value": 2.5}, {"n": "mean", "value": None}))
    check(render_csv(table) == "n,value\n5,2.50\nmean,--\n",
          "CSV with dashes for missing values")
    doc = json.loads(render_json(table))
    check(doc["columns"] == ["n", "value"] and doc["rows"][1]["value"] is None, "JSON keeps nulls")
    with tempfile.TemporaryDirectory() as tmp:
        target = write_table(table, Path(tmp) / "sub" / "t.csv")
        check(target.read_text(encoding="utf-8") == render_csv(table), "table written to a nested path")


def check_complexity() -> None:
    section("complexity")
    spec = ExperimentSpec(instance_path=Path(BERLIN52), sizes=(5, 6, 9))
    table = cmd_complexity(spec)
    rows = {row["n"]: row for row in table.rows}
    check((rows[5]["var_no_caf"], rows[5]["var_caf"], rows[5]["var_reduction_pct"]) == (20, 18, 10),
          "n=5: 20 -> 18 variables, 10%")
    check(rows[6]["var_reduction_pct"] == 20, "n=6: 30 -> 24 variables, 20%")
    check(rows[5]["constr_cilp"] == 35 and rows[9]["constr_cilp"] == 519, "CILP constraint counts")
    check(rows[9]["constr_cpa_no_caf"] == 22 and rows[9]["constr_cpa_caf"] == 24,
          "n=9: CPA keeps 22 / 24 constraints")
    check(rows[9]["constr_reduction_no_caf_pct"] == round_half_up((519 - 22) / 519 * 100.0),
          "constraint reduction against CILP")
    labels = [row["n"] for row in table.rows[-2:]]
    check(labels == ["mean", "mean_n>=20"], "summary rows")
    mean_row = table.rows[-2]["var_reduction_pct"]
    check(abs(mean_row - (10.0 + 20.0 + 14 / 72 * 100.0) / 3) < 1e-9, "mean uses unrounded reductions")
    check(table.rows[-1]["var_reduction_pct"] is None, "no n >= 20, no large-n mean")
    check(table.columns[0] == "n" and len(table.columns) == 9, "column order")


def check_solve() -> None:
    section("solve (exact)")
    spec = ExperimentSpec(instance_path=Path(BERLIN52), sizes=(5, 6), cilp_max_n=5)
    with tempfile.TemporaryDirectory() as tmp:
        traces = Path(tmp) / "traces"
        table = cmd_solve(spec, traces_dir=traces, include_timings=False)
        files = sorted(traces.glob("*.json"))
        check(len(files) == 6, "one trace per successful job")
        check(all(validate_trace(json.loads(f.read_text())) is None for f in files), "every trace validates")
    rows = {(row["n"], row["variant"]): row for row in table.rows}
    check(len(table.rows) == 8, "one row per (n, variant)")
    check(abs(rows[(5, "cpa+no_caf")]["of_avg"] - 2314.55) < 0.01, "n=5 CPA optimum")
    check(abs(rows[(5, "cilp+no_caf")]["of_avg"] - 2314.55) < 0.01, "n=5 CILP optimum")
    check(abs(rows[(6, "cpa+caf")]["of_avg"] - 2323.20) < 0.01, "n=6 CAF optimum")
    check(rows[(5, "cpa+caf")]["gap_pct"] == 0.0 and rows[(5, "cpa+caf")]["feas_pct"] == 100.0,
          "exact rows: GAP 0, Feas 100")
    guarded = rows[(6, "cilp+no_caf")]
    check(guarded["of_avg"] is None and guarded["error"].startswith("TooLarge"), "CILP beyond cilp_max_n")
    check(rows[(6, "cpa+no_caf")]["error"] is None and rows[(6, "cpa+no_caf")]["runs"] == 1, "CPA row is clean")


def check_anneal_guard() -> None:
    section("solve (anneal CILP guard)")
    spec = ExperimentSpec(instance_path=Path(BERLIN52), sizes=(6,), variants=(Variant("cilp", True),),
                          backend=Backend.ANNEAL, runs=2, cilp_anneal_max_n=5)
    check(spec.cilp_limit == 5, "anneal obeys the smaller limit")
    check(ExperimentSpec(Path(BERLIN52), (6,), backend=Backend.HYBRID).cilp_limit == 8, "hybrid default is 8")
    check(ExperimentSpec(Path(BERLIN52), (6,)).cilp_limit == 15, "exact keeps cilp_max_n")
    table = cmd_solve(spec)
    row = table.rows[0]
    check(len(table.rows) == 1 and row["runs"] == 2, "one row, every run accounted for")
    check(row["of_avg"] is None and row["error"].startswith("TooLarge") and "anneal" in row["error"],
          "anneal CILP beyond cilp_anneal_max_n is a TooLarge row")


def check_export() -> None:
    section("export-qubo")
    spec = ExperimentSpec(instance_path=Path(BERLIN52), sizes=(5,))
    with tempfile.TemporaryDirectory() as tmp:
        a = cmd_export_qubo(spec, 5, Variant("cpa", True), Path(tmp) / "a.qubo")
        b = cmd_export_qubo(spec, 5, Variant("cpa", True), Path(tmp) / "b.qubo")
        check(a.read_bytes() == b.read_bytes(), "two exports are byte-identical")
        check("# variables: 18" in a.read_text(), "n=5 CPA+CAF has 18 variables")
        c = cmd_export_qubo(spec, 5, Variant("cilp", False), Path(tmp) / "c.qubo")
        check("# variables: 60" in c.read_text() and "# slack_variables: 40" in c.read_text(),
              "n=5 CILP: 20 arcs plus 40 slack bits")
        check(raises(OutOfRange, cmd_export_qubo, spec, 53, Variant("cpa", False), Path(tmp) / "d.qubo"),
              "n=53 is out of range")


def check_config() -> None:
    section("config")
    _clear_env()
    cwd = os.getcwd()
    with tempfile.TemporaryDirectory() as tmp:
        os.chdir(tmp)
        try:
            cfg = Config()
            check(cfg.seed == 42 and cfg.runs == 5 and cfg.hybrid_budget_s == 5.0, "defaults")
            check(cfg.read_schedule.num_reads_max == 4651, "default read schedule")
            check(cfg.cilp_max_n == 15 and cfg.cilp_anneal_max_n == 8, "default CILP limits")

            Path("tspcut.json").write_text(json.dumps({"seed": 1}))
            check(Config().seed == 1, "tspcut.json in the working directory")
            Path("alt.yaml").write_text("seed: 2\nread_schedule:\n  n_start: 500\n")
            alt = Config("alt.yaml")
            check(alt.seed == 2 and alt.read_schedule.n_start == 500, "YAML file argument")

            os.environ[ENV_PATH] = "alt.yaml"
            check(Config().seed == 2, "env path beats tspcut.json")
            os.environ[ENV_JSON] = json.dumps({"seed": 3, "workers": 4})
            env_cfg = Config()
            check(env_cfg.seed == 3 and env_cfg.workers == 4, "env JSON beats everything")
            os.environ[ENV_INSTANCE_DIR] = "/srv/tsp"
            check(Config().instance_dir == Path("/srv/tsp"), "instance dir override")

            os.environ[ENV_JSON] = "{not json"
            check(raises(ConfigError, Config), "broken env JSON")
            os.environ[ENV_JSON] = json.dumps({"sede": 1})
            check(raises(ConfigError, Config), "unknown key")
            os.environ[ENV_JSON] = json.dumps({"runs": 0})
            check(raises(ConfigError, Config), "runs 0")
            os.environ[ENV_JSON] = json.dumps({"read_schedule": {"bogus": 1}})
            check(raises(ConfigError, Config), "unknown read schedule field")
            os.environ[ENV_JSON] = json.dumps({"hybrid_budget_s": -1})
            check(raises(ConfigError, Config), "negative hybrid budget")
            _clear_env()
            check(raises(ConfigError, Config, "missing.json"), "missing file argument")
        finally:
            _clear_env()
            os.chdir(cwd)


def check_runner() -> None:
    section("runner")
    jobs = [-3, 1, -2, 7]
    check(ExperimentRunner(1).map(abs, jobs) == [3, 1, 2, 7], "sequential order")
    check(ExperimentRunner(2).map(abs, jobs) == [3, 1, 2, 7], "process pool keeps job order")
    check(ExperimentRunner(2).map(abs, []) == [], "no jobs")
    check(raises(ValueError, ExperimentRunner, 0), "zero workers is rejected")


def main() -> None:
    check_parsing()
    check_tables()
    check_complexity()
    check_solve()
    check_anneal_guard()
    check_export()
    check_config()
    check_runner()
    finish("Experiments")


if __name__ == "__main__":
    main()
