#!/usr/bin/env python3
# ==============================================================================
# tsp-cutplane YAML Validation
# ==============================================================================
# Parses every YAML file in the repository, then checks the two kinds the
# code reads:
#   - app/experiments/expected_tables.yaml: required sections, integer n keys
#   - *config*.yaml / tspcut.yaml: only keys app.config understands
# Exits 0 on success, 1 on any error. Does not require network access.
# ==============================================================================

import os
import sys

import yaml

_REPO_ROOT = os.path.dirname(os.path.dirname(os.path.abspath(__file__)))
if _REPO_ROOT not in sys.path:
    sys.path.insert(0, _REPO_ROOT)

from app.config import DEFAULTS  # noqa: E402

# Directories to exclude from YAML scanning
EXCLUDED_DIRS = {".git", "examples", "logs", "out", "venv", ".venv", "__pycache__"}

EXPECTED_SECTIONS = ("tolerance", "complexity", "optimum")


def find_yaml_files(root_dir: str) -> list[str]:
    yaml_files: list[str] = []
    for dirpath, dirnames, filenames in os.walk(root_dir):
        dirnames[:] = [d for d in dirnames if d not in EXCLUDED_DIRS]
        for fname in filenames:
            if fname.endswith((".yaml", ".yml")):
                yaml_files.append(os.path.join(dirpath, fname))
    return sorted(yaml_files)


def parse_file(filepath: str) -> tuple[list, list[str]]:
    rel = os.path.relpath(filepath, _REPO_ROOT)
    try:
        with open(filepath, "r", encoding="utf-8") as fh:
            return [d for d in yaml.safe_load_all(fh) if d is not None], []
    except OSError as exc:
        return [], [f"ERROR: {rel}: cannot read file: {exc}"]
    except yaml.YAMLError as exc:
        mark = getattr(exc, "problem_mark", None)
        if mark is not None:
            return [], [f"ERROR: {rel}: line {mark.line + 1}: {getattr(exc, 'problem', exc)}"]
        return [], [f"ERROR: {rel}: {exc}"]


def check_expected_tables(rel: str, doc: dict) -> list[str]:
    errors = [f"ERROR: {rel}: missing section '{s}'" for s in EXPECTED_SECTIONS if s not in doc]
    for column, values in (doc.get("complexity") or {}).items():
        bad = [k for k in values if not isinstance(k, int)]
        if bad:
            errors.append(f"ERROR: {rel}: complexity.{column} has non-integer n {bad}")
    if "no_caf" not in (doc.get("optimum") or {}):
        errors.append(f"ERROR: {rel}: optimum.no_caf is required")
    return errors


def check_config(rel: str, doc: dict) -> list[str]:
    unknown = sorted(set(doc) - set(DEFAULTS))
    return [f"ERROR: {rel}: unknown config keys {unknown}"] if unknown else []


def main() -> int:
    yaml_files = find_yaml_files(_REPO_ROOT)
    if not yaml_files:
        print("No YAML files found to validate.")
        return 0

    all_errors: list[str] = []
    for filepath in yaml_files:
        rel = os.path.relpath(filepath, _REPO_ROOT)
        docs, errors = parse_file(filepath)
        all_errors.extend(errors)
        name = os.path.basename(filepath)
        for doc in docs:
            if not isinstance(doc, dict):
                continue
            if name == "expected_tables.yaml":
                all_errors.extend(check_expected_tables(rel, doc))
            elif "config" in name or name.startswith("tspcut"):
                all_errors.extend(check_config(rel, doc))
        if not errors:
            print(f"  ✅ {rel}")

    for err in all_errors:
        print(err)

    if all_errors:
        print(f"\n❌ {len(all_errors)} error(s) in {len(yaml_files)} file(s) checked.")
        return 1

    print(f"\n✅ All {len(yaml_files)} YAML file(s) validated successfully.")
    return 0


if __name__ == "__main__":
    sys.exit(main())
