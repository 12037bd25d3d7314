# app/config.py
from __future__ import annotations

import json
import os
from pathlib import Path
from typing import Any, Dict

import yaml

from app.model.domain import TspToolkitError
from app.solvers.annealer import ReadSchedule

_DEFAULT_PATH = Path("tspcut.json")

ENV_JSON = "TSPCUT_CONFIG_JSON"
ENV_PATH = "TSPCUT_CONFIG_PATH"
ENV_INSTANCE_DIR = "TSPCUT_INSTANCE_DIR"

DEFAULTS: Dict[str, Any] = {
    "instance_dir": "data",
    "instance": "berlin52.tsp",
    "log_dir": "logs",
    "seed": 42,
    "runs": 5,
    "sweeps": 2000,
    "hybrid_budget_s": 5.0,
    "workers": 1,
    "cilp_max_n": 15,
    "cilp_anneal_max_n": 8,
    "read_schedule": {},
}


class ConfigError(TspToolkitError, ValueError):
    pass


class Config:
    """
    Source lookup order (first found wins):

    1.  ENV `TSPCUT_CONFIG_JSON`  - whole JSON document
    2.  ENV `TSPCUT_CONFIG_PATH`  - path to a JSON or YAML file
    3.  `path` argument, or `tspcut.json` in the working directory
    4.  built-in defaults

    `TSPCUT_INSTANCE_DIR` overrides `instance_dir` from any source.
    """

    def __init__(self, path: str | Path | None = None) -> None:
        cfg_dict = {**DEFAULTS, **self._load_config(path)}
        unknown = sorted(set(cfg_dict) - set(DEFAULTS))
        if unknown:
            raise ConfigError(f"unknown config keys: {', '.join(unknown)}")

        self.instance_dir   = Path(os.getenv(ENV_INSTANCE_DIR) or cfg_dict["instance_dir"])
        self.instance       = str(cfg_dict["instance"])
        self.log_dir        = Path(cfg_dict["log_dir"])
        self.seed           = _as_int(cfg_dict, "seed")
        self.runs           = _as_int(cfg_dict, "runs", minimum=1)
        self.sweeps         = _as_int(cfg_dict, "sweeps", minimum=1)
        self.workers        = _as_int(cfg_dict, "workers", minimum=1)
        self.cilp_max_n     = _as_int(cfg_dict, "cilp_max_n", minimum=3)
        self.cilp_anneal_max_n = _as_int(cfg_dict, "cilp_anneal_max_n", minimum=3)
        try:
            self.hybrid_budget_s = float(cfg_dict["hybrid_budget_s"])
        except (TypeError, ValueError) as e:
            raise ConfigError(f"hybrid_budget_s: {e}") from e
        if self.hybrid_budget_s <= 0:
            raise ConfigError(f"hybrid_budget_s must be positive, got {self.hybrid_budget_s}")

        rs = cfg_dict["read_schedule"]
        if not isinstance(rs, dict):
            raise ConfigError("read_schedule must be an object")
        try:
            self.read_schedule = ReadSchedule(**rs)
        except (TypeError, ValueError) as e:
            raise ConfigError(f"read_schedule: {e}") from e

    @property
    def instance_path(self) -> Path:
        p = Path(self.instance)
        return p if p.is_absolute() or p.exists() else self.instance_dir / p

    @staticmethod
    def _load_config(path_arg: str | Path | None) -> Dict[str, Any]:
        # 1. JSON straight from the environment
        raw = os.getenv(ENV_JSON)
        if raw:
            try:
                return _as_mapping(json.loads(raw), ENV_JSON)
            except json.JSONDecodeError as e:
                raise ConfigError(f"ENV {ENV_JSON}: invalid JSON: {e}") from e

        # 2. file path from the environment
        env_path = os.getenv(ENV_PATH)
        if env_path:
            if not Path(env_path).exists():
                raise ConfigError(f"ENV {ENV_PATH}: {env_path} does not exist")
            return _read_file(env_path)

        # 3. explicit argument or the default file
        if path_arg is not None:
            if not Path(path_arg).exists():
                raise ConfigError(f"config file {path_arg} does not exist")
            return _read_file(path_arg)
        if _DEFAULT_PATH.exists():
            return _read_file(_DEFAULT_PATH)

        # 4. defaults
        return {}


# ───── helpers ──────────────────────────────────────────────────────
def _read_file(p: str | Path) -> Dict[str, Any]:
    p = Path(p)
    try:
        text = p.read_text(encoding="utf-8")
        if p.suffix.lower() in (".yaml", ".yml"):
            return _as_mapping(yaml.safe_load(text) or {}, str(p))
        return _as_mapping(json.loads(text), str(p))
    except (OSError, json.JSONDecodeError, yaml.YAMLError) as e:
        raise ConfigError(f"cannot read configuration {p}: {e}") from e


def _as_mapping(value: Any, source: str) -> Dict[str, Any]:
    if not isinstance(value, dict):
        raise ConfigError(f"{source}: top level must be an object")
    return value


def _as_int(cfg: Dict[str, Any], key: str, minimum: int | None = None) -> int:
    value = cfg[key]
    if isinstance(value, bool) or not isinstance(value, int):
        raise ConfigError(f"{key} must be an integer, got {value!r}")
    if minimum is not None and value < minimum:
        raise ConfigError(f"{key} must be >= {minimum}, got {value}")
    return value
