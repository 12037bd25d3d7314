"""Experiment description shared by the CLI verbs."""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

from app.cutting.cpa_engine import Backend
from app.model.domain import OutOfRange
from app.solvers.annealer import ReadSchedule


@dataclass(frozen=True, order=True)
class Variant:
    formulation: str
    caf: bool

    def __post_init__(self) -> None:
        if self.formulation not in ("cilp", "cpa"):
            raise ValueError(f"formulation must be cilp or cpa, got {self.formulation!r}")

    @property
    def label(self) -> str:
        return f"{self.formulation}+{'caf' if self.caf else 'no_caf'}"

    @classmethod
    def parse(cls, text: str) -> "Variant":
        """'cpa+caf', 'cilp+no_caf' (a bare formulation means no CAF)."""
        formulation, _, filt = text.strip().lower().partition("+")
        if filt not in ("", "caf", "no_caf"):
            raise ValueError(f"unknown variant {text!r}")
        return cls(formulation=formulation, caf=filt == "caf")


ALL_VARIANTS: tuple[Variant, ...] = (
    Variant("cilp", False),
    Variant("cilp", True),
    Variant("cpa", False),
    Variant("cpa", True),
)


def parse_variants(text: str) -> tuple[Variant, ...]:
    if text.strip().lower() == "all":
        return ALL_VARIANTS
    return tuple(Variant.parse(part) for part in text.split(",") if part.strip())


def parse_sizes(text: str) -> tuple[int, ...]:
    """'5-15,20,25' -> (5, 6, ..., 15, 20, 25); order kept, duplicates dropped."""
    sizes: list[int] = []
    for part in text.split(","):
        part = part.strip()
        if not part:
            continue
        lo, dash, hi = part.partition("-")
        try:
            values = range(int(lo), int(hi) + 1) if dash else [int(lo)]
        except ValueError as e:
            raise ValueError(f"bad size {part!r}") from e
        for n in values:
            if n not in sizes:
                sizes.append(n)
    if not sizes:
        raise ValueError("no sizes given")
    return tuple(sizes)


@dataclass(frozen=True)
class ExperimentSpec:
    instance_path: Path
    sizes: tuple[int, ...]
    variants: tuple[Variant, ...] = ALL_VARIANTS
    backend: Backend = Backend.EXACT
    runs: int = 5
    seed: int = 42
    sweeps: int = 2000
    budget_s: Optional[float] = None
    read_schedule: ReadSchedule = field(default_factory=ReadSchedule)
    cilp_max_n: int = 15
    cilp_anneal_max_n: int = 8
    workers: int = 1
    output: Optional[Path] = None
    fmt: str = "csv"

    def __post_init__(self) -> None:
        if self.runs < 1:
            raise ValueError(f"runs must be >= 1, got {self.runs}")
        if self.workers < 1:
            raise ValueError(f"workers must be >= 1, got {self.workers}")
        if self.fmt not in ("csv", "json"):
            raise ValueError(f"format must be csv or json, got {self.fmt!r}")
        if not self.variants:
            raise ValueError("at least one variant is required")

    @property
    def effective_runs(self) -> int:
        """The exact backend is deterministic, so it runs once."""
        return 1 if self.backend is Backend.EXACT else self.runs

    @property
    def cilp_limit(self) -> int:
        """Largest n a CILP row is solved at with this backend."""
        if self.backend is Backend.EXACT:
            return self.cilp_max_n
        return min(self.cilp_max_n, self.cilp_anneal_max_n)

    def run_seed(self, run_index: int) -> int:
        return self.seed + run_index

    def check_sizes(self, dimension: int) -> None:
        for n in self.sizes:
            if not (3 <= n <= dimension):
                raise OutOfRange(f"size {n} outside 3..{dimension}")
