"""Experiment specs and their materialized defaults."""
from __future__ import annotations

import json
import sys
from dataclasses import asdict, dataclass, field, fields
from pathlib import Path

from ..errors import SpecError
from ..network import InputKind
from ..reservoir import NodeKind, ReservoirConfig

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

TASKS = ("lorenz_xz", "map_xy", "memory", "input_vector_comparison")
DEFAULT_FLIP_FRACTIONS = [round(0.05 * i, 2) for i in range(11)]
DEFAULT_SYMMETRY_FLIPS = [0, 1, 2, 5, 10, 20, 50, 100]

# (task, node kind) -> reservoir parameters and normalization target
TASK_DEFAULTS: dict[tuple[str, str], dict] = {
    ("lorenz_xz", "polynomial"): {"lam": 1.4, "target": 0.5},
    ("lorenz_xz", "linear"): {"lam": 1.4, "target": 0.5},
    ("lorenz_xz", "leaky_tanh"): {"alpha": 0.35, "target": 1.0},
    ("map_xy", "polynomial"): {"lam": 5.0, "target": 0.5},
    ("map_xy", "linear"): {"lam": 5.0, "target": 0.5},
    ("map_xy", "leaky_tanh"): {"alpha": 0.35, "target": 1.0},
    ("memory", "polynomial"): {"lam": 6.0, "target": 0.5},
    ("memory", "linear"): {"lam": 6.0, "target": 0.5},
    ("memory", "leaky_tanh"): {"alpha": 0.66, "target": 1.36},
}
# parameter sets the source leaves unstated; echoed in run metadata
UNSTATED_DEFAULTS = {
    ("map_xy", "leaky_tanh"): "alpha and normalization target carried over from the Lorenz tanh runs",
    ("map_xy", "linear"): "lambda carried over from the polynomial map runs",
}

RESERVOIR_KEYS = {"lam", "p1", "p2", "p3", "alpha", "dt", "substeps", "transient", "n_record"}


@dataclass
class ExperimentSpec:
    task: str = "lorenz_xz"
    node_kind: str = "polynomial"
    M: int = 100
    n_edges: int = 9800
    flip_fractions: list[float] | None = None
    flip_counts: list[int] | None = None
    sparsity_grid: list[float] | None = None
    realizations: int = 20
    base_seed: int = 0
    normalization_target: float | None = None
    normalization_mode: str = "real_part"
    input_kind: str = "alternating"
    ridge_k: float = 1e-5
    k_max: int = 100
    # Lorenz samples per reservoir step
    stride: int = 1
    count_symmetries: bool = False
    symmetry_threshold: float = 1e40
    symmetry_search_budget: int = 50
    # zeros of the symmetric base are confined to this many nodes (None = uniform)
    symmetric_core: int | None = 58
    reservoir: dict = field(default_factory=dict)

    def __post_init__(self):
        self.validate()

    def validate(self) -> None:
        if self.task not in TASKS:
            raise SpecError(f"unknown task {self.task!r}; expected one of {TASKS}")
        try:
            NodeKind(self.node_kind)
            InputKind(self.input_kind)
        except ValueError as exc:
            raise SpecError(str(exc)) from None
        if self.normalization_mode not in ("real_part", "modulus"):
            raise SpecError("normalization_mode must be 'real_part' or 'modulus'")
        if self.realizations < 1:
            raise SpecError("realizations must be at least 1")
        if self.M < 2 or not 0 < self.n_edges <= self.M * (self.M - 1):
            raise SpecError("need M >= 2 and 0 < n_edges <= M(M-1)")
        if self.base_seed < 0:
            raise SpecError("base_seed must be unsigned")
        if self.flip_fractions is not None and any(not 0 <= f <= 1 for f in self.flip_fractions):
            raise SpecError("flip fractions must lie in [0, 1]")
        if self.flip_counts is not None:
            if any(int(c) != c or c < 0 for c in self.flip_counts):
                raise SpecError("flip counts must be non-negative integers")
            if max(self.flip_counts, default=0) > self.n_edges:
                raise SpecError("flip count exceeds the number of +1 edges")
        if self.sparsity_grid is not None:
            if not self.sparsity_grid or any(not 0 < p <= 1 for p in self.sparsity_grid):
                raise SpecError("sparsity grid must be a non-empty list of values in (0, 1]")
        if self.stride < 1 or self.k_max < 1 or not self.ridge_k > 0:
            raise SpecError("stride, k_max and ridge_k must be positive")
        unknown = set(self.reservoir) - RESERVOIR_KEYS
        if unknown:
            raise SpecError(f"unknown reservoir keys: {sorted(unknown)}")
        if self.normalization_target is not None and not self.normalization_target > 0:
            raise SpecError("normalization_target must be positive")
        self.reservoir_config()  # raises on bad values

    @property
    def task_defaults(self) -> dict:
        base_task = "lorenz_xz" if self.task == "input_vector_comparison" else self.task
        return TASK_DEFAULTS[(base_task, self.node_kind)]

    @property
    def target(self) -> float:
        if self.normalization_target is not None:
            return float(self.normalization_target)
        return self.task_defaults["target"]

    def reservoir_config(self, node_kind: str | None = None) -> ReservoirConfig:
        kind = node_kind or self.node_kind
        base_task = "lorenz_xz" if self.task == "input_vector_comparison" else self.task
        params = {k: v for k, v in TASK_DEFAULTS[(base_task, kind)].items() if k != "target"}
        params.update(self.reservoir)
        try:
            return ReservoirConfig(node_kind=kind, M=self.M, **params)
        except (TypeError, ValueError) as exc:
            raise SpecError(f"invalid reservoir parameters: {exc}") from None

    def flip_grid(self, symmetry: bool = False) -> list[tuple[str, float]]:
        """Grid points as ('count', n) or ('fraction', eps)."""
        if self.flip_counts is not None:
            return [("count", int(c)) for c in self.flip_counts]
        if self.flip_fractions is not None:
            return [("fraction", float(f)) for f in self.flip_fractions]
        if symmetry:
            return [("count", c) for c in DEFAULT_SYMMETRY_FLIPS]
        return [("fraction", f) for f in DEFAULT_FLIP_FRACTIONS]

    def materialize(self) -> dict:
        """All settings with defaults filled in, for provenance."""
        d = asdict(self)
        d["resolved"] = {
            "normalization_target": self.target,
            "reservoir": asdict(self.reservoir_config()),
            "flip_grid": self.flip_grid(),
            "rng": "numpy PCG64 seeded through SeedSequence(base_seed, spawn_key=path)",
        }
        d["resolved"]["reservoir"]["node_kind"] = self.node_kind
        base_task = "lorenz_xz" if self.task == "input_vector_comparison" else self.task
        note = UNSTATED_DEFAULTS.get((base_task, self.node_kind))
        if note:
            d["resolved"]["unstated_defaults"] = note
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "ExperimentSpec":
        names = {f.name for f in fields(cls)}
        unknown = set(d) - names
        if unknown:
            raise SpecError(f"unknown spec keys: {sorted(unknown)}")
        try:
            return cls(**d)
        except TypeError as exc:
            raise SpecError(str(exc)) from None

    @classmethod
    def load(cls, path: str | Path) -> "ExperimentSpec":
        path = Path(path)
        try:
            text = path.read_text()
        except OSError as exc:
            raise SpecError(f"cannot read spec {path}: {exc}") from None
        try:
            if path.suffix == ".json":
                data = json.loads(text)
            else:
                data = tomllib.loads(text)
        except (json.JSONDecodeError, tomllib.TOMLDecodeError) as exc:
            raise SpecError(f"{path}: {exc}") from None
        return cls.from_dict(data)
