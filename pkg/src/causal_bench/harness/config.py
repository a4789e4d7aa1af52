"""Run configuration and its JSON form.

The JSON document mirrors :class:`RunConfig` field names; ``cohort_spec`` and
``match_spec`` are nested objects with :class:`CohortSpec` / :class:`MatchSpec`
field names. Every key is optional and unknown keys are rejected::

    {
      "cohort_spec": {"n_patients": 500, "noise_sd": 1.0},
      "match_spec": {"caliper_multiplier": 0.2},
      "effect_grid": [1.0, 2.0, 3.0],
      "reps_per_block": 200,
      "base_seed": 20240601,
      "parallelism": "auto",
      "output_dir": "results"
    }
"""

from __future__ import annotations

import dataclasses
import json
import os
from dataclasses import dataclass, field
from pathlib import Path

from ..exceptions import SpecError
from ..psm import MatchSpec
from ..simulation import CohortSpec

WORKERS_ENV = "CAUSAL_BENCH_WORKERS"
DEFAULT_SEED = 20240601


def default_effect_grid() -> tuple:
    return tuple(round(0.1 * i, 1) for i in range(1, 51))


@dataclass(frozen=True)
class RunConfig:
    cohort_spec: CohortSpec = field(default_factory=CohortSpec)
    match_spec: MatchSpec = field(default_factory=MatchSpec)
    effect_grid: tuple = field(default_factory=default_effect_grid)
    reps_per_block: int = 200
    base_seed: int = DEFAULT_SEED
    parallelism: int | str = "auto"
    output_dir: str = "results"

    def __post_init__(self):
        grid = tuple(float(e) for e in self.effect_grid)
        object.__setattr__(self, "effect_grid", grid)
        if not grid:
            raise SpecError("effect_grid must not be empty")
        if any(e < 0 or e != e for e in grid):
            raise SpecError("effect magnitudes must be >= 0")
        if len(set(grid)) != len(grid):
            raise SpecError("effect_grid contains duplicates")
        if int(self.reps_per_block) != self.reps_per_block or self.reps_per_block < 1:
            raise SpecError("reps_per_block must be a positive integer")
        if int(self.base_seed) != self.base_seed:
            raise SpecError("base_seed must be an integer")
        if self.parallelism != "auto" and (int(self.parallelism) != self.parallelism or self.parallelism < 1):
            raise SpecError("parallelism must be 'auto' or a positive integer")

    @property
    def n_experiments(self) -> int:
        return len(self.effect_grid) * self.reps_per_block

    def to_dict(self) -> dict:
        return {
            "cohort_spec": dataclasses.asdict(self.cohort_spec),
            "match_spec": dataclasses.asdict(self.match_spec),
            "effect_grid": list(self.effect_grid),
            "reps_per_block": self.reps_per_block,
            "base_seed": self.base_seed,
            "parallelism": self.parallelism,
            "output_dir": str(self.output_dir),
        }

    @classmethod
    def from_dict(cls, data: dict) -> "RunConfig":
        _reject_unknown(data, cls, "config")
        kwargs = dict(data)
        if "cohort_spec" in kwargs:
            _reject_unknown(kwargs["cohort_spec"], CohortSpec, "cohort_spec")
            kwargs["cohort_spec"] = CohortSpec(**kwargs["cohort_spec"])
        if "match_spec" in kwargs:
            _reject_unknown(kwargs["match_spec"], MatchSpec, "match_spec")
            kwargs["match_spec"] = MatchSpec(**kwargs["match_spec"])
        return cls(**kwargs)


def _reject_unknown(data, cls, where):
    if not isinstance(data, dict):
        raise SpecError(f"{where} must be a JSON object")
    known = {f.name for f in dataclasses.fields(cls)}
    unknown = sorted(set(data) - known)
    if unknown:
        raise SpecError(f"unknown key(s) in {where}: {', '.join(unknown)}")


def load_config(path) -> RunConfig:
    with open(path, encoding="utf-8") as fh:
        return RunConfig.from_dict(json.load(fh))


def save_config(config: RunConfig, path) -> None:
    Path(path).write_text(json.dumps(config.to_dict(), indent=2) + "\n", encoding="utf-8")


def resolve_workers(cli_value=None, config: RunConfig | None = None) -> int:
    """Worker count: CLI flag, then ``$CAUSAL_BENCH_WORKERS``, then the config."""
    value = cli_value
    if value is None:
        value = os.environ.get(WORKERS_ENV)
    if value is None and config is not None:
        value = config.parallelism
    if value is None or value == "auto":
        return os.cpu_count() or 1
    value = int(value)
    if value < 1:
        raise ValueError("worker count must be >= 1")
    return value
