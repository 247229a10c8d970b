"""Experiment configuration for the scripts in ``scripts/``."""
from __future__ import annotations

import dataclasses
import json
from dataclasses import dataclass, field
from pathlib import Path

from .pipeline import SYSTEM_NAMES


@dataclass
class ExperimentConfig:
    corpus: str
    out_dir: str = "runs/experiment"
    registry: str | None = None
    systems: list[str] = field(default_factory=lambda: ["rreg-s", "rreg-l", "ml-s", "ml-l"])
    # ML-L schema; "ml-l-wsj" adds plurality and paragraph distance
    ml_l_schema: str = "ml-l"
    classifier: str = "gbdt"
    seed: int = 0
    k: int | None = None
    split: str = "test"
    sed_level: str = "char"
    bleu_smooth: bool = False
    jobs: int = 1

    def __post_init__(self):
        bad = [s for s in self.systems if s not in SYSTEM_NAMES or s == "external"]
        if bad:
            raise ValueError(f"unknown systems {bad}")
        if self.ml_l_schema not in ("ml-l", "ml-l-wsj"):
            raise ValueError(f"ml_l_schema {self.ml_l_schema!r}")

    @classmethod
    def from_json(cls, path) -> "ExperimentConfig":
        data = json.loads(Path(path).read_text(encoding="utf-8"))
        known = {f.name for f in dataclasses.fields(cls)}
        unknown = set(data) - known
        if unknown:
            raise ValueError(f"unknown config keys {sorted(unknown)}")
        return cls(**data)

    def schema_for(self, system: str) -> str:
        return "ml-s" if system == "ml-s" else self.ml_l_schema
