"""Tabular experiment records with CSV/JSON serialization.

Floats print with 17 significant digits so CSV round-trips float64 exactly.
"""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass, field
from typing import Optional

__all__ = ["ExperimentReport", "format_value"]


def format_value(v) -> str:
    if isinstance(v, bool):
        return str(v)
    if isinstance(v, float):
        return f"{v:.17g}"
    return str(v)


@dataclass
class ExperimentReport:
    name: str
    rows: list = field(default_factory=list)
    fitted: dict = field(default_factory=dict)
    passed: Optional[bool] = None
    flags: dict = field(default_factory=dict)
    runtime_s: float = 0.0
    config: dict = field(default_factory=dict)

    @property
    def columns(self) -> list:
        return list(self.rows[0].keys()) if self.rows else []

    def to_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(self.columns)
            for row in self.rows:
                w.writerow([format_value(row.get(c)) for c in self.columns])

    def to_json_dict(self) -> dict:
        return {
            "name": self.name,
            "rows": self.rows,
            "fitted": self.fitted,
            "passed": self.passed,
            "flags": self.flags,
            "runtime_s": self.runtime_s,
            "config": self.config,
        }

    def to_json(self, path) -> None:
        with open(path, "w") as fh:
            json.dump(self.to_json_dict(), fh, indent=1, default=_jsonable)

    @classmethod
    def from_json(cls, path) -> "ExperimentReport":
        with open(path) as fh:
            d = json.load(fh)
        return cls(
            name=d["name"],
            rows=d["rows"],
            fitted=d["fitted"],
            passed=d["passed"],
            flags=d["flags"],
            runtime_s=d["runtime_s"],
            config=d["config"],
        )


def _jsonable(v):
    try:
        import numpy as np

        if isinstance(v, (np.floating,)):
            return float(v)
        if isinstance(v, (np.integer,)):
            return int(v)
        if isinstance(v, np.bool_):
            return bool(v)
        if isinstance(v, np.ndarray):
            return v.tolist()
    except ImportError:
        pass
    raise TypeError(f"not JSON serializable: {type(v)}")
