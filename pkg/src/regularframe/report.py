"""Check records and report assembly shared by the verification pipelines."""
from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass, field
from typing import Any

import numpy as np


@dataclass
class Check:
    name: str
    measured: float
    tolerance: float
    passed: bool
    relation: str = "<"

    @classmethod
    def below(cls, name, measured, tolerance):
        measured = float(measured)
        return cls(name, measured, float(tolerance), bool(measured < tolerance), "<")

    @classmethod
    def at_least(cls, name, measured, bound):
        measured = float(measured)
        return cls(name, measured, float(bound), bool(measured >= bound), ">=")

    @classmethod
    def flag(cls, name, ok):
        return cls(name, float(bool(ok)), 1.0, bool(ok), "==")


@dataclass
class Report:
    kind: str
    scenario: dict[str, Any] = field(default_factory=dict)
    checks: list[Check] = field(default_factory=list)
    tables: dict[str, list[dict[str, Any]]] = field(default_factory=dict)
    data: dict[str, Any] = field(default_factory=dict)
    timestamp: str | None = None

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    def add(self, check: Check) -> Check:
        self.checks.append(check)
        return check

    def extend(self, checks):
        for c in checks:
            self.add(c)

    def to_dict(self) -> dict[str, Any]:
        return {
            "kind": self.kind,
            "scenario": self.scenario,
            "checks": [asdict(c) for c in self.checks],
            "tables": self.tables,
            "data": self.data,
            "verdict": "pass" if self.passed else "fail",
            "timestamp": self.timestamp,
        }


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _jsonable(obj.tolist())
    if isinstance(obj, (np.bool_,)):
        return bool(obj)
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, (np.floating, float)):
        v = float(obj)
        if math.isnan(v):
            return "nan"
        if math.isinf(v):
            return "inf" if v > 0 else "-inf"
        return v
    if isinstance(obj, complex) or isinstance(obj, np.complexfloating):
        return [float(obj.real), float(obj.imag)]
    return obj


def dumps(payload: dict[str, Any]) -> str:
    """Canonical JSON: sorted keys, repr floats, no NaN literals."""
    return json.dumps(_jsonable(payload), sort_keys=True, indent=2) + "\n"
