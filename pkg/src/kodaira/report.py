"""Pass/fail records shared by every verification routine."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np


def _plain(x):
    """Convert numpy scalars/arrays inside ``x`` into JSON-friendly Python values."""
    if isinstance(x, dict):
        return {str(k): _plain(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_plain(v) for v in x]
    if isinstance(x, np.ndarray):
        return _plain(x.tolist())
    if isinstance(x, (bool, np.bool_)):
        return bool(x)
    if isinstance(x, (int, np.integer)):
        return int(x)
    if isinstance(x, (float, np.floating)):
        x = float(x)
        return x if math.isfinite(x) else None
    return x


@dataclass
class Check:
    name: str
    passed: bool
    residual: float = 0.0
    details: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {
            "name": self.name,
            "pass": bool(self.passed),
            "residual": _plain(float(self.residual)),
            "details": _plain(self.details),
        }


class ValidationReport:
    """Ordered list of checks; passes when every check passes."""

    def __init__(self, checks=None):
        self.checks: list[Check] = list(checks or [])

    def add(self, name: str, passed: bool, residual: float = 0.0, **details) -> Check:
        c = Check(name, bool(passed), float(residual), details)
        self.checks.append(c)
        return c

    def extend(self, other: "ValidationReport", prefix: str = "") -> "ValidationReport":
        for c in other.checks:
            self.checks.append(Check(prefix + c.name, c.passed, c.residual, dict(c.details)))
        return self

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    def failures(self) -> list[Check]:
        return [c for c in self.checks if not c.passed]

    def first_failure(self) -> Check | None:
        for c in self.checks:
            if not c.passed:
                return c
        return None

    def __getitem__(self, name: str) -> Check:
        for c in self.checks:
            if c.name == name:
                return c
        raise KeyError(name)

    def __contains__(self, name: str) -> bool:
        return any(c.name == name for c in self.checks)

    def __len__(self) -> int:
        return len(self.checks)

    def to_dict(self, tol=None, **extra) -> dict:
        out = {"pass": self.passed}
        if tol is not None:
            out["tolerance"] = tol.to_dict()
        out.update(_plain(extra))
        out["checks"] = [c.to_dict() for c in self.checks]
        return out

    def __repr__(self) -> str:
        return f"ValidationReport({len(self.checks)} checks, passed={self.passed})"
