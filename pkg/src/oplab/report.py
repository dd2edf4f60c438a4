"""Structured outcomes shared by every check, plus deterministic JSON output."""

from __future__ import annotations

import json
import time
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any, Optional

SCHEMA = "oplab/1"

PASS = "pass"
FAIL = "fail"
REFUSED = "refused"
HYPOTHESIS_VIOLATED = "hypothesis_violated"

TIMING_KEYS = frozenset({"elapsed_ms"})


class SizeGuardError(RuntimeError):
    """An enumeration would exceed its configured size bound."""

    def __init__(self, what: str, estimate: int, bound: int):
        super().__init__(f"{what}: {estimate} candidates exceeds bound {bound}")
        self.what = what
        self.estimate = estimate
        self.bound = bound


def jsonable(value: Any) -> Any:
    """Convert payloads, fractions and polynomials to plain JSON values."""
    if hasattr(value, "to_json"):
        return value.to_json()
    if isinstance(value, Fraction):
        return str(value)
    if isinstance(value, dict):
        return {str(k): jsonable(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [jsonable(v) for v in value]
    if isinstance(value, (set, frozenset)):
        return sorted(jsonable(v) for v in value)
    return value


@dataclass
class VerificationReport:
    equation: str
    outcome: str
    mode: str = "exhaustive"
    witness: Optional[dict] = None
    checked: int = 0
    seed: Optional[int] = None
    trials: Optional[int] = None
    elapsed_ms: Optional[float] = None
    details: dict = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return self.outcome == PASS

    @property
    def failed(self) -> bool:
        return self.outcome == FAIL

    def to_dict(self, timing: bool = True) -> dict:
        out = {
            "schema": SCHEMA,
            "equation": self.equation,
            "mode": self.mode,
            "outcome": self.outcome,
            "witness": jsonable(self.witness),
            "checked": self.checked,
            "details": jsonable(self.details),
        }
        if self.mode == "sampled":
            out["seed"] = self.seed
            out["trials"] = self.trials
        if timing and self.elapsed_ms is not None:
            out["elapsed_ms"] = self.elapsed_ms
        return out

    def to_json(self, timing: bool = True) -> str:
        return dumps(self.to_dict(timing=timing))


def dumps(data: Any) -> str:
    return json.dumps(jsonable(data), sort_keys=True, indent=2) + "\n"


def strip_timing(data: Any) -> Any:
    """Drop every timing field, recursively."""
    if isinstance(data, dict):
        return {k: strip_timing(v) for k, v in data.items() if k not in TIMING_KEYS}
    if isinstance(data, list):
        return [strip_timing(v) for v in data]
    return data


def elapsed_ms(start: float) -> float:
    return round((time.perf_counter() - start) * 1000.0, 3)
