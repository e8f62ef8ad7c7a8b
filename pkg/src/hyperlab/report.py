"""Structured verdicts shared by every check.

All checks run at a finite horizon, so a verdict is one of a small closed
vocabulary rather than a boolean.  ``Report`` values are JSON-native after
construction, which makes ``Report.from_dict(r.to_dict()) == r`` hold.
"""
from __future__ import annotations

import enum
import json
import math
from dataclasses import dataclass, field
from typing import Any

import numpy as np


class Verdict(str, enum.Enum):
    PASS = "PASS"
    FAIL = "FAIL"
    EVIDENCE_HYPERCYCLIC = "EVIDENCE_HYPERCYCLIC"
    VIOLATED = "VIOLATED"
    UNDETERMINED_AT_HORIZON = "UNDETERMINED_AT_HORIZON"

    @property
    def definitive(self) -> bool:
        """True for verdicts the CLI maps to exit status 0."""
        return self in (Verdict.PASS, Verdict.EVIDENCE_HYPERCYCLIC, Verdict.VIOLATED)


def jsonable(value: Any) -> Any:
    """Convert numpy/complex/tuple values into plain JSON types.

    Complex numbers become ``[re, im]``; non-finite floats become the
    strings ``"inf"``, ``"-inf"``, ``"nan"`` so output stays strict JSON.
    """
    if isinstance(value, enum.Enum):
        return value.value
    if isinstance(value, dict):
        return {str(k): jsonable(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [jsonable(v) for v in value]
    if isinstance(value, np.ndarray):
        return [jsonable(v) for v in value.tolist()]
    if isinstance(value, (bool, np.bool_)):
        return bool(value)
    if isinstance(value, (int, np.integer)):
        return int(value)
    if isinstance(value, (complex, np.complexfloating)):
        return [jsonable(float(value.real)), jsonable(float(value.imag))]
    if isinstance(value, (float, np.floating)):
        v = float(value)
        if math.isnan(v):
            return "nan"
        if math.isinf(v):
            return "inf" if v > 0 else "-inf"
        return v
    if value is None or isinstance(value, str):
        return value
    raise TypeError(f"cannot serialize {type(value).__name__}")


def dumps(obj: Any) -> str:
    """Canonical JSON text: sorted keys, fixed indentation, trailing newline."""
    return json.dumps(jsonable(obj), sort_keys=True, indent=2, allow_nan=False) + "\n"


@dataclass
class Report:
    """Outcome of a single check.

    ``witness`` holds the indices/values that justify the verdict,
    ``summary`` scalar diagnostics, ``series`` equal-length columns (the
    first one is always ``n``) and ``notes`` free-text caveats.
    """

    check: str
    verdict: Verdict
    witness: dict = field(default_factory=dict)
    summary: dict = field(default_factory=dict)
    series: dict = field(default_factory=dict)
    notes: list = field(default_factory=list)

    def __post_init__(self):
        self.verdict = Verdict(self.verdict)
        self.witness = jsonable(self.witness)
        self.summary = jsonable(self.summary)
        self.series = jsonable(self.series)
        self.notes = [str(n) for n in self.notes]

    @property
    def passed(self) -> bool:
        return self.verdict is Verdict.PASS

    def to_dict(self) -> dict:
        return {
            "check": self.check,
            "verdict": self.verdict.value,
            "witness": self.witness,
            "summary": self.summary,
            "series": self.series,
            "notes": list(self.notes),
        }

    @classmethod
    def from_dict(cls, data: dict) -> "Report":
        from .schemas import validate

        validate(data, "report")
        return cls(
            check=data["check"],
            verdict=data["verdict"],
            witness=data.get("witness", {}),
            summary=data.get("summary", {}),
            series=data.get("series", {}),
            notes=data.get("notes", []),
        )
