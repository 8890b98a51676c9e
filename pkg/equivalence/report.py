"""Verdicts and report types shared by the 2- and 3-party pipelines."""
from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional

import numpy as np

from specht import CONSISTENT, DISTINGUISHED, IdentityReport

EQUIVALENT = "equivalent"
CONSISTENT_AT_HORIZON = "consistent-at-horizon"
PIPELINE_DISTINGUISHED = DISTINGUISHED
PIPELINE_INCONCLUSIVE = "inconclusive"
PIPELINE_VERDICTS = (EQUIVALENT, CONSISTENT_AT_HORIZON, PIPELINE_DISTINGUISHED, PIPELINE_INCONCLUSIVE)

NORM_DISCREPANCY_NOTE = (
    "norm side condition: equal norms of T1 or T2 are sometimes required, the equivalence argument uses "
    "T_i or T12; all three comparisons are recorded and each one is a necessary condition"
)


@dataclass(frozen=True)
class NormCheck:
    name: str
    lhs: float
    rhs: float
    passed: bool

    def to_dict(self) -> Dict[str, Any]:
        return {"name": self.name, "lhs": float(self.lhs), "rhs": float(self.rhs), "passed": bool(self.passed)}


def norm_check(name: str, a, b, tol: float) -> NormCheck:
    """Frobenius norms agree to tol * max(1, ||a||)."""
    na = float(np.linalg.norm(np.asarray(a)))
    nb = float(np.linalg.norm(np.asarray(b)))
    return NormCheck(name, na, nb, abs(na - nb) <= tol * max(1.0, na))


def is_zero(T, tol: float) -> bool:
    return float(np.linalg.norm(np.asarray(T))) <= tol


def identity_verdict(report: IdentityReport) -> str:
    """Map a clean identity run onto pipeline language: only a run past its ceiling certifies."""
    if report.verdict == DISTINGUISHED:
        return PIPELINE_DISTINGUISHED
    if report.verdict == CONSISTENT:
        return EQUIVALENT
    return CONSISTENT_AT_HORIZON


@dataclass
class EquivalenceReport:
    verdict: str
    dims: tuple
    horizon: int
    tol: float
    norms: List[NormCheck]
    identities: IdentityReport
    ceiling: Optional[int] = None
    ceiling_label: str = ""
    disjunctive_norms: bool = True
    degenerate: List[str] = field(default_factory=list)
    reason: Optional[str] = None
    lu: Optional[bool] = None
    notes: List[str] = field(default_factory=list)

    def __post_init__(self):
        if self.verdict not in PIPELINE_VERDICTS:
            raise ValueError(f"unknown verdict {self.verdict!r}")

    @property
    def first_violation(self):
        return self.identities.first_violation

    def to_dict(self) -> Dict[str, Any]:
        return {
            "verdict": self.verdict,
            "dims": list(self.dims),
            "horizon": self.horizon,
            "tol": self.tol,
            "ceiling": self.ceiling,
            "ceiling_label": self.ceiling_label,
            "norms": [n.to_dict() for n in self.norms],
            "disjunctive_norms": bool(self.disjunctive_norms),
            "degenerate": list(self.degenerate),
            "reason": self.reason,
            "lu": self.lu,
            "identities": self.identities.to_dict(),
            "notes": list(self.notes),
        }
