"""Identity-check reports and the word-length ceilings they are measured against."""
from dataclasses import dataclass, field
from typing import Any, Callable, Dict, List, Optional, Sequence, Tuple

CONSISTENT = "consistent"
DISTINGUISHED = "distinguished"
INCONCLUSIVE = "inconclusive"
VERDICTS = (CONSISTENT, DISTINGUISHED, INCONCLUSIVE)


@dataclass(frozen=True)
class Violation:
    word: Tuple[int, ...]
    lhs: float
    rhs: float
    residual: float

    def to_dict(self) -> Dict[str, Any]:
        return {
            "word": list(self.word),
            "length": len(self.word),
            "lhs": float(self.lhs),
            "rhs": float(self.rhs),
            "residual": float(self.residual),
        }


@dataclass
class IdentityReport:
    """
    Outcome of comparing word traces up to `horizon`.

    "consistent" is only reported when the horizon reaches `ceiling`; a clean
    run below the ceiling is "inconclusive".
    """
    criterion: str
    verdict: str
    horizon: int
    words_checked: int
    max_residual: float
    ceiling: Optional[int] = None
    ceiling_label: str = ""
    first_violation: Optional[Violation] = None
    labels: List[str] = field(default_factory=list)
    residuals: Optional[List[Violation]] = None
    notes: List[str] = field(default_factory=list)

    def __post_init__(self):
        """Validate report consistency"""
        if self.verdict not in VERDICTS:
            raise ValueError(f"unknown verdict {self.verdict!r}")
        if self.verdict == DISTINGUISHED and self.first_violation is None:
            raise ValueError("a distinguished report must carry its first violation")

    @property
    def reaches_ceiling(self) -> bool:
        return self.ceiling is not None and self.horizon >= self.ceiling

    def to_dict(self) -> Dict[str, Any]:
        data = {
            "criterion": self.criterion,
            "verdict": self.verdict,
            "horizon": self.horizon,
            "words_checked": self.words_checked,
            "max_residual": float(self.max_residual),
            "ceiling": self.ceiling,
            "ceiling_label": self.ceiling_label,
            "first_violation": self.first_violation.to_dict() if self.first_violation else None,
            "alphabet": list(self.labels),
            "notes": list(self.notes),
        }
        if self.residuals is not None:
            data["residuals"] = [v.to_dict() for v in self.residuals]
        return data


# Word-length ceilings

def laffey_ceiling(n: int) -> int:
    """ceil(2(n^2 + 2) / 3)."""
    return -(-2 * (n * n + 2) // 3)


def pearcy_ceiling(n: int) -> int:
    return 2 * n * n


def square_ceiling(n: int) -> int:
    return n * n


SPECHT_BOUNDS: Dict[str, Callable[[int], int]] = {
    "laffey": laffey_ceiling,
    "pearcy": pearcy_ceiling,
    "square": square_ceiling,
}

SPECHT_BOUND_LABELS = {
    "laffey": "ceil(2/3 ({n}^2 + 2))",
    "pearcy": "2 {n}^2",
    "square": "{n}^2",
}


def specht_bound(name: str) -> Callable[[int], int]:
    if name not in SPECHT_BOUNDS:
        raise ValueError(f"unknown word-length bound {name!r}")
    return SPECHT_BOUNDS[name]


def bound_label(name: str, n: str = "n") -> str:
    """Printable form of bound `name` evaluated at `n`, e.g. ((r+2)(m+n))^2 for square."""
    if name not in SPECHT_BOUND_LABELS:
        raise ValueError(f"unknown word-length bound {name!r}")
    if n != "n":
        n = f"({n})"
    return SPECHT_BOUND_LABELS[name].format(n=n)


def minimal_r(m: int) -> int:
    """Smallest natural r with r(r + 1)/2 >= m."""
    r = 1
    while r * (r + 1) // 2 < m:
        r += 1
    return r


def futorny_ceiling(n1: int, n2: int, m: int, k: int, rest: int) -> int:
    """[(r + 2)(n1 + n2 + m)]^2 with r minimal for max(k, rest)."""
    r = minimal_r(max(k, rest))
    return ((r + 2) * (n1 + n2 + m)) ** 2


def quiver_ceiling(max_multiplicity: int, dims: Sequence[int], bound: str = "square") -> int:
    """phi((r + 2)(d_1 + ... + d_t)), r minimal for the largest arrow multiplicity."""
    r = minimal_r(max_multiplicity)
    return specht_bound(bound)((r + 2) * sum(dims))


def jing_ceiling(m: int, n: int, k: int, bound: str = "square") -> int:
    """The two-vertex, k-arrow quiver ceiling. For k = 2 and square phi this is 16(m + n)^2."""
    return quiver_ceiling(k, (m, n), bound)
