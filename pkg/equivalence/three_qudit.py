"""
Three-party pipeline.

The seven correlation tensors of a tripartite state are combined into a
battery of six matrices sharing one row space. Quasi-LU equivalence then
reduces to norm checks, an invertibility condition on a Gram matrix,
quasi-LU equivalence of one reduced pair and the Futorny two-block
identities on the battery. For three qubits, sign and determinant checks
upgrade the result to LU equivalence.

Conventions:

* The word-length ceiling is often quoted as 25(1 + δ_1 + δ_{23})^2 for both
  batteries. Battery 1 uses 25(1 + δ_1 + δ_2 δ_3)^2, battery 2 uses
  25(1 + δ_2 + δ_1 δ_3)^2, which is what the two-block bound gives for
  their shapes.
* Battery 2 ends with T2 as a column; only T2 shares its row space.
* The third sign product is T1^t T13 T3 (equivalently T3^t T13^t T1);
  T13 maps party 3 to party 1, so T3^t T13 T1 is not invariant.
* Sign products are compared in their transposed (scalar) form.
"""
import dataclasses
from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional, Tuple

import numpy as np
from scipy import linalg

from config import CheckConfig, DEFAULT_HORIZON, DEFAULT_TOL
from errors import ShapeMismatch, WrongArity, WrongDimension
from hypermatrix import multilinear_mult, outer_chain, outer_product, unfold
from lu_action import check_orthogonal
from qudit_state import TensorRep, parse_subset_label
from specht import CONSISTENT, DISTINGUISHED, IdentityReport, futorny_two_block_check
from .report import (
    CONSISTENT_AT_HORIZON,
    EQUIVALENT,
    PIPELINE_DISTINGUISHED,
    PIPELINE_INCONCLUSIVE,
    EquivalenceReport,
    NormCheck,
    is_zero,
    norm_check,
)
from .two_qudit import Rep2, check_quasi_lu_2, rep2_from

QUOTED_CEILING = "25(1 + δ_1 + δ_{23})^2"
CEILING_LABELS = {1: "25(1 + δ_1 + δ_2δ_3)^2", 2: "25(1 + δ_2 + δ_1δ_3)^2"}
TENSOR_NAMES = ("T1", "T2", "T3", "T12", "T13", "T23", "T123")
ADMISSIBLE = "admissible"
NO_ADMISSIBLE_BATTERY = "inconclusive: no admissible battery"

LU = "lu"
NOT_LU = "not-lu"


@dataclass(frozen=True, eq=False)
class Rep3:
    dims: Tuple[int, int, int]
    T1: np.ndarray
    T2: np.ndarray
    T3: np.ndarray
    T12: np.ndarray
    T13: np.ndarray
    T23: np.ndarray
    T123: np.ndarray

    def __post_init__(self):
        """Validate tensor shapes against the partition"""
        object.__setattr__(self, "dims", tuple(int(d) for d in self.dims))
        if len(self.dims) != 3:
            raise WrongArity(f"Rep3 needs three local dimensions, got {self.dims}")
        for name in TENSOR_NAMES:
            object.__setattr__(self, name, np.asarray(getattr(self, name), dtype=float))
        d1, d2, d3 = (d * d - 1 for d in self.dims)
        expected = {
            "T1": (d1,), "T2": (d2,), "T3": (d3,),
            "T12": (d1, d2), "T13": (d1, d3), "T23": (d2, d3),
            "T123": (d1, d2, d3),
        }
        for name, shape in expected.items():
            if getattr(self, name).shape != shape:
                raise ShapeMismatch(f"{name} has shape {getattr(self, name).shape}, expected {shape}")

    @property
    def deltas(self) -> Tuple[int, int, int]:
        return self.T123.shape

    def tensor_rep(self) -> TensorRep:
        return TensorRep(self.dims, {parse_subset_label(name): getattr(self, name) for name in TENSOR_NAMES})

    def reduced(self, k: int) -> Rep2:
        """Tensors of the state with party k traced out, read off the parent representation."""
        if k not in (1, 2, 3):
            raise WrongArity(f"party {k} out of range for three parties")
        return rep2_from(self.tensor_rep().restrict([p for p in (1, 2, 3) if p != k]))


def rep3_from(rep: TensorRep) -> Rep3:
    if rep.num_parties != 3:
        raise WrongArity(f"expected a 3-party representation, got {rep.num_parties} parties")
    return Rep3(
        tuple(rep.dims),
        *(np.asarray(rep[name]).copy() for name in TENSOR_NAMES),
    )


def _same_shape(a: Rep3, b: Rep3):
    if a.dims != b.dims:
        raise ShapeMismatch(f"representations live on different partitions {a.dims} and {b.dims}")


def so3_witness_check(a: Rep3, b: Rep3, O1, O2, O3, tol: float = DEFAULT_TOL, special: bool = False) -> bool:
    """
    True iff
        b.T123      = (O1, O2, O3) * a.T123
        b.T1 o b.T23 = (O1, O2, O3) * (a.T1 o a.T23)
        b.T2 o b.T13 = (O2, O1, O3) * (a.T2 o a.T13)
        b.T12 o b.T3 = (O1, O2, O3) * (a.T12 o a.T3)
    """
    _same_shape(a, b)
    os = [check_orthogonal(O, tol=tol, special=special, name=f"O{k + 1}") for k, O in enumerate((O1, O2, O3))]
    for k, (O, delta) in enumerate(zip(os, a.deltas)):
        if O.shape != (delta, delta):
            raise ShapeMismatch(f"O{k + 1} has shape {O.shape}, expected ({delta}, {delta})")
    O1, O2, O3 = os
    blocks = [
        (a.T123, b.T123, (O1, O2, O3)),
        (outer_product(a.T1, a.T23), outer_product(b.T1, b.T23), (O1, O2, O3)),
        (outer_product(a.T2, a.T13), outer_product(b.T2, b.T13), (O2, O1, O3)),
        (outer_product(a.T12, a.T3), outer_product(b.T12, b.T3), (O1, O2, O3)),
    ]
    for source, target, mats in blocks:
        moved = np.asarray(multilinear_mult(mats, source))
        atol = tol * max(1.0, float(np.linalg.norm(np.asarray(source))))
        if not np.allclose(moved, np.asarray(target), rtol=0, atol=atol):
            return False
    return True


def necessary_screen_3(a: Rep3, b: Rep3, tol: float = DEFAULT_TOL) -> List[NormCheck]:
    """All seven Frobenius norms; any failure rules out quasi-LU equivalence."""
    _same_shape(a, b)
    return [norm_check(name, getattr(a, name), getattr(b, name), tol) for name in TENSOR_NAMES]


def build_battery_v1(a: Rep3) -> List[np.ndarray]:
    """Six matrices with delta_1 rows; A1..A5 have delta_2*delta_3 columns, A6 = T1 as a column."""
    return [
        unfold(a.T123, 1),
        unfold(outer_product(a.T1, a.T23), 1),
        unfold(outer_product(a.T2, a.T13), 2),
        unfold(outer_product(a.T12, a.T3), 1),
        unfold(outer_chain([a.T1, a.T2, a.T3]), 1),
        a.T1.reshape(-1, 1),
    ]


def build_battery_v2(a: Rep3) -> List[np.ndarray]:
    """Six matrices with delta_2 rows; A1..A5 have delta_1*delta_3 columns, A6 = T2 as a column."""
    return [
        unfold(a.T123, 2),
        unfold(outer_product(a.T1, a.T23), 2),
        unfold(outer_product(a.T2, a.T13), 1),
        unfold(outer_product(a.T12, a.T3), 2),
        unfold(outer_chain([a.T1, a.T2, a.T3]), 2),
        a.T2.reshape(-1, 1),
    ]


BATTERIES = {1: build_battery_v1, 2: build_battery_v2}


@dataclass(frozen=True)
class GramInfo:
    name: str
    rank: int
    size: int
    condition_number: Optional[float]
    singular_values: Tuple[float, ...]

    @property
    def invertible(self) -> bool:
        return self.rank == self.size

    def to_dict(self) -> Dict[str, Any]:
        return {
            "name": self.name,
            "rank": self.rank,
            "size": self.size,
            "invertible": self.invertible,
            "condition_number": self.condition_number,
            "singular_values": [float(s) for s in self.singular_values],
        }


def gram_info(name: str, M: np.ndarray, rank_threshold: float) -> GramInfo:
    """Rank of M^t M with singular values above rank_threshold * largest."""
    G = M.T @ M
    s = linalg.svdvals(G)
    largest = float(s[0]) if s.size else 0.0
    rank = int(np.sum(s > rank_threshold * largest)) if largest > 0 else 0
    smallest = float(s[-1]) if s.size else 0.0
    condition = largest / smallest if smallest > 0 else None
    return GramInfo(name, rank, G.shape[0], condition, tuple(float(x) for x in s))


def gram_conditions(a: Rep3, version: int, rank_threshold: float = 1e-8) -> List[GramInfo]:
    if version == 1:
        return [
            gram_info("(T1 o T23)_(1)^t (T1 o T23)_(1)", unfold(outer_product(a.T1, a.T23), 1), rank_threshold),
            gram_info("(T1 o T2 o T3)_(1)^t (T1 o T2 o T3)_(1)", unfold(outer_chain([a.T1, a.T2, a.T3]), 1), rank_threshold),
        ]
    if version == 2:
        return [
            gram_info("(T2 o T13)_(1)^t (T2 o T13)_(1)", unfold(outer_product(a.T2, a.T13), 1), rank_threshold),
            gram_info("(T1 o T2 o T3)_(2)^t (T1 o T2 o T3)_(2)", unfold(outer_chain([a.T1, a.T2, a.T3]), 2), rank_threshold),
        ]
    raise ValueError("battery version must be 1 or 2")


@dataclass
class QubitExtras:
    signs: List[Dict[str, Any]]
    determinants: List[Dict[str, Any]]
    verdict: str
    reason: Optional[str] = None

    def to_dict(self) -> Dict[str, Any]:
        return {"signs": self.signs, "determinants": self.determinants, "verdict": self.verdict, "reason": self.reason}


@dataclass
class ConditionLedger:
    verdict: str
    version: int
    dims: tuple
    horizon: int
    tol: float
    norms: List[NormCheck]
    norm_pairs: List[Dict[str, Any]]
    gram: List[GramInfo]
    other_gram: List[GramInfo]
    sufficiency: str
    partial_trace: EquivalenceReport
    identities: IdentityReport
    degenerate: List[str] = field(default_factory=list)
    reason: Optional[str] = None
    qubit_extras: Optional[QubitExtras] = None
    lu: Optional[bool] = None
    notes: List[str] = field(default_factory=list)

    @property
    def first_violation(self):
        return self.identities.first_violation

    @property
    def ceiling(self) -> Optional[int]:
        return self.identities.ceiling

    def derive_verdict(self) -> Tuple[str, Optional[str]]:
        """Overall verdict and reason, computed from the recorded conditions only."""
        failed = [n.name for n in self.norms if not n.passed]
        if failed:
            return PIPELINE_DISTINGUISHED, f"norm mismatch on {', '.join(failed)}"
        traced = 1 if self.version == 1 else 2
        if self.partial_trace.verdict == PIPELINE_DISTINGUISHED:
            return PIPELINE_DISTINGUISHED, f"reduced states after tracing out party {traced} are not quasi-LU equivalent"
        if self.identities.verdict == DISTINGUISHED:
            length = len(self.identities.first_violation.word)
            return PIPELINE_DISTINGUISHED, f"battery trace identity violated at word length {length}"
        if self.degenerate:
            return PIPELINE_INCONCLUSIVE, f"nondegeneracy hypothesis violated: {', '.join(self.degenerate)} vanish"
        if self.partial_trace.verdict == PIPELINE_INCONCLUSIVE:
            return PIPELINE_INCONCLUSIVE, f"reduced pair inconclusive: {self.partial_trace.reason}"
        certified = (
            self.identities.verdict == CONSISTENT
            and self.partial_trace.verdict == EQUIVALENT
            and self.sufficiency == ADMISSIBLE
            and all(p["passed"] for p in self.norm_pairs)
        )
        if certified:
            return EQUIVALENT, None
        return CONSISTENT_AT_HORIZON, None

    def to_dict(self) -> Dict[str, Any]:
        return {
            "verdict": self.verdict,
            "battery": self.version,
            "dims": list(self.dims),
            "horizon": self.horizon,
            "tol": self.tol,
            "ceiling": self.ceiling,
            "ceiling_label": self.identities.ceiling_label,
            "norms": [n.to_dict() for n in self.norms],
            "norm_pairs": self.norm_pairs,
            "gram": [g.to_dict() for g in self.gram],
            "other_battery_gram": [g.to_dict() for g in self.other_gram],
            "sufficiency": self.sufficiency,
            "partial_trace": self.partial_trace.to_dict(),
            "identities": self.identities.to_dict(),
            "degenerate": list(self.degenerate),
            "reason": self.reason,
            "qubit_extras": self.qubit_extras.to_dict() if self.qubit_extras else None,
            "lu": self.lu,
            "notes": list(self.notes),
        }


def _norm_pairs(norms: List[NormCheck]) -> List[Dict[str, Any]]:
    by_name = {n.name: n.passed for n in norms}
    pairs = [("T1", "T23"), ("T2", "T13"), ("T3", "T12")]
    return [{"pair": list(p), "passed": by_name[p[0]] or by_name[p[1]]} for p in pairs]


def _sufficiency(own: List[GramInfo], other: List[GramInfo], version: int) -> str:
    if any(g.invertible for g in own):
        return ADMISSIBLE
    if any(g.invertible for g in other):
        return f"use battery {3 - version}"
    return NO_ADMISSIBLE_BATTERY


def check_quasi_lu_3(a: Rep3, b: Rep3, version: int = 1, max_len: int = DEFAULT_HORIZON,
                     tol: float = DEFAULT_TOL, config: Optional[CheckConfig] = None) -> ConditionLedger:
    """Evaluate the four battery conditions and derive the overall verdict."""
    config = config or CheckConfig()
    if version not in BATTERIES:
        raise ValueError("battery version must be 1 or 2")
    _same_shape(a, b)

    # Condition 1: norms, screened before anything expensive
    norms = necessary_screen_3(a, b, tol)
    # Condition 2: Gram invertibility of this battery, and of the other one for the hint
    gram = gram_conditions(a, version, config.rank_threshold)
    other_gram = gram_conditions(a, 3 - version, config.rank_threshold)
    sufficiency = _sufficiency(gram, other_gram, version)
    if config.debug:
        print(f"[DEBUG] check3 battery {version}: norms {[n.passed for n in norms]}, "
              f"gram ranks {[g.rank for g in gram]}, sufficiency {sufficiency}")

    # Condition 3: the reduced pair must itself be quasi-LU equivalent
    traced = 1 if version == 1 else 2
    partial = check_quasi_lu_2(a.reduced(traced), b.reduced(traced), max_len, tol, config)
    if config.debug:
        print(f"[DEBUG] check3 reduced pair (party {traced} traced out): {partial.verdict}")

    # Condition 4: two-block identities, A1..A5 in one group and the vector letter in the other
    battery_a = BATTERIES[version](a)
    battery_b = BATTERIES[version](b)
    identities = futorny_two_block_check(
        battery_a[:5], battery_a[5:], battery_b[:5], battery_b[5:], max_len, tol,
        ceiling_label=CEILING_LABELS[version], config=config,
    )
    # Vanishing tensors break the nondegeneracy hypothesis
    degenerate = [name for name in TENSOR_NAMES[:6] if is_zero(getattr(a, name), tol)]
    notes = [f"ceiling quoted as {QUOTED_CEILING}; computed from the battery shapes as {CEILING_LABELS[version]}"]
    if version == 2:
        notes.append("battery 2 vector letter: T2, since T1 has delta_1 rather than delta_2 entries")

    ledger = ConditionLedger(
        verdict=CONSISTENT_AT_HORIZON,
        version=version,
        dims=a.dims,
        horizon=max_len,
        tol=tol,
        norms=norms,
        norm_pairs=_norm_pairs(norms),
        gram=gram,
        other_gram=other_gram,
        sufficiency=sufficiency,
        partial_trace=partial,
        identities=identities,
        degenerate=degenerate,
        notes=notes,
    )
    # Verdict comes from the recorded fields only
    ledger.verdict, ledger.reason = ledger.derive_verdict()
    if config.debug:
        print(f"[DEBUG] check3 verdict: {ledger.verdict}")
    return ledger


def _compare_scalar(x: float, y: float, tol: float) -> bool:
    return abs(x - y) <= tol * max(1.0, abs(x))


def qubit_lu_upgrade(a: Rep3, b: Rep3, ledger: ConditionLedger, tol: float = DEFAULT_TOL) -> ConditionLedger:
    """
    Three-qubit sign and determinant checks. Determinants of T_jk and the
    products T_i^t T_ij T_j are LU invariants, so a mismatch rules out LU
    equivalence even when the tensors are quasi-LU equivalent.
    """
    if a.dims != (2, 2, 2) or b.dims != (2, 2, 2):
        raise WrongDimension(f"qubit upgrade needs dims (2, 2, 2), got {a.dims} and {b.dims}")

    signs = []
    for name, fa, fb in (
        ("T1^t T12 T2", a.T1 @ a.T12 @ a.T2, b.T1 @ b.T12 @ b.T2),
        ("T2^t T23 T3", a.T2 @ a.T23 @ a.T3, b.T2 @ b.T23 @ b.T3),
        ("T1^t T13 T3", a.T1 @ a.T13 @ a.T3, b.T1 @ b.T13 @ b.T3),
    ):
        comparable = abs(fa) > tol and abs(fb) > tol
        signs.append({
            "name": name,
            "lhs": float(fa),
            "rhs": float(fb),
            "comparable": bool(comparable),
            "same_sign": bool(comparable and np.sign(fa) == np.sign(fb)),
        })

    determinants = []
    for name in ("T12", "T13", "T23"):
        da = float(np.linalg.det(getattr(a, name)))
        db = float(np.linalg.det(getattr(b, name)))
        determinants.append({
            "name": name,
            "lhs": da,
            "rhs": db,
            "nonzero": bool(abs(da) > tol and abs(db) > tol),
            "equal": bool(_compare_scalar(da, db, tol)),
        })

    # Any invariant mismatch settles it before the hypotheses are looked at
    unequal = [d["name"] for d in determinants if not d["equal"]]
    flipped = [s["name"] for s in signs if s["comparable"] and not s["same_sign"]]
    if ledger.verdict == PIPELINE_DISTINGUISHED:
        verdict, reason = NOT_LU, "quasi-LU equivalence already ruled out"
    elif unequal:
        verdict, reason = NOT_LU, f"det differs for {', '.join(unequal)}"
    elif flipped:
        verdict, reason = NOT_LU, f"sign differs for {', '.join(flipped)}"
    elif not any(s["comparable"] for s in signs) or not all(d["nonzero"] for d in determinants):
        verdict, reason = PIPELINE_INCONCLUSIVE, "inconclusive: qubit LU hypotheses unmet (vanishing sign product or determinant)"
    elif ledger.verdict in (CONSISTENT_AT_HORIZON, EQUIVALENT):
        verdict, reason = LU, None
    else:
        verdict, reason = PIPELINE_INCONCLUSIVE, ledger.reason

    extras = QubitExtras(signs, determinants, verdict, reason)
    lu = True if verdict == LU else (False if verdict == NOT_LU else None)
    return dataclasses.replace(ledger, qubit_extras=extras, lu=lu, notes=list(ledger.notes))
