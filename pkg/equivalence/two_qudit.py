"""
Two-party pipeline. A pair of states is quasi-LU equivalent exactly when
(T1 o T2, T12) is simultaneously orthogonally equivalent to its hatted
counterpart, which Jing's criterion decides through Gram-letter traces.
"""
from dataclasses import dataclass
from typing import Optional, Tuple

import numpy as np

from config import CheckConfig, DEFAULT_HORIZON, DEFAULT_TOL
from errors import ShapeMismatch, WrongArity, WrongDimension
from hypermatrix import multilinear_mult, outer_product
from lu_action import check_orthogonal
from qudit_state import TensorRep
from specht import jing_check, jing_ceiling
from .report import (
    CONSISTENT_AT_HORIZON,
    EQUIVALENT,
    NORM_DISCREPANCY_NOTE,
    PIPELINE_DISTINGUISHED,
    PIPELINE_INCONCLUSIVE,
    EquivalenceReport,
    identity_verdict,
    is_zero,
    norm_check,
)

CEILING_LABEL_2 = "16(δ_1 + δ_2)^2"


@dataclass(frozen=True, eq=False)
class Rep2:
    dims: Tuple[int, int]
    T1: np.ndarray
    T2: np.ndarray
    T12: np.ndarray

    def __post_init__(self):
        """Validate tensor shapes against the partition"""
        object.__setattr__(self, "dims", tuple(int(d) for d in self.dims))
        for name in ("T1", "T2", "T12"):
            object.__setattr__(self, name, np.asarray(getattr(self, name), dtype=float))
        if len(self.dims) != 2:
            raise WrongArity(f"Rep2 needs two local dimensions, got {self.dims}")
        d1, d2 = self.dims
        delta1, delta2 = d1 * d1 - 1, d2 * d2 - 1
        for name, value, shape in (("T1", self.T1, (delta1,)), ("T2", self.T2, (delta2,)), ("T12", self.T12, (delta1, delta2))):
            if np.shape(value) != shape:
                raise ShapeMismatch(f"{name} has shape {np.shape(value)}, expected {shape} for dims {self.dims}")

    @property
    def deltas(self) -> Tuple[int, int]:
        return self.T12.shape

    def letters(self):
        """The two delta1 x delta2 matrices whose simultaneous equivalence class is compared."""
        return [np.asarray(outer_product(self.T1, self.T2)), self.T12]


def rep2_from(rep: TensorRep) -> Rep2:
    if rep.num_parties != 2:
        raise WrongArity(f"expected a 2-party representation, got {rep.num_parties} parties")
    return Rep2(
        tuple(rep.dims),
        np.asarray(rep[(1,)]).copy(),
        np.asarray(rep[(2,)]).copy(),
        np.asarray(rep[(1, 2)]).copy(),
    )


def _same_shape(a: Rep2, b: Rep2):
    if a.dims != b.dims:
        raise ShapeMismatch(f"representations live on different partitions {a.dims} and {b.dims}")


def so2_witness_check(a: Rep2, b: Rep2, O1, O2, tol: float = DEFAULT_TOL, special: bool = False) -> bool:
    """True iff b.T12 = (O1, O2) * a.T12 and b.T1 o b.T2 = (O1, O2) * (a.T1 o a.T2)."""
    _same_shape(a, b)
    delta1, delta2 = a.deltas
    O1 = check_orthogonal(O1, tol=tol, special=special, name="O1")
    O2 = check_orthogonal(O2, tol=tol, special=special, name="O2")
    if O1.shape != (delta1, delta1) or O2.shape != (delta2, delta2):
        raise ShapeMismatch(f"witness shapes {O1.shape}, {O2.shape} do not match deltas {a.deltas}")
    for source, target in zip(a.letters(), b.letters()):
        moved = np.asarray(multilinear_mult([O1, O2], source))
        if not np.allclose(moved, target, rtol=0, atol=tol * max(1.0, float(np.linalg.norm(source)))):
            return False
    return True


def check_quasi_lu_2(a: Rep2, b: Rep2, max_len: int = DEFAULT_HORIZON, tol: float = DEFAULT_TOL,
                     config: Optional[CheckConfig] = None) -> EquivalenceReport:
    """
    Norm screen on T1, T2, T12 followed by Jing's criterion on {T1 o T2, T12}.

    Zero T1, T2 or T12 leaves the pair outside the nondegenerate case the
    equivalence argument covers; such pairs end "inconclusive" unless a
    necessary check already failed.
    """
    config = config or CheckConfig()
    _same_shape(a, b)
    norms = [
        norm_check("T1", a.T1, b.T1, tol),
        norm_check("T2", a.T2, b.T2, tol),
        norm_check("T12", a.T12, b.T12, tol),
    ]
    delta1, delta2 = a.deltas
    ceiling = jing_ceiling(delta1, delta2, 2, config.bound)
    identities = jing_check(a.letters(), b.letters(), max_len, tol, side="left",
                            ceiling=ceiling, ceiling_label=CEILING_LABEL_2, config=config)
    degenerate = [name for name, T in (("T1", a.T1), ("T2", a.T2), ("T12", a.T12)) if is_zero(T, tol)]

    reason = None
    failed = [n.name for n in norms if not n.passed]
    if failed:
        verdict = PIPELINE_DISTINGUISHED
        reason = f"norm mismatch on {', '.join(failed)}"
    elif identities.verdict == PIPELINE_DISTINGUISHED:
        verdict = PIPELINE_DISTINGUISHED
        reason = f"trace identity violated at word length {len(identities.first_violation.word)}"
    elif degenerate:
        verdict = PIPELINE_INCONCLUSIVE
        reason = f"nondegeneracy hypothesis violated: {', '.join(degenerate)} vanish"
    else:
        verdict = identity_verdict(identities)

    if config.debug:
        print(f"[DEBUG] check2 dims={a.dims} norms={[n.passed for n in norms]} identities={identities.verdict} -> {verdict}")
    return EquivalenceReport(
        verdict=verdict,
        dims=a.dims,
        horizon=max_len,
        tol=tol,
        norms=norms,
        identities=identities,
        ceiling=ceiling,
        ceiling_label=CEILING_LABEL_2,
        disjunctive_norms=norms[0].passed or norms[1].passed,
        degenerate=degenerate,
        reason=reason,
        notes=[NORM_DISCREPANCY_NOTE],
    )


def check_lu_2qubit(a: Rep2, b: Rep2, max_len: int = DEFAULT_HORIZON, tol: float = DEFAULT_TOL,
                    config: Optional[CheckConfig] = None) -> EquivalenceReport:
    """For two qubits quasi-LU and LU equivalence coincide, so a clean report carries the LU flag."""
    if a.dims != (2, 2) or b.dims != (2, 2):
        raise WrongDimension(f"two-qubit check needs dims (2, 2), got {a.dims} and {b.dims}")
    report = check_quasi_lu_2(a, b, max_len, tol, config)
    if report.verdict in (EQUIVALENT, CONSISTENT_AT_HORIZON):
        report.lu = True
        report.notes.append("SU(2) -> SO(3) is onto, so the quasi-LU verdict carries over to LU equivalence")
    elif report.verdict == PIPELINE_DISTINGUISHED:
        report.lu = False
    return report
