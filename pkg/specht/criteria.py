"""
Trace-identity criteria for simultaneous orthogonal equivalence:
Specht's criterion for a single matrix, Jing's criterion for k-tuples and
the Futorny two-block criterion.
"""
from typing import List, Optional, Sequence, Tuple

import numpy as np

from config import CheckConfig, DEFAULT_HORIZON, DEFAULT_TOL
from errors import ShapeMismatch
from .report import (
    CONSISTENT,
    DISTINGUISHED,
    INCONCLUSIVE,
    IdentityReport,
    bound_label,
    futorny_ceiling,
    jing_ceiling,
    laffey_ceiling,
)
from .words import Alphabet, Comparison, compare_traces, necklaces, word_traces


def _verdict(outcome: Comparison, max_len: int, ceiling: Optional[int]) -> str:
    if outcome.first_violation is not None:
        return DISTINGUISHED
    if ceiling is not None and max_len >= ceiling:
        return CONSISTENT
    return INCONCLUSIVE


def compare_alphabets(
    lhs: Alphabet,
    rhs: Alphabet,
    max_len: int,
    tol: float,
    criterion: str,
    ceiling: Optional[int],
    ceiling_label: str,
    config: Optional[CheckConfig] = None,
) -> IdentityReport:
    """Run word-trace identities between two alphabets of the same size and letter shape."""
    config = config or CheckConfig()
    if lhs.size != rhs.size or lhs.n != rhs.n:
        raise ShapeMismatch(f"alphabets differ: {lhs.size} letters of size {lhs.n} vs {rhs.size} of size {rhs.n}")
    k = lhs.size
    outcome = compare_traces(
        lambda length: necklaces(k, length),
        max_len,
        lambda block: word_traces(lhs.letters, block),
        lambda block: word_traces(rhs.letters, block),
        tol,
        full_sweep=config.full_sweep,
        threads=config.threads,
        chunk_size=config.chunk_size,
        debug=config.debug,
        label=criterion,
    )
    return IdentityReport(
        criterion=criterion,
        verdict=_verdict(outcome, max_len, ceiling),
        horizon=max_len,
        words_checked=outcome.words_checked,
        max_residual=outcome.max_residual,
        ceiling=ceiling,
        ceiling_label=ceiling_label,
        first_violation=outcome.first_violation,
        labels=list(lhs.labels),
        residuals=outcome.violations if config.full_sweep else None,
    )


def _as_square_pair(A, B) -> Tuple[np.ndarray, np.ndarray]:
    A = np.asarray(A, dtype=float)
    B = np.asarray(B, dtype=float)
    if A.ndim != 2 or A.shape[0] != A.shape[1]:
        raise ShapeMismatch(f"expected a square matrix, got shape {A.shape}")
    if A.shape != B.shape:
        raise ShapeMismatch(f"matrices have different shapes {A.shape} and {B.shape}")
    return A, B


def specht_check(A, B, max_len: Optional[int] = None, tol: float = DEFAULT_TOL,
                 config: Optional[CheckConfig] = None) -> IdentityReport:
    """
    Orthogonal similarity B = O^t A O via Tr w{A, A^t} = Tr w{B, B^t}.

    Words run up to min(max_len, ceil(2/3 (n^2 + 2))); leaving max_len unset
    checks the full bound, so the verdict is never inconclusive.
    """
    A, B = _as_square_pair(A, B)
    ceiling = laffey_ceiling(A.shape[0])
    horizon = ceiling if max_len is None else min(max_len, ceiling)
    return compare_alphabets(
        Alphabet([A, A.T], ["A", "A^t"]),
        Alphabet([B, B.T], ["B", "B^t"]),
        horizon, tol, "specht", ceiling, bound_label("laffey"), config,
    )


def _uniform(mats: Sequence, name: str) -> List[np.ndarray]:
    mats = [np.asarray(m, dtype=float) for m in mats]
    if not mats:
        raise ShapeMismatch(f"{name} is empty")
    shape = mats[0].shape
    if len(shape) != 2:
        raise ShapeMismatch(f"{name} must hold matrices, got shape {shape}")
    for m in mats:
        if m.shape != shape:
            raise ShapeMismatch(f"{name} mixes shapes {shape} and {m.shape}")
    return mats


def gram_letters(mats: Sequence[np.ndarray], offset: int = 0, side: str = "left") -> Tuple[List[np.ndarray], List[str]]:
    """A_i A_j^t (left) or A_i^t A_j (right) for i <= j."""
    letters, labels = [], []
    for i in range(len(mats)):
        for j in range(i, len(mats)):
            if side == "left":
                letters.append(mats[i] @ mats[j].T)
                labels.append(f"A{i + 1 + offset}A{j + 1 + offset}^t")
            else:
                letters.append(mats[i].T @ mats[j])
                labels.append(f"A{i + 1 + offset}^tA{j + 1 + offset}")
    return letters, labels


def jing_check(as_: Sequence, bs: Sequence, max_len: int = DEFAULT_HORIZON, tol: float = DEFAULT_TOL,
               side: str = "left", ceiling: Optional[int] = None, ceiling_label: Optional[str] = None,
               config: Optional[CheckConfig] = None) -> IdentityReport:
    """
    (B_1, ..., B_k) = (O A_1 P, ..., O A_k P) via traces of words in the Gram letters.

    side="left" uses A_i A_j^t (m x m), side="right" uses A_i^t A_j (n x n).
    The default ceiling is the two-vertex quiver bound phi((r+2)(m+n)) for
    the configured phi, [(r+2)(m+n)]^2 with the square bound.
    """
    if side not in ("left", "right"):
        raise ValueError("side must be 'left' or 'right'")
    config = config or CheckConfig()
    as_ = _uniform(as_, "as")
    bs = _uniform(bs, "bs")
    if len(as_) != len(bs) or as_[0].shape != bs[0].shape:
        raise ShapeMismatch("both tuples need the same length and matrix shape")
    m, n = as_[0].shape
    if ceiling is None:
        ceiling = jing_ceiling(m, n, len(as_), config.bound)
        ceiling_label = ceiling_label or bound_label(config.bound, "(r+2)(m+n)")
    lhs_letters, labels = gram_letters(as_, side=side)
    rhs_letters, _ = gram_letters(bs, side=side)
    return compare_alphabets(
        Alphabet(lhs_letters, labels), Alphabet(rhs_letters, labels),
        max_len, tol, "jing", ceiling, ceiling_label or "", config,
    )


def futorny_two_block_check(a1s: Sequence, a2s: Sequence, b1s: Sequence, b2s: Sequence,
                            max_len: int = DEFAULT_HORIZON, tol: float = DEFAULT_TOL,
                            ceiling_label: Optional[str] = None,
                            config: Optional[CheckConfig] = None) -> IdentityReport:
    """
    Two column blocks sharing m rows: B_i = O A_i O1 for the first group and
    O A_i O2 for the second. Letters are the within-group A_i A_j^t, i <= j.
    """
    a1s, a2s = _uniform(a1s, "a1s"), _uniform(a2s, "a2s")
    b1s, b2s = _uniform(b1s, "b1s"), _uniform(b2s, "b2s")
    if a1s[0].shape[0] != a2s[0].shape[0]:
        raise ShapeMismatch("both groups need the same number of rows")
    if len(a1s) != len(b1s) or len(a2s) != len(b2s):
        raise ShapeMismatch("group sizes differ between the two sides")
    if a1s[0].shape != b1s[0].shape or a2s[0].shape != b2s[0].shape:
        raise ShapeMismatch("group shapes differ between the two sides")
    m, n1 = a1s[0].shape
    n2 = a2s[0].shape[1]
    k, rest = len(a1s), len(a2s)
    ceiling = futorny_ceiling(n1, n2, m, k, rest)
    g1, l1 = gram_letters(a1s)
    g2, l2 = gram_letters(a2s, offset=k)
    h1, _ = gram_letters(b1s)
    h2, _ = gram_letters(b2s, offset=k)
    return compare_alphabets(
        Alphabet(g1 + g2, l1 + l2), Alphabet(h1 + h2, l1 + l2),
        max_len, tol, "futorny", ceiling, ceiling_label or "[(r+2)(n_1+n_2+m)]^2", config,
    )
