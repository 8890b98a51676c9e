"""
Quiver representations and the oriented-cycle trace criterion for isometry.

An arrow (u, v) carries a d_v x d_u matrix. The doubled quiver appends one
starred arrow per arrow, in the same order, carrying the transpose.
"""
from functools import reduce
from typing import Dict, Iterator, List, Optional, Sequence, Tuple

import numpy as np

from config import CheckConfig, DEFAULT_HORIZON, DEFAULT_TOL
from errors import MalformedQuiver, ShapeMismatch
from .criteria import _verdict
from .report import IdentityReport, bound_label, quiver_ceiling
from .words import Word, compare_traces, cyclic_canonical

Arrow = Tuple[int, int]


class Quiver:
    """Directed multigraph on vertices 0..t-1; loops and parallel arrows are allowed."""

    def __init__(self, num_vertices: int, arrows: Sequence[Arrow]):
        if not isinstance(num_vertices, (int, np.integer)) or num_vertices < 1:
            raise MalformedQuiver(f"a quiver needs at least one vertex, got {num_vertices!r}")
        parsed = []
        for arrow in arrows:
            try:
                src, tgt = (int(x) for x in arrow)
            except (TypeError, ValueError):
                raise MalformedQuiver(f"arrow {arrow!r} is not a (source, target) pair")
            if not (0 <= src < num_vertices and 0 <= tgt < num_vertices):
                raise MalformedQuiver(f"arrow {arrow!r} has an endpoint outside 0..{num_vertices - 1}")
            parsed.append((src, tgt))
        self.num_vertices = int(num_vertices)
        self.arrows: List[Arrow] = parsed

    @property
    def num_arrows(self) -> int:
        return len(self.arrows)

    def doubled(self) -> "Quiver":
        return Quiver(self.num_vertices, self.arrows + [(tgt, src) for src, tgt in self.arrows])

    def multiplicities(self) -> Dict[Arrow, int]:
        """Number of arrows for each (source, target)."""
        counts: Dict[Arrow, int] = {}
        for arrow in self.arrows:
            counts[arrow] = counts.get(arrow, 0) + 1
        return counts

    def max_multiplicity(self) -> int:
        counts = self.multiplicities()
        return max(counts.values()) if counts else 0

    def __eq__(self, other):
        return isinstance(other, Quiver) and self.num_vertices == other.num_vertices and self.arrows == other.arrows

    def __repr__(self):
        return f"Quiver(num_vertices={self.num_vertices}, arrows={self.arrows})"


class QuiverMatrixRep:
    def __init__(self, quiver: Quiver, dims: Sequence[int], matrices: Sequence):
        dims = tuple(int(d) for d in dims)
        if len(dims) != quiver.num_vertices:
            raise ShapeMismatch(f"{len(dims)} dimensions for {quiver.num_vertices} vertices")
        if any(d < 0 for d in dims):
            raise ShapeMismatch("vertex dimensions cannot be negative")
        if len(matrices) != quiver.num_arrows:
            raise ShapeMismatch(f"{len(matrices)} matrices for {quiver.num_arrows} arrows")
        mats = []
        for idx, ((src, tgt), M) in enumerate(zip(quiver.arrows, matrices)):
            M = np.asarray(M, dtype=float)
            if M.shape != (dims[tgt], dims[src]):
                raise ShapeMismatch(
                    f"arrow {idx} ({src}->{tgt}) needs a {dims[tgt]}x{dims[src]} matrix, got {M.shape}"
                )
            mats.append(M)
        self.quiver = quiver
        self.dims = dims
        self.matrices = mats

    def doubled(self) -> "QuiverMatrixRep":
        return QuiverMatrixRep(self.quiver.doubled(), self.dims, self.matrices + [M.T for M in self.matrices])

    def cycle_trace(self, cycle: Sequence[int]) -> float:
        return float(np.trace(reduce(np.matmul, [self.matrices[e] for e in cycle])))


def oriented_cycles(quiver: Quiver, length: int) -> Iterator[Word]:
    """
    Oriented cycles of exactly `length` arrows, one per rotation class, lexicographic.

    A cycle (e_1, ..., e_L) composes as A_{e_1} A_{e_2} ... A_{e_L}, so
    source(e_i) = target(e_{i+1}) and source(e_L) = target(e_1).
    """
    incoming: Dict[int, List[int]] = {v: [] for v in range(quiver.num_vertices)}
    for idx, (_, tgt) in enumerate(quiver.arrows):
        incoming[tgt].append(idx)
    arrows = quiver.arrows

    def extend(path: List[int]) -> Iterator[Word]:
        if len(path) == length:
            if arrows[path[-1]][0] == arrows[path[0]][1]:
                word = tuple(path)
                if cyclic_canonical(word) == word:
                    yield word
            return
        for nxt in incoming[arrows[path[-1]][0]]:
            # the least rotation starts at the smallest arrow
            if nxt >= path[0]:
                path.append(nxt)
                yield from extend(path)
                path.pop()

    for first in range(quiver.num_arrows):
        yield from extend([first])


def loop_quiver() -> Quiver:
    """One vertex with one loop; its cycle criterion is Specht's."""
    return Quiver(1, [(0, 0)])


def parallel_quiver(k: int) -> Quiver:
    """Vertex 0 -> vertex 1 with k parallel arrows; its cycle criterion is Jing's."""
    return Quiver(2, [(0, 1)] * k)


def futorny_quiver(k: int, rest: int) -> Quiver:
    """Vertices (columns of group 1, columns of group 2, shared rows) with k and `rest` arrows into the row vertex."""
    return Quiver(3, [(0, 2)] * k + [(1, 2)] * rest)


def quiver_cycle_check(q: Quiver, rep_a: QuiverMatrixRep, rep_b: QuiverMatrixRep,
                       max_len: int = DEFAULT_HORIZON, tol: float = DEFAULT_TOL,
                       config: Optional[CheckConfig] = None, ceiling: Optional[int] = None,
                       ceiling_label: Optional[str] = None) -> IdentityReport:
    """
    Isometry of two Euclidean representations via traces over oriented cycles of the doubled quiver.

    Lengths count arrows of the doubled quiver. On the one-loop quiver they
    match Specht word lengths; on the parallel quiver a word of L Gram
    letters is a cycle of 2L arrows. `ceiling` replaces the default
    phi((r+2)(d_1+...+d_t)) so a run can be measured against the bound of
    the criterion it reduces to.
    """
    config = config or CheckConfig()
    if rep_a.quiver != q or rep_b.quiver != q:
        raise MalformedQuiver("representations are not defined on the given quiver")
    if rep_a.dims != rep_b.dims:
        raise ShapeMismatch(f"representation dimensions differ: {rep_a.dims} vs {rep_b.dims}")
    doubled = q.doubled()
    da, db = rep_a.doubled(), rep_b.doubled()
    if ceiling is None:
        ceiling = quiver_ceiling(q.max_multiplicity(), rep_a.dims, config.bound)
        ceiling_label = ceiling_label or bound_label(config.bound, "(r+2)(d_1+...+d_t)")
    outcome = compare_traces(
        lambda length: oriented_cycles(doubled, length),
        max_len,
        lambda block: np.array([da.cycle_trace(c) for c in block]),
        lambda block: np.array([db.cycle_trace(c) for c in block]),
        tol,
        full_sweep=config.full_sweep,
        threads=config.threads,
        chunk_size=config.chunk_size,
        debug=config.debug,
        label="quiver",
    )
    labels = [f"a{i}" for i in range(q.num_arrows)] + [f"a{i}*" for i in range(q.num_arrows)]
    return IdentityReport(
        criterion="quiver",
        verdict=_verdict(outcome, max_len, ceiling),
        horizon=max_len,
        words_checked=outcome.words_checked,
        max_residual=outcome.max_residual,
        ceiling=ceiling,
        ceiling_label=ceiling_label or "",
        first_violation=outcome.first_violation,
        labels=labels,
        residuals=outcome.violations if config.full_sweep else None,
    )
