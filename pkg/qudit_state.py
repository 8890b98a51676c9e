"""
Density matrices, generalized Gell-Mann bases and the correlation-tensor
(hypermatrix) representation of a multipartite state.

Party indices are 1-based everywhere in this module: T_S is keyed by the
sorted tuple S, e.g. (1, 2) for T12.
"""
from dataclasses import dataclass
from functools import lru_cache
from itertools import combinations
from typing import Dict, Iterator, List, Optional, Sequence, Tuple, Union

import numpy as np

from errors import BadDimension, InvalidState, PartyOutOfRange, ShapeMismatch
from hypermatrix import Hypermatrix

HERMITIAN_TOL = 1e-10
TRACE_TOL = 1e-10
PSD_TOL = 1e-9
IMAG_TOL = 1e-10

Subset = Tuple[int, ...]


def _validate_dims(dims: Sequence[int]) -> Tuple[int, ...]:
    dims = tuple(int(d) for d in dims)
    if not dims:
        raise BadDimension("a partition needs at least one party")
    for d in dims:
        if d < 2:
            raise BadDimension(f"local dimension must be >= 2, got {d}")
    return dims


def nonempty_subsets(num_parties: int) -> Iterator[Subset]:
    """All nonempty subsets of {1..N}, by size and then lexicographically."""
    parties = range(1, num_parties + 1)
    for size in range(1, num_parties + 1):
        yield from combinations(parties, size)


def subset_label(subset: Subset) -> str:
    """(1, 2) -> 'T12'. Parties above 9 are separated by underscores."""
    if all(p < 10 for p in subset):
        return "T" + "".join(str(p) for p in subset)
    return "T" + "_".join(str(p) for p in subset)


def parse_subset_label(label: str) -> Subset:
    if not label.startswith("T") or len(label) < 2:
        raise ShapeMismatch(f"bad tensor label {label!r}")
    body = label[1:]
    try:
        parts = body.split("_") if "_" in body else list(body)
        subset = tuple(int(p) for p in parts)
    except ValueError:
        raise ShapeMismatch(f"bad tensor label {label!r}")
    if list(subset) != sorted(set(subset)) or subset[0] < 1:
        raise ShapeMismatch(f"bad tensor label {label!r}")
    return subset


class DensityMatrix:
    """
    Complex D x D Hermitian, unit-trace, positive semidefinite matrix over a
    partition (d_1, ..., d_N). The party order matches np.kron ordering.
    """

    def __init__(self, dims: Sequence[int], mat, check: bool = True):
        self.dims = _validate_dims(dims)
        mat = np.array(mat, dtype=complex)
        D = self.dim
        if mat.shape != (D, D):
            raise ShapeMismatch(f"matrix shape {mat.shape} does not match partition {self.dims} (D={D})")
        mat.setflags(write=False)
        self.mat = mat
        if check:
            self.validate()

    @property
    def dim(self) -> int:
        return int(np.prod(self.dims))

    @property
    def num_parties(self) -> int:
        return len(self.dims)

    def hermitian_residual(self) -> float:
        return float(np.max(np.abs(self.mat - self.mat.conj().T)))

    def trace_residual(self) -> float:
        return float(abs(np.trace(self.mat) - 1.0))

    def min_eigenvalue(self) -> float:
        return float(self.spectrum()[0])

    def validate(self):
        """Raise InvalidState naming the first broken invariant and its residual."""
        # NaN compares false against every tolerance below
        if not np.all(np.isfinite(self.mat)):
            raise InvalidState("state has NaN or infinite entries")
        residual = self.hermitian_residual()
        if residual > HERMITIAN_TOL:
            raise InvalidState(f"state is not Hermitian (residual {residual:.3g} > {HERMITIAN_TOL:g})")
        residual = self.trace_residual()
        if residual > TRACE_TOL:
            raise InvalidState(f"state does not have unit trace (residual {residual:.3g} > {TRACE_TOL:g})")
        smallest = self.min_eigenvalue()
        if smallest < -PSD_TOL:
            raise InvalidState(f"state is not positive semidefinite (smallest eigenvalue {smallest:.3g} < {-PSD_TOL:g})")
        return self

    @classmethod
    def from_pure(cls, dims: Sequence[int], psi) -> "DensityMatrix":
        psi = np.asarray(psi, dtype=complex).reshape(-1)
        norm = np.linalg.norm(psi)
        if norm == 0:
            raise InvalidState("zero vector is not a state")
        psi = psi / norm
        return cls(dims, np.outer(psi, psi.conj()))

    @classmethod
    def maximally_mixed(cls, dims: Sequence[int]) -> "DensityMatrix":
        dims = _validate_dims(dims)
        D = int(np.prod(dims))
        return cls(dims, np.eye(D) / D)

    def spectrum(self) -> np.ndarray:
        """Ascending eigenvalues of the Hermitian part."""
        return np.linalg.eigvalsh((self.mat + self.mat.conj().T) / 2)

    def __repr__(self):
        return f"DensityMatrix(dims={self.dims})"


@dataclass(frozen=True)
class GellMannBasis:
    d: int
    elems: np.ndarray  # shape (d^2 - 1, d, d)

    @property
    def size(self) -> int:
        return self.elems.shape[0]

    def __len__(self):
        return self.size

    def __getitem__(self, i) -> np.ndarray:
        return self.elems[i]


@lru_cache(maxsize=None)
def _gell_mann_elems(d: int) -> np.ndarray:
    elems = []
    scale = 1 / np.sqrt(2)
    pairs = [(j, k) for j in range(d) for k in range(j + 1, d)]
    for j, k in pairs:
        m = np.zeros((d, d), dtype=complex)
        m[j, k] = m[k, j] = 1
        elems.append(m * scale)
    for j, k in pairs:
        m = np.zeros((d, d), dtype=complex)
        m[j, k] = -1j
        m[k, j] = 1j
        elems.append(m * scale)
    for l in range(1, d):
        m = np.zeros((d, d), dtype=complex)
        m[np.arange(l), np.arange(l)] = 1
        m[l, l] = -l
        elems.append(m * np.sqrt(2 / (l * (l + 1))) * scale)
    out = np.stack(elems)
    out.setflags(write=False)
    return out


def gell_mann_basis(d: int) -> GellMannBasis:
    """
    Hilbert-Schmidt orthonormal generalized Gell-Mann basis, Tr(l_i l_j) = delta_ij.

    Order: symmetric pairs (j<k, lexicographic), antisymmetric pairs, diagonals.
    For d = 2 this is (sigma_x, sigma_y, sigma_z) / sqrt(2).
    """
    if int(d) < 2:
        raise BadDimension(f"local dimension must be >= 2, got {d}")
    return GellMannBasis(int(d), _gell_mann_elems(int(d)))


class TensorRep:
    """Map from each nonempty party subset S to the correlation hypermatrix T_S."""

    def __init__(self, dims: Sequence[int], tensors: Dict[Subset, Union[Hypermatrix, np.ndarray]]):
        self.dims = _validate_dims(dims)
        expected = list(nonempty_subsets(len(self.dims)))
        missing = [subset_label(s) for s in expected if s not in tensors]
        extra = [s for s in tensors if s not in expected]
        if missing or extra:
            raise ShapeMismatch(f"tensor rep is missing {missing} or has unexpected subsets {extra}")
        self.tensors: Dict[Subset, Hypermatrix] = {}
        for subset in expected:
            T = tensors[subset]
            T = T if isinstance(T, Hypermatrix) else Hypermatrix(T)
            shape = tuple(self.deltas[p - 1] for p in subset)
            if T.dims != shape:
                raise ShapeMismatch(f"{subset_label(subset)} has dims {T.dims}, expected {shape}")
            self.tensors[subset] = T

    @property
    def deltas(self) -> Tuple[int, ...]:
        return tuple(d * d - 1 for d in self.dims)

    @property
    def num_parties(self) -> int:
        return len(self.dims)

    def __getitem__(self, key: Union[str, Subset]) -> Hypermatrix:
        if isinstance(key, str):
            key = parse_subset_label(key)
        return self.tensors[tuple(key)]

    def items(self):
        return self.tensors.items()

    def labelled(self) -> Dict[str, Hypermatrix]:
        return {subset_label(s): T for s, T in self.tensors.items()}

    def restrict(self, parties: Sequence[int]) -> "TensorRep":
        """Sub-representation on `parties`, relabelled to 1..len(parties)."""
        parties = tuple(sorted(set(parties)))
        for p in parties:
            if not 1 <= p <= self.num_parties:
                raise PartyOutOfRange(f"party {p} out of range for {self.num_parties} parties")
        if not parties:
            raise PartyOutOfRange("restriction needs at least one party")
        relabel = {p: i + 1 for i, p in enumerate(parties)}
        tensors = {}
        for subset, T in self.tensors.items():
            if set(subset) <= set(parties):
                tensors[tuple(relabel[p] for p in subset)] = T
        return TensorRep([self.dims[p - 1] for p in parties], tensors)

    def scaled(self, factor: float) -> "TensorRep":
        """Tensors of s*rho + (1-s)*I/D."""
        return TensorRep(self.dims, {s: Hypermatrix(factor * T.array) for s, T in self.tensors.items()})

    def norms(self) -> Dict[str, float]:
        return {subset_label(s): T.norm() for s, T in self.tensors.items()}

    def __repr__(self):
        return f"TensorRep(dims={self.dims})"


def _reduced_tensor(rho: DensityMatrix) -> np.ndarray:
    return rho.mat.reshape(rho.dims + rho.dims)


def _correlation(R: np.ndarray, bases: List[np.ndarray], subset: Subset) -> np.ndarray:
    """Complex Tr(rho lambda^(S)) for every multi-index of S."""
    N = len(bases)
    # row index a_k -> k, column index b_k -> N + k, basis index -> 2N + k;
    # parties outside S share row and column labels, which traces them out
    r_sub = list(range(N)) + [N + k if (k + 1) in subset else k for k in range(N)]
    operands = [R, r_sub]
    for p in subset:
        k = p - 1
        operands += [bases[k], [2 * N + k, N + k, k]]
    return np.einsum(*operands, [2 * N + p - 1 for p in subset], optimize=True)


def extract(rho: DensityMatrix) -> TensorRep:
    """T_S^alpha = Tr(rho * lambda_alpha^(S)) with identities on the parties outside S."""
    rho.validate()
    R = _reduced_tensor(rho)
    bases = [gell_mann_basis(d).elems for d in rho.dims]
    tensors = {}
    for subset in nonempty_subsets(rho.num_parties):
        T = _correlation(R, bases, subset)
        imag = float(np.max(np.abs(T.imag)))
        if imag > IMAG_TOL:
            raise InvalidState(f"{subset_label(subset)} has imaginary residue {imag:.3g} > {IMAG_TOL:g}")
        tensors[subset] = Hypermatrix(T.real)
    return TensorRep(rho.dims, tensors)


def reconstruct(rep: TensorRep) -> DensityMatrix:
    """
    rho = (1/D)(I + sum_S prod_{k in S} d_k sum_alpha T_S^alpha lambda_alpha^(S)).

    The result is Hermitian with unit trace by construction; positivity holds
    only when `rep` came from a state, so it is not enforced here.
    """
    if not isinstance(rep, TensorRep):
        raise ShapeMismatch("reconstruct needs a TensorRep")
    dims = rep.dims
    N = len(dims)
    D = int(np.prod(dims))
    bases = [gell_mann_basis(d).elems for d in dims]
    total = np.eye(D, dtype=complex)
    out_sub = list(range(N)) + [N + k for k in range(N)]
    for subset, T in rep.items():
        operands = [T.array, [2 * N + p - 1 for p in subset]]
        for k in range(N):
            if (k + 1) in subset:
                operands += [bases[k], [2 * N + k, k, N + k]]
            else:
                operands += [np.eye(dims[k]), [k, N + k]]
        op = np.einsum(*operands, out_sub, optimize=True).reshape(D, D)
        total = total + np.prod([dims[p - 1] for p in subset]) * op
    mat = total / D
    mat = (mat + mat.conj().T) / 2
    return DensityMatrix(dims, mat, check=False)


def partial_trace(rho: DensityMatrix, k: int) -> DensityMatrix:
    """Trace out party k (1-based)."""
    N = rho.num_parties
    if N < 2:
        raise PartyOutOfRange("partial trace needs at least two parties")
    if not 1 <= k <= N:
        raise PartyOutOfRange(f"party {k} out of range for {N} parties")
    R = _reduced_tensor(rho)
    r_sub = list(range(N)) + [N + j for j in range(N)]
    r_sub[N + k - 1] = k - 1
    keep = [j for j in range(N) if j != k - 1]
    out_sub = keep + [N + j for j in keep]
    reduced = np.einsum(R, r_sub, out_sub)
    dims = [rho.dims[j] for j in keep]
    d = int(np.prod(dims))
    return DensityMatrix(dims, reduced.reshape(d, d), check=False)


def _rng(seed):
    return np.random.default_rng(seed)


def random_density(dims: Sequence[int], seed) -> DensityMatrix:
    """rho = G G^dagger / Tr(G G^dagger) for a seeded complex Gaussian G."""
    dims = _validate_dims(dims)
    D = int(np.prod(dims))
    rng = _rng(seed)
    G = rng.standard_normal((D, D)) + 1j * rng.standard_normal((D, D))
    rho = G @ G.conj().T
    rho = rho / np.trace(rho).real
    rho = (rho + rho.conj().T) / 2
    return DensityMatrix(dims, rho)


def zero_rep(dims: Sequence[int]) -> TensorRep:
    dims = _validate_dims(dims)
    deltas = [d * d - 1 for d in dims]
    return TensorRep(dims, {s: Hypermatrix.zeros([deltas[p - 1] for p in s]) for s in nonempty_subsets(len(dims))})


def max_imaginary_residue(rho: DensityMatrix) -> float:
    """Largest |Im Tr(rho lambda^(S))| over every subset and multi-index."""
    R = _reduced_tensor(rho)
    bases = [gell_mann_basis(d).elems for d in rho.dims]
    worst = 0.0
    for subset in nonempty_subsets(rho.num_parties):
        worst = max(worst, float(np.max(np.abs(_correlation(R, bases, subset).imag))))
    return worst
