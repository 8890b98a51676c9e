"""
Local-unitary action on states and the orthogonal action it induces on
correlation tensors, plus seeded generators for unitaries, orthogonals and
test pairs.
"""
from dataclasses import dataclass
from typing import List, Sequence, Tuple

import numpy as np
from scipy import linalg

from errors import DimensionMismatch, NotOrthogonal, NotUnitary, ShapeMismatch
from hypermatrix import kron_chain, multilinear_mult
from qudit_state import (
    DensityMatrix,
    GellMannBasis,
    TensorRep,
    extract,
    gell_mann_basis,
    random_density,
    reconstruct,
)

UNITARY_TOL = 1e-12
ORTHOGONAL_TOL = 1e-12
IMAG_TOL = 1e-10


def unitarity_residual(U: np.ndarray) -> float:
    U = np.asarray(U)
    return float(np.max(np.abs(U.conj().T @ U - np.eye(U.shape[0]))))


def orthogonality_residual(O: np.ndarray) -> float:
    O = np.asarray(O, dtype=float)
    return float(np.max(np.abs(O.T @ O - np.eye(O.shape[0]))))


def check_orthogonal(O, tol: float = ORTHOGONAL_TOL, special: bool = False, name: str = "O") -> np.ndarray:
    O = np.asarray(O, dtype=float)
    if O.ndim != 2 or O.shape[0] != O.shape[1]:
        raise ShapeMismatch(f"{name} must be square, got shape {O.shape}")
    residual = orthogonality_residual(O)
    if residual > tol:
        raise NotOrthogonal(f"{name} is not orthogonal (residual {residual:.3g} > {tol:g})")
    if special:
        det = np.linalg.det(O)
        if abs(det - 1) > tol:
            raise NotOrthogonal(f"{name} does not have determinant 1 (det {det:.6g})")
    return O


@dataclass(frozen=True)
class LocalUnitaries:
    dims: Tuple[int, ...]
    us: Tuple[np.ndarray, ...]
    special: bool = False

    def __post_init__(self):
        """Validate unitaries against the partition"""
        if len(self.dims) != len(self.us):
            raise DimensionMismatch(f"{len(self.us)} unitaries for {len(self.dims)} parties")
        for k, (d, U) in enumerate(zip(self.dims, self.us)):
            U = np.asarray(U)
            if U.shape != (d, d):
                raise DimensionMismatch(f"U_{k + 1} has shape {U.shape}, expected ({d}, {d})")
            residual = unitarity_residual(U)
            if residual > UNITARY_TOL:
                raise NotUnitary(f"U_{k + 1} is not unitary (residual {residual:.3g} > {UNITARY_TOL:g})")
            if self.special and abs(np.linalg.det(U) - 1) > UNITARY_TOL:
                raise NotUnitary(f"U_{k + 1} does not have determinant 1")

    def operator(self) -> np.ndarray:
        return kron_chain(list(self.us))


@dataclass(frozen=True)
class InducedOrthogonals:
    os: Tuple[np.ndarray, ...]

    def __post_init__(self):
        for k, O in enumerate(self.os):
            check_orthogonal(O, tol=1e-10, name=f"O_{k + 1}")

    def __len__(self):
        return len(self.os)

    def __getitem__(self, k) -> np.ndarray:
        return self.os[k]


def conjugate_local(rho: DensityMatrix, u: LocalUnitaries) -> DensityMatrix:
    """(U_1 x ... x U_N) rho (U_1 x ... x U_N)^dagger."""
    if tuple(u.dims) != tuple(rho.dims):
        raise DimensionMismatch(f"unitaries for {tuple(u.dims)} applied to a state on {rho.dims}")
    U = u.operator()
    mat = U @ rho.mat @ U.conj().T
    return DensityMatrix(rho.dims, (mat + mat.conj().T) / 2)


def induced_orthogonal(U, basis: GellMannBasis) -> np.ndarray:
    """
    O = X^t with X_ij = Tr(U l_i U^dagger l_j), so that T -> O T under rho -> U rho U^dagger.
    """
    U = np.asarray(U, dtype=complex)
    if U.shape != (basis.d, basis.d):
        raise DimensionMismatch(f"unitary of shape {U.shape} for a basis of dimension {basis.d}")
    residual = unitarity_residual(U)
    if residual > 1e-10:
        raise NotUnitary(f"matrix is not unitary (residual {residual:.3g})")
    L = basis.elems
    rotated = np.einsum("ab,ibc,dc->iad", U, L, U.conj())
    X = np.einsum("iad,jda->ij", rotated, L)
    imag = float(np.max(np.abs(X.imag)))
    if imag > IMAG_TOL:
        raise NotUnitary(f"induced map has imaginary residue {imag:.3g}")
    return X.real.T.copy()


def induced_orthogonals(u: LocalUnitaries) -> InducedOrthogonals:
    return InducedOrthogonals(tuple(induced_orthogonal(U, gell_mann_basis(d)) for d, U in zip(u.dims, u.us)))


def push_forward(rep: TensorRep, os: Sequence[np.ndarray]) -> TensorRep:
    """T_S -> (O_j1, ..., O_jM) * T_S for every subset S."""
    os = list(os.os) if isinstance(os, InducedOrthogonals) else list(os)
    if len(os) != rep.num_parties:
        raise ShapeMismatch(f"{len(os)} orthogonal matrices for {rep.num_parties} parties")
    for k, (delta, O) in enumerate(zip(rep.deltas, os)):
        if np.shape(O) != (delta, delta):
            raise ShapeMismatch(f"O_{k + 1} has shape {np.shape(O)}, expected ({delta}, {delta})")
    tensors = {subset: multilinear_mult([os[p - 1] for p in subset], T) for subset, T in rep.items()}
    return TensorRep(rep.dims, tensors)


def random_special_unitary(d: int, seed) -> np.ndarray:
    """Haar-random element of SU(d): QR of a complex Gaussian, phase-corrected, det fixed to 1."""
    if d < 2:
        raise DimensionMismatch(f"d must be >= 2, got {d}")
    rng = np.random.default_rng(seed)
    Z = (rng.standard_normal((d, d)) + 1j * rng.standard_normal((d, d))) / np.sqrt(2)
    Q, R = linalg.qr(Z)
    diag = np.diag(R)
    Q = Q * (diag / np.abs(diag))
    det = np.linalg.det(Q)
    return Q / np.exp(1j * np.angle(det) / d)


def random_orthogonal(n: int, seed, special: bool = False) -> np.ndarray:
    """Haar-random orthogonal n x n matrix; with `special`, det is forced to +1."""
    if n < 1:
        raise DimensionMismatch(f"n must be >= 1, got {n}")
    rng = np.random.default_rng(seed)
    Q, R = linalg.qr(rng.standard_normal((n, n)))
    signs = np.sign(np.diag(R))
    signs[signs == 0] = 1
    Q = Q * signs
    if special and np.linalg.det(Q) < 0:
        Q[:, 0] = -Q[:, 0]
    return Q


def random_local_unitaries(dims: Sequence[int], seed) -> LocalUnitaries:
    rng = np.random.default_rng(seed)
    return LocalUnitaries(tuple(dims), tuple(random_special_unitary(d, rng) for d in dims), special=True)


# Test-pair generators

def lu_pair(dims: Sequence[int], seed) -> Tuple[DensityMatrix, DensityMatrix]:
    """A random state and its conjugate by random special local unitaries."""
    rng = np.random.default_rng(seed)
    rho = random_density(dims, rng)
    return rho, conjugate_local(rho, random_local_unitaries(dims, rng))


def independent_pair(dims: Sequence[int], seed) -> Tuple[DensityMatrix, DensityMatrix]:
    rng = np.random.default_rng(seed)
    return random_density(dims, rng), random_density(dims, rng)


def shrink_factor(rep: TensorRep, margin: float = 0.9) -> float:
    """
    Largest s <= 1 keeping reconstruct(rep.scaled(s)) positive with eigenvalues >= (1 - margin)/D.
    """
    rho = reconstruct(rep)
    D = rho.dim
    traceless = rho.mat - np.eye(D) / D
    smallest = float(np.linalg.eigvalsh((traceless + traceless.conj().T) / 2)[0])
    if 1 / D + smallest >= (1 - margin) / D:
        return 1.0
    # 1/D + s * smallest = (1 - margin)/D
    return margin / (D * abs(smallest))


def sign_flip_pair(dims: Sequence[int], seed, flipped: Tuple[int, int] = (1, 2)) -> Tuple[DensityMatrix, DensityMatrix]:
    """
    A pair whose tensors satisfy T'_i = a_i^{-1} O_i T_i, T'_jk = a_i (O_j, O_k) T_jk with
    a_i = -1 on the two `flipped` parties and +1 elsewhere.

    The flip is a push-forward by improper orthogonals, which need not map
    states to states; both sides are mixed toward I/D by one common factor so
    the second stays positive.
    """
    if len(dims) < 2:
        raise DimensionMismatch("sign-flip pairs need at least two parties")
    rng = np.random.default_rng(seed)
    rho = random_density(dims, rng)
    rep = extract(rho)
    os = []
    for k, delta in enumerate(rep.deltas):
        O = random_orthogonal(delta, rng, special=True)
        os.append(-O if (k + 1) in flipped else O)
    flipped_rep = push_forward(rep, os)
    s = shrink_factor(flipped_rep)
    a = reconstruct(rep.scaled(s)).validate()
    b = reconstruct(flipped_rep.scaled(s)).validate()
    return a, b


PAIR_MODES = {
    "lu": lu_pair,
    "independent": independent_pair,
    "sign-flip": sign_flip_pair,
}


def generate_pair(dims: Sequence[int], seed, mode: str) -> Tuple[DensityMatrix, DensityMatrix]:
    if mode not in PAIR_MODES:
        raise ValueError(f"unknown pair mode {mode!r}, expected one of {', '.join(PAIR_MODES)}")
    return PAIR_MODES[mode](dims, seed)
