"""
Dense real hypermatrix algebra.

A hypermatrix of order d is a real array with dims (n_1, ..., n_d). Storage is
generalized column-major (first index fastest), so `vec` and `unfold(., 1)`
read the same flat buffer. Modes are 1-based at the API to match the usual
T_(1), T_(2), T_(3) notation; array indices are 0-based.
"""
from functools import reduce
from typing import Iterable, List, Sequence, Tuple, Union

import numpy as np

from errors import DimensionMismatch, ModeOutOfRange, ShapeMismatch

ArrayLike = Union[np.ndarray, Sequence, "Hypermatrix"]


class Hypermatrix:
    """Immutable real tensor of order >= 1 with an explicit dimension vector."""

    __slots__ = ("_array",)

    def __init__(self, array: ArrayLike):
        arr = np.array(np.asarray(array), dtype=float, order="F", copy=True)
        if arr.ndim < 1:
            raise ShapeMismatch("a hypermatrix needs order >= 1")
        if any(n < 1 for n in arr.shape):
            raise ShapeMismatch(f"every dimension must be >= 1, got {arr.shape}")
        arr.setflags(write=False)
        self._array = arr

    @classmethod
    def from_flat(cls, dims: Sequence[int], data: Sequence[float]) -> "Hypermatrix":
        """Build from a flat buffer laid out first-index-fastest."""
        dims = tuple(int(n) for n in dims)
        data = np.asarray(data, dtype=float).reshape(-1)
        if data.size != int(np.prod(dims)):
            raise ShapeMismatch(f"data length {data.size} does not match dims {dims}")
        return cls(data.reshape(dims, order="F"))

    @classmethod
    def zeros(cls, dims: Sequence[int]) -> "Hypermatrix":
        return cls(np.zeros(tuple(dims)))

    @property
    def dims(self) -> Tuple[int, ...]:
        return self._array.shape

    @property
    def order(self) -> int:
        return self._array.ndim

    @property
    def data(self) -> np.ndarray:
        """Flat column-major view."""
        return self._array.reshape(-1, order="F")

    @property
    def array(self) -> np.ndarray:
        return self._array

    def offset(self, index: Sequence[int]) -> int:
        """Flat offset of a 0-based multi-index: sum_l i_l * prod_{m<l} n_m."""
        if len(index) != self.order:
            raise DimensionMismatch(f"index of length {len(index)} for order {self.order}")
        offset, stride = 0, 1
        for i, n in zip(index, self.dims):
            if not 0 <= i < n:
                raise DimensionMismatch(f"index {tuple(index)} out of range for dims {self.dims}")
            offset += i * stride
            stride *= n
        return offset

    def norm(self) -> float:
        return float(np.linalg.norm(self.data))

    def __getitem__(self, index):
        return self._array[index]

    def __array__(self, dtype=None, copy=None):
        if dtype is None:
            return self._array
        return self._array.astype(dtype)

    def __repr__(self):
        return f"Hypermatrix(dims={self.dims})"


def _as_array(A: ArrayLike) -> np.ndarray:
    return np.asarray(A, dtype=float)


def outer_product(A: ArrayLike, B: ArrayLike) -> Hypermatrix:
    """Result has dims(A) ++ dims(B), entry A(i...) * B(j...)."""
    return Hypermatrix(np.multiply.outer(_as_array(A), _as_array(B)))


def outer_chain(tensors: Iterable[ArrayLike]) -> Hypermatrix:
    """A_1 o A_2 o ... o A_k."""
    return Hypermatrix(reduce(np.multiply.outer, [_as_array(t) for t in tensors]))


def multilinear_mult(mats: Sequence[ArrayLike], A: ArrayLike) -> Hypermatrix:
    """
    (X_1, ..., X_d) * A, contracting X_k against mode k of A.

    Raises DimensionMismatch when the list length differs from the order of A
    or any X_k has the wrong number of columns.
    """
    T = _as_array(A)
    if len(mats) != T.ndim:
        raise DimensionMismatch(f"got {len(mats)} matrices for a tensor of order {T.ndim}")
    for k, X in enumerate(mats):
        X = _as_array(X)
        if X.ndim != 2 or X.shape[1] != T.shape[k]:
            raise DimensionMismatch(
                f"matrix for mode {k + 1} has shape {X.shape}, needs {T.shape[k]} columns"
            )
        T = np.moveaxis(np.tensordot(X, T, axes=(1, k)), 0, k)
    return Hypermatrix(T)


def unfold(A: ArrayLike, k: int) -> np.ndarray:
    """
    Mode-k unfolding: an n_k x prod_{l != k} n_l matrix.

    The remaining modes keep ascending order with the first one varying
    fastest, which reproduces (A_1, A_2, A_3) * T unfolding to
    A_1 T_(1) (A_3 kron A_2)^t, A_2 T_(2) (A_3 kron A_1)^t and
    A_3 T_(3) (A_2 kron A_1)^t.
    """
    T = _as_array(A)
    if not 1 <= k <= T.ndim:
        raise ModeOutOfRange(f"mode {k} out of range for order {T.ndim}")
    return np.moveaxis(T, k - 1, 0).reshape(T.shape[k - 1], -1, order="F")


def fold(M: ArrayLike, k: int, dims: Sequence[int]) -> Hypermatrix:
    """Inverse of `unfold` for a target shape `dims`."""
    dims = tuple(dims)
    if not 1 <= k <= len(dims):
        raise ModeOutOfRange(f"mode {k} out of range for order {len(dims)}")
    rest = dims[: k - 1] + dims[k:]
    M = _as_array(M)
    if M.shape != (dims[k - 1], int(np.prod(rest))):
        raise ShapeMismatch(f"matrix of shape {M.shape} cannot fold into {dims} along mode {k}")
    T = M.reshape((dims[k - 1],) + rest, order="F")
    return Hypermatrix(np.moveaxis(T, 0, k - 1))


def vec(M: ArrayLike) -> np.ndarray:
    """Column-stacking vectorization."""
    return _as_array(M).reshape(-1, order="F")


def kron(A: ArrayLike, B: ArrayLike) -> np.ndarray:
    return np.kron(_as_array(A), _as_array(B))


def kron_chain(mats: List[ArrayLike]) -> np.ndarray:
    return reduce(np.kron, [np.asarray(m) for m in mats])
