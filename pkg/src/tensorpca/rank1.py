"""Rank-1 orthonormal basis built from mode-wise self-adjoint operators.

For each mode ``k`` the symmetric matrix ``A^k`` contracts the dataset
with itself over every index except ``i_k`` / ``j_k`` (samples included).
Its eigenvectors ``U^k`` give the factor matrices, and basis element ``m``
is the outer product of the columns ``U^1[:, j_1], ..., U^d[:, j_d]``
selected by the multi-index ``j`` of ``m``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import linalg
from .config import Tolerances, check_allocation, resolve
from .errors import ArgumentError, DimensionError, TensorIndexError
from .operators import _as_dataset
from .tensor_core import DenseTensor, Shape, inverse_linear_index

__all__ = [
    "Rank1Basis",
    "CoefficientSvd",
    "mode_operator",
    "rank1_basis",
    "basis_element",
    "basis_matrix",
    "multilinear_transform",
    "coefficients",
    "truncate_rank1",
]


@dataclass(frozen=True)
class Rank1Basis:
    sample_shape: Shape
    factors: tuple[np.ndarray, ...]
    mode_spectra: tuple[np.ndarray, ...]

    def __post_init__(self):
        if len(self.factors) != self.sample_shape.order:
            raise DimensionError("one factor matrix per mode is required")
        for k, (u, extent) in enumerate(zip(self.factors, self.sample_shape.dims), start=1):
            if u.shape != (extent, extent):
                raise DimensionError(f"factor {k} has shape {u.shape}, expected {(extent, extent)}")

    @property
    def size(self) -> int:
        return self.sample_shape.size


@dataclass(frozen=True)
class CoefficientSvd:
    """Coefficient matrix ``D[n, m] = <X_n, U_m>`` and its SVD."""

    D: np.ndarray
    svd: linalg.Svd

    @property
    def rank(self) -> int:
        return self.svd.rank


def _unfold(arr: np.ndarray, mode: int) -> np.ndarray:
    """Mode-``mode`` (0-based) unfolding: rows indexed by that mode."""
    return np.moveaxis(arr, mode, 0).reshape(arr.shape[mode], -1)


def mode_operator(x, k: int) -> np.ndarray:
    """``A^k(i_k, j_k)``: contraction of the dataset with itself over all
    indices except mode ``k`` (1-based)."""
    x = _as_dataset(x)
    d = x.sample_shape.order
    if not 1 <= int(k) <= d:
        raise ArgumentError(f"mode {k} outside 1..{d}")
    unfolded = _unfold(x.samples.array, int(k) - 1)
    return unfolded @ unfolded.T


def rank1_basis(x, tol: Tolerances | None = None) -> Rank1Basis:
    """Factor matrices ``U^k`` from the eigenvectors of every ``A^k``."""
    tol = resolve(tol)
    x = _as_dataset(x)
    factors, spectra = [], []
    for k in range(1, x.sample_shape.order + 1):
        eig = linalg.sym_eig(mode_operator(x, k), tol)
        factors.append(eig.eigenvectors)
        spectra.append(eig.eigenvalues)
    return Rank1Basis(x.sample_shape, tuple(factors), tuple(spectra))


def basis_element(b: Rank1Basis, m: int) -> DenseTensor:
    """Element ``m`` (1-based): outer product of the factor columns picked by
    the multi-index of ``m``."""
    if not 1 <= int(m) <= b.size:
        raise TensorIndexError(f"basis element {m} outside 1..{b.size}")
    j = inverse_linear_index(m, b.sample_shape)
    out = np.ones(())
    for u, jk in zip(b.factors, j):
        out = np.multiply.outer(out, u[:, jk - 1])
    return DenseTensor(out)


def basis_matrix(b: Rank1Basis, tol: Tolerances | None = None) -> np.ndarray:
    """All ``L`` basis elements as columns of an ``L x L`` matrix.

    Column ``m - 1`` is the flattened element ``m``. This equals the
    Kronecker product ``U^d (x) ... (x) U^1``.
    """
    check_allocation(b.size ** 2, "explicit rank-1 basis", tol)
    out = np.ones((1, 1))
    for u in b.factors:
        out = np.kron(u, out)
    return out


def multilinear_transform(arr: np.ndarray, matrices, transpose: bool = False) -> np.ndarray:
    """Multiply mode ``k`` of ``arr`` by ``matrices[k]`` for each ``k``.

    Trailing modes of ``arr`` beyond ``len(matrices)`` are left untouched.
    With ``transpose`` the transposed matrices are applied.
    """
    out = arr
    for k, u in enumerate(matrices):
        m = u.T if transpose else u
        out = np.moveaxis(np.tensordot(m, out, axes=([1], [k])), 0, k)
    return out


def coefficients(x, b: Rank1Basis, tol: Tolerances | None = None) -> CoefficientSvd:
    """Coefficients of every sample in the rank-1 basis, plus their SVD.

    ``D`` is evaluated as ``X x_1 U^1^T x_2 ... x_d U^d^T`` per sample,
    which equals the inner products with every basis element without
    materializing the basis.
    """
    x = _as_dataset(x)
    if x.sample_shape.dims != b.sample_shape.dims:
        raise DimensionError(
            f"dataset samples {x.sample_shape.dims} do not match basis {b.sample_shape.dims}"
        )
    core = multilinear_transform(x.samples.array, b.factors, transpose=True)
    D = np.ascontiguousarray(core.reshape((b.size, x.count), order="F").T)
    return CoefficientSvd(D, linalg.svd(D, tol))


def component_tensors(c: CoefficientSvd, b: Rank1Basis, count: int) -> np.ndarray:
    """Flattened tensors ``W_l = sum_m Z[m, l] U_m`` for ``l <= count``, as columns."""
    Z = c.svd.V[:, :count]
    stacked = Z.reshape(b.sample_shape.dims + (count,), order="F")
    w = multilinear_transform(stacked, b.factors)
    return w.reshape((b.size, count), order="F")


def truncate_rank1(c: CoefficientSvd, b: Rank1Basis, M: int):
    """Keep the ``M`` components with the largest singular values of ``D``.

    Sample ``n`` is approximated by ``sum_{l<=M} s_l Y[n, l] W_l`` where
    the ``W_l`` are orthonormal tensors; the summed squared error is
    ``sum_{l>M} s_l^2``.
    """
    from .pca import SubspaceModel

    r = c.rank
    if not 1 <= int(M) <= r:
        raise ArgumentError(f"retained count M={M} outside 1..{r}")
    M = int(M)
    s = c.svd.singular_values
    coeffs = c.svd.U[:, :M] * s[:M]
    sample_energy = np.einsum("ij,ij->i", c.D, c.D)
    return SubspaceModel.build(
        method="rank1",
        domain_shape=b.sample_shape,
        spectrum=s[:M].copy(),
        tail=s[M:].copy(),
        coefficients=coeffs,
        components=component_tensors(c, b, M),
        sample_energy=sample_energy,
        basis=b,
    )
