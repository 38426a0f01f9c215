"""Orthonormal basis of the span of a few samples (snapshot method).

With ``N < L`` samples, the ``N x N`` Gram matrix ``G = R R^T`` is
decomposed as ``U S^2 U^T``; the basis tensors are
``Q_l = sum_n X_n b[n, l]`` with ``b = U S^{-1}``, restricted to the
numerical rank.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

from . import linalg
from .config import Tolerances, resolve
from .errors import ArgumentError, DimensionError
from .operators import _as_dataset
from .tensor_core import DenseTensor, Shape

__all__ = ["SubspaceBasis", "gram_matrix", "subspace_basis", "project_subspace"]


@dataclass(frozen=True)
class SubspaceBasis:
    """Orthonormal tensors ``Q`` (columns of ``q``), the mixing matrix ``b``
    with ``Q = X b``, and singular values ``spectrum``."""

    domain_shape: Shape
    q: np.ndarray
    mixing: np.ndarray
    spectrum: np.ndarray
    snapshot_eig: linalg.SymmetricEig | None = None

    @property
    def rank(self) -> int:
        return int(self.spectrum.shape[0])

    @property
    def count(self) -> int:
        return int(self.mixing.shape[0])

    def element(self, l: int) -> DenseTensor:
        if not 1 <= l <= self.rank:
            raise ArgumentError(f"basis element {l} outside 1..{self.rank}")
        return DenseTensor(self.q[:, l - 1], self.domain_shape)

    def sample_coefficients(self) -> np.ndarray:
        """``r[n, l] = U[n, l] s_l = b[n, l] s_l^2`` for the source samples."""
        return self.mixing * self.spectrum ** 2


def gram_matrix(x) -> np.ndarray:
    """``G[n, m] = <X_n, X_m>``."""
    x = _as_dataset(x)
    m = x.matrix
    return m.T @ m


def subspace_basis(x, tol: Tolerances | None = None) -> SubspaceBasis:
    """Snapshot-method basis of the span of the samples.

    Gram eigenvalues at or below ``eps_rank * lambda_max`` are treated as
    zero; a warning reports how many were dropped.
    """
    tol = resolve(tol)
    x = _as_dataset(x)
    g = gram_matrix(x)
    eig = linalg.sym_eig(g, tol)
    lam = eig.eigenvalues
    if lam.size == 0 or lam[0] <= 0.0:
        raise ArgumentError("all samples are zero; the spanned subspace is empty")
    keep = lam > tol.eps_rank * lam[0]
    r = int(np.count_nonzero(keep))
    dropped = x.count - r
    if dropped:
        warnings.warn(
            f"{dropped} of {x.count} snapshot directions fall below the rank "
            f"threshold and were dropped",
            stacklevel=2,
        )
    s = np.sqrt(lam[:r])
    b = eig.eigenvectors[:, :r] / s
    q = x.matrix @ b
    return SubspaceBasis(x.sample_shape, q, b, s, eig)


def project_subspace(x, b: SubspaceBasis, M: int):
    """Project every sample of ``x`` on the ``M`` leading basis tensors.

    The predicted summed squared error ``sum_{p>M} s_p^2`` holds when ``x``
    is the dataset the basis was built from.
    """
    from .pca import SubspaceModel

    x = _as_dataset(x)
    if x.sample_shape.dims != b.domain_shape.dims:
        raise DimensionError(
            f"dataset samples {x.sample_shape.dims} do not match basis {b.domain_shape.dims}"
        )
    if not 1 <= int(M) <= b.rank:
        raise ArgumentError(f"retained count M={M} outside 1..{b.rank}")
    M = int(M)
    m = x.matrix
    comps = b.q[:, :M]
    return SubspaceModel.build(
        method="subspace",
        domain_shape=b.domain_shape,
        spectrum=b.spectrum[:M].copy(),
        tail=b.spectrum[M:].copy(),
        coefficients=m.T @ comps,
        components=comps.copy(),
        sample_energy=np.einsum("ij,ij->j", m, m),
        basis=b,
    )
