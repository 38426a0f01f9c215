"""Dense symmetric eigendecomposition and SVD.

The eigensolver is the classical cyclic Jacobi method (row-by-row sweep
order), compiled with numba. It is sequential, so results are bit-for-bit
reproducible for a given input.

The SVD is computed through the smaller Gram matrix (``D D^T`` or
``D^T D``) and recovers the other factor by back-multiplication.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from numba import njit

from .config import Tolerances, check_allocation, resolve
from .errors import ContractViolation, ConvergenceError, DimensionError

__all__ = [
    "SymmetricEig",
    "Svd",
    "sym_eig",
    "svd",
    "canonicalize_signs",
]


@dataclass(frozen=True)
class SymmetricEig:
    """Eigenpairs of a symmetric matrix.

    Attributes
    ----------
    eigenvalues : numpy.ndarray
        Length ``n``, sorted in descending order.
    eigenvectors : numpy.ndarray
        ``n x n`` with orthonormal columns; column ``k`` pairs with
        ``eigenvalues[k]``.
    sweeps : int
        Number of Jacobi sweeps performed.
    """

    eigenvalues: np.ndarray
    eigenvectors: np.ndarray
    sweeps: int = 0


@dataclass(frozen=True)
class Svd:
    """Thin SVD truncated at the numerical rank: ``D ~ U diag(s) V^T``."""

    U: np.ndarray
    singular_values: np.ndarray
    V: np.ndarray

    @property
    def rank(self) -> int:
        return int(self.singular_values.shape[0])

    def reconstruct(self) -> np.ndarray:
        return (self.U * self.singular_values) @ self.V.T


@njit(cache=True)
def _jacobi_sweep(a, vt, thresh):
    """One cyclic sweep over the upper triangle; returns the rotation count.

    ``a`` is kept symmetric by updating rows ``p, q`` and mirroring them
    into the columns. ``vt`` accumulates the transposed eigenvectors.
    """
    n = a.shape[0]
    rotations = 0
    for p in range(n - 1):
        for q in range(p + 1, n):
            apq = a[p, q]
            if abs(apq) <= thresh:
                continue
            rotations += 1
            app = a[p, p]
            aqq = a[q, q]
            theta = (aqq - app) / (2.0 * apq)
            t = 1.0 / (abs(theta) + np.sqrt(theta * theta + 1.0))
            if theta < 0.0:
                t = -t
            c = 1.0 / np.sqrt(t * t + 1.0)
            s = t * c
            for k in range(n):
                apk = a[p, k]
                aqk = a[q, k]
                a[p, k] = c * apk - s * aqk
                a[q, k] = s * apk + c * aqk
            a[p, p] = app - t * apq
            a[q, q] = aqq + t * apq
            a[p, q] = 0.0
            a[q, p] = 0.0
            for k in range(n):
                if k != p and k != q:
                    a[k, p] = a[p, k]
                    a[k, q] = a[q, k]
            for k in range(n):
                vpk = vt[p, k]
                vqk = vt[q, k]
                vt[p, k] = c * vpk - s * vqk
                vt[q, k] = s * vpk + c * vqk
    return rotations


def canonicalize_signs(vectors: np.ndarray, sign_eps: float) -> np.ndarray:
    """Flip columns so the first entry with magnitude above ``sign_eps`` is positive."""
    vectors = np.array(vectors, dtype=np.float64, copy=True)
    if vectors.size == 0:
        return vectors
    big = np.abs(vectors) > sign_eps
    has_big = big.any(axis=0)
    first = np.argmax(big, axis=0)
    lead = vectors[first, np.arange(vectors.shape[1])]
    flip = has_big & (lead < 0)
    vectors[:, flip] *= -1.0
    return vectors


def _check_square(a: np.ndarray) -> np.ndarray:
    a = np.asarray(a, dtype=np.float64)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise DimensionError(f"expected a square matrix, got shape {a.shape}")
    if not np.all(np.isfinite(a)):
        raise ContractViolation("matrix contains non-finite entries")
    return a


def sym_eig(a, tol: Tolerances | None = None) -> SymmetricEig:
    """Eigendecomposition of a real symmetric matrix by cyclic Jacobi.

    Parameters
    ----------
    a : array_like
        Square matrix. It must be symmetric up to ``sym_tol * max|a|``;
        it is symmetrized as ``(a + a.T) / 2`` before iterating.
    tol : Tolerances, optional

    Returns
    -------
    SymmetricEig
        Eigenvalues in descending order (stable with respect to the Jacobi
        output order on ties), sign-canonicalized eigenvectors.

    Raises
    ------
    DimensionError
        If ``a`` is not square.
    ContractViolation
        If the asymmetry exceeds the tolerance.
    ConvergenceError
        If ``max_sweeps`` sweeps do not annihilate the off-diagonal part.
    """
    tol = resolve(tol)
    a = _check_square(a)
    n = a.shape[0]
    check_allocation(2 * n * n, f"eigendecomposition of a {n}x{n} matrix", tol)

    amax = float(np.max(np.abs(a))) if n else 0.0
    asym = float(np.max(np.abs(a - a.T))) if n else 0.0
    if asym > tol.sym_tol * amax:
        raise ContractViolation(
            f"matrix is not symmetric: max asymmetry {asym:.3e} exceeds "
            f"{tol.sym_tol:.1e} * max|a| = {tol.sym_tol * amax:.3e}"
        )

    work = np.ascontiguousarray(0.5 * (a + a.T))
    fro = float(np.linalg.norm(work))
    if n == 0 or fro == 0.0:
        return SymmetricEig(np.zeros(n), np.eye(n), 0)

    # rotations below roundoff of the matrix norm are skipped; this bounds
    # the final off-diagonal Frobenius norm by n * eps * ||A||_F
    thresh = np.finfo(np.float64).eps * fro
    vt = np.eye(n)
    sweeps = 0
    converged = False
    for sweeps in range(1, tol.max_sweeps + 1):
        if _jacobi_sweep(work, vt, thresh) == 0:
            converged = True
            break

    if not converged:
        off = work - np.diag(np.diag(work))
        residual = float(np.linalg.norm(off)) / fro
        raise ConvergenceError(
            f"Jacobi did not converge in {tol.max_sweeps} sweeps "
            f"(relative off-diagonal norm {residual:.3e})",
            residual=residual,
        )

    w = np.diag(work).copy()
    order = np.argsort(-w, kind="stable")
    w = w[order]
    v = canonicalize_signs(vt.T[:, order], tol.sign_eps)
    return SymmetricEig(w, v, sweeps)


def svd(d, tol: Tolerances | None = None) -> Svd:
    """Thin SVD through the eigendecomposition of the smaller Gram matrix.

    Components whose Gram eigenvalue does not exceed
    ``eps_rank * lambda_max`` are discarded, so ``rank`` is the numerical
    rank of ``d``. The factor on the large side is recovered as
    ``D^T U / s`` (or ``D V / s``) and has orthonormal columns up to
    roundoff.
    """
    tol = resolve(tol)
    d = np.asarray(d, dtype=np.float64)
    if d.ndim != 2:
        raise DimensionError(f"expected a matrix, got shape {d.shape}")
    n, m = d.shape
    check_allocation(n * m + min(n, m) ** 2, f"SVD of a {n}x{m} matrix", tol)
    if n == 0 or m == 0:
        return Svd(np.zeros((n, 0)), np.zeros(0), np.zeros((m, 0)))

    wide = n <= m
    gram = d @ d.T if wide else d.T @ d
    eig = sym_eig(gram, tol)
    lam = eig.eigenvalues
    lam_max = lam[0] if lam.size else 0.0
    if lam_max <= 0.0:
        return Svd(np.zeros((n, 0)), np.zeros(0), np.zeros((m, 0)))
    keep = lam > tol.eps_rank * lam_max
    s = np.sqrt(lam[keep])
    small = eig.eigenvectors[:, keep]
    if wide:
        u = small
        v = (d.T @ u) / s
    else:
        v = small
        u = (d @ v) / s
    return Svd(u, s, v)
