"""Projection, truncation and error reporting shared by the three bases.

Every truncated model keeps ``M`` orthonormal tensors (columns of
``components``) and the coefficients of each sample on them. The error
that the producing method predicts is

* ``selfadjoint``: ``sum_{p>M} lambda_p`` of the covariance operator, a
  per-sample mean;
* ``rank1`` / ``subspace``: ``sum_{l>M} s_l^2``, a sum over samples,
  reported here divided by ``N``.

All error figures in :class:`ErrorReport` are per-sample means, and the
relative gap is normalized by the mean sample energy ``||X||_F^2 / N``.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

import numpy as np

from .errors import ArgumentError, DimensionError
from .operators import TensorBasis, TensorDataset, _as_dataset
from .tensor_core import DenseTensor, Shape

__all__ = [
    "ErrorReport",
    "SubspaceModel",
    "project",
    "reconstruct",
    "pca_truncate",
    "retained_error",
    "error_report",
    "GAP_TOLERANCE",
]

GAP_TOLERANCE = 1e-8
METHODS = ("selfadjoint", "rank1", "subspace")


@dataclass(frozen=True)
class ErrorReport:
    per_sample: np.ndarray
    mean: float
    predicted: float
    relative_gap: float
    energy: float
    tolerance: float = GAP_TOLERANCE

    @property
    def total(self) -> float:
        return float(np.sum(self.per_sample))

    @property
    def identity_holds(self) -> bool:
        return self.relative_gap <= self.tolerance

    @classmethod
    def from_errors(cls, per_sample, predicted: float, energy: float) -> "ErrorReport":
        per_sample = np.maximum(np.asarray(per_sample, dtype=np.float64), 0.0)
        if energy <= 0.0:
            raise ArgumentError("cannot report relative errors for a zero-energy dataset")
        mean = float(np.mean(per_sample))
        gap = abs(mean - predicted) / energy
        return cls(per_sample, mean, float(predicted), float(gap), float(energy))

    def to_csv(self, path) -> None:
        """``sample,squared_error`` rows, then a ``mean,predicted,relative_gap`` block."""
        path = Path(path)
        with path.open("w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["sample", "squared_error"])
            for n, e in enumerate(self.per_sample, start=1):
                w.writerow([n, f"{e:.17g}"])
            w.writerow([])
            w.writerow(["mean", "predicted", "relative_gap"])
            w.writerow([f"{self.mean:.17g}", f"{self.predicted:.17g}", f"{self.relative_gap:.17g}"])


@dataclass(frozen=True)
class SubspaceModel:
    """Truncated representation produced by any of the three methods.

    ``report`` is computed from the coefficients alone
    (``||X_n||^2 - ||c_n||^2``); :func:`error_report` measures the error by
    explicit reconstruction instead.
    """

    method: str
    domain_shape: Shape
    spectrum: np.ndarray
    tail: np.ndarray
    coefficients: np.ndarray
    components: np.ndarray
    sample_energy: np.ndarray
    report: ErrorReport
    basis: object = field(default=None, repr=False, compare=False)

    @property
    def retained(self) -> int:
        return int(self.spectrum.shape[0])

    @property
    def count(self) -> int:
        return int(self.coefficients.shape[0])

    @staticmethod
    def predicted_error(method: str, tail: np.ndarray, count: int) -> float:
        """Mean per-sample squared error implied by the discarded spectrum."""
        if method == "selfadjoint":
            return float(np.sum(tail))
        if method in ("rank1", "subspace"):
            return float(np.sum(tail ** 2)) / count
        raise ArgumentError(f"unknown method '{method}'")

    @classmethod
    def build(cls, method, domain_shape, spectrum, tail, coefficients, components,
              sample_energy, basis=None) -> "SubspaceModel":
        if method not in METHODS:
            raise ArgumentError(f"unknown method '{method}'")
        coefficients = np.asarray(coefficients, dtype=np.float64)
        n = coefficients.shape[0]
        per_sample = sample_energy - np.einsum("ij,ij->i", coefficients, coefficients)
        report = ErrorReport.from_errors(
            per_sample,
            cls.predicted_error(method, tail, n),
            float(np.sum(sample_energy)) / n,
        )
        return cls(method, domain_shape, spectrum, tail, coefficients, components,
                   np.asarray(sample_energy, dtype=np.float64), report, basis)

    def reconstruct(self) -> TensorDataset:
        """Approximations of every sample as a dataset."""
        return TensorDataset.from_matrix(self.components @ self.coefficients.T, self.domain_shape)


def _basis_matrix(basis) -> tuple[Shape, np.ndarray]:
    if isinstance(basis, TensorBasis):
        return basis.domain_shape, basis.vectors
    raise TypeError(f"expected TensorBasis, got {type(basis).__name__}")


def project(x, basis: TensorBasis) -> np.ndarray:
    """Coefficients ``d_l = <X, U_l>`` for every basis element."""
    shape, vectors = _basis_matrix(basis)
    x = x if isinstance(x, DenseTensor) else DenseTensor(x)
    if x.dims != shape.dims:
        raise DimensionError(f"tensor shape {x.dims} does not match basis domain {shape.dims}")
    return vectors.T @ x.flat


def reconstruct(d, basis: TensorBasis) -> DenseTensor:
    """``sum_l d_l U_l`` over the first ``len(d)`` basis elements."""
    shape, vectors = _basis_matrix(basis)
    d = np.asarray(d, dtype=np.float64).ravel()
    if d.shape[0] > vectors.shape[1]:
        raise DimensionError(f"{d.shape[0]} coefficients for a basis of {vectors.shape[1]} elements")
    return DenseTensor(vectors[:, : d.shape[0]] @ d, shape)


def _top_indices(eigenvalues: np.ndarray, M: int) -> np.ndarray:
    return np.argsort(-eigenvalues, kind="stable")[:M]


def pca_truncate(x, basis: TensorBasis, M: int) -> SubspaceModel:
    """Keep the ``M`` basis elements with the largest eigenvalues.

    When ``basis`` is the eigentensor basis of ``covariance_operator(x)``
    the mean squared error equals the sum of the discarded eigenvalues.
    """
    x = _as_dataset(x)
    shape, vectors = _basis_matrix(basis)
    if x.sample_shape.dims != shape.dims:
        raise DimensionError(f"dataset samples {x.sample_shape.dims} do not match basis {shape.dims}")
    if not 1 <= int(M) <= len(basis):
        raise ArgumentError(f"retained count M={M} outside 1..{len(basis)}")
    M = int(M)
    keep = _top_indices(basis.eigenvalues, M)
    rest = np.setdiff1d(np.arange(len(basis)), keep)
    m = x.matrix
    comps = vectors[:, keep]
    return SubspaceModel.build(
        method="selfadjoint",
        domain_shape=shape,
        spectrum=basis.eigenvalues[keep].copy(),
        tail=basis.eigenvalues[rest].copy(),
        coefficients=m.T @ comps,
        components=comps.copy(),
        sample_energy=np.einsum("ij,ij->j", m, m),
        basis=basis,
    )


def retained_error(x, basis: TensorBasis, indices: Sequence[int]) -> float:
    """Mean squared reconstruction error keeping the given (0-based) elements,
    measured by explicit reconstruction."""
    x = _as_dataset(x)
    _, vectors = _basis_matrix(basis)
    comps = vectors[:, list(indices)]
    m = x.matrix
    resid = m - comps @ (comps.T @ m)
    return float(np.einsum("ij,ij->", resid, resid)) / x.count


def error_report(x, model: SubspaceModel) -> ErrorReport:
    """Measure ``||X_n - X^_n||^2`` by reconstruction and compare with the
    error predicted by the model's method."""
    x = _as_dataset(x)
    if x.sample_shape.dims != model.domain_shape.dims:
        raise DimensionError(
            f"dataset samples {x.sample_shape.dims} do not match model {model.domain_shape.dims}"
        )
    if x.count != model.count:
        raise DimensionError(f"dataset has {x.count} samples, model has {model.count}")
    m = x.matrix
    resid = m - model.components @ model.coefficients.T
    per_sample = np.einsum("ij,ij->j", resid, resid)
    predicted = SubspaceModel.predicted_error(model.method, model.tail, x.count)
    return ErrorReport.from_errors(per_sample, predicted, x.energy() / x.count)
