"""Cross-module invariant battery run by ``tensorpca verify``."""

from __future__ import annotations

import warnings
from dataclasses import dataclass
from typing import Callable

import numpy as np

from . import linalg
from .operators import (
    SelfAdjointOperator,
    covariance_operator,
    eigentensor_basis,
    is_self_adjoint,
    proposition1_residual,
)
from .pca import error_report, pca_truncate
from .rank1 import basis_matrix, coefficients, rank1_basis, truncate_rank1
from .subspace import project_subspace, subspace_basis
from .synthetic import planted_dataset, random_dataset, random_self_adjoint

__all__ = ["Check", "run_checks"]


@dataclass(frozen=True)
class Check:
    name: str
    passed: bool
    detail: str

    def line(self) -> str:
        return f"{'PASS' if self.passed else 'FAIL'}  {self.name}: {self.detail}"


def _orth_error(vectors: np.ndarray) -> float:
    return float(np.max(np.abs(vectors.T @ vectors - np.eye(vectors.shape[1]))))


def _check_eigen_equation(seed: int, perturb: bool) -> Check:
    op = random_self_adjoint((3, 3, 3), seed)
    if perturb:
        mat = op.matrix.copy()
        mat[0, 1] += 1e-3 * np.max(np.abs(mat))
        op = SelfAdjointOperator.from_matrix(mat, op.domain_shape)
    ok, asym = is_self_adjoint(op)
    if not ok:
        return Check("eigen_equation", False, f"operator not self-adjoint (asymmetry {asym:.2e})")
    basis = eigentensor_basis(op)
    res = proposition1_residual(op, basis)
    ref = linalg.sym_eig(op.matrix).eigenvalues
    gap = float(np.max(np.abs(np.sort(basis.eigenvalues) - np.sort(ref))))
    orth = _orth_error(basis.vectors)
    passed = res <= 1e-9 and gap <= 1e-10 and orth <= 1e-10
    return Check("eigen_equation", passed,
                 f"residual {res:.2e}, spectrum gap {gap:.2e}, orthonormality {orth:.2e}")


def _check_tail_identity(seed: int) -> Check:
    x = random_dataset((2, 3, 2), 20, seed)
    basis = eigentensor_basis(covariance_operator(x))
    worst = max(error_report(x, pca_truncate(x, basis, M)).relative_gap
                for M in range(1, len(basis) + 1))
    parseval = abs(np.sum((basis.vectors.T @ x.matrix) ** 2) - x.energy()) / x.energy()
    return Check("eigenvalue_tail_identity", worst <= 1e-8 and parseval <= 1e-10,
                 f"worst gap {worst:.2e}, Parseval {parseval:.2e}")


def _check_rank1(seed: int) -> Check:
    x = random_dataset((3, 2, 2), 15, seed)
    b = rank1_basis(x)
    c = coefficients(x, b)
    full = basis_matrix(b)
    recon = float(np.max(np.abs(full @ c.D.T - x.matrix))) / np.sqrt(x.energy())
    worst = max(error_report(x, truncate_rank1(c, b, M)).relative_gap
                for M in range(1, c.rank + 1))
    orth = _orth_error(full)
    passed = recon <= 1e-9 and worst <= 1e-8 and orth <= 1e-10
    return Check("rank1_error_identity", passed,
                 f"exactness {recon:.2e}, worst gap {worst:.2e}, orthonormality {orth:.2e}")


def _check_subspace(seed: int) -> Check:
    x = planted_dataset((5, 4, 3), 5, 3, seed)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        b = subspace_basis(x)
    model = project_subspace(x, b, b.rank)
    rel = float(np.sqrt(error_report(x, model).total / x.energy()))
    worst = max(error_report(x, project_subspace(x, b, M)).relative_gap
                for M in range(1, b.rank + 1))
    orth = _orth_error(b.q)
    passed = b.rank == 3 and rel <= 1e-9 and worst <= 1e-8 and orth <= 1e-10
    return Check("subspace_snapshot", passed,
                 f"rank {b.rank}/3, exactness {rel:.2e}, worst gap {worst:.2e}, "
                 f"orthonormality {orth:.2e}")


def run_checks(seed: int = 0, perturb: bool = False) -> list[Check]:
    battery: list[Callable[[], Check]] = [
        lambda: _check_eigen_equation(seed, perturb),
        lambda: _check_tail_identity(seed),
        lambda: _check_rank1(seed),
        lambda: _check_subspace(seed),
    ]
    return [run() for run in battery]
