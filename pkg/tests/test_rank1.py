import numpy as np
import pytest

from oracles import coefficients_loop, mode_operator_loop
from tensorpca.errors import ArgumentError, DimensionError
from tensorpca.pca import error_report
from tensorpca.rank1 import (
    basis_element,
    basis_matrix,
    coefficients,
    component_tensors,
    mode_operator,
    rank1_basis,
    truncate_rank1,
)
from tensorpca.synthetic import random_dataset

SHAPES = [(2, 3), (3, 2, 2), (2, 2, 2, 2), (4, 3)]


@pytest.mark.parametrize("shape", SHAPES)
def test_mode_operator_matches_loop(shape):
    x = random_dataset(shape, 3, 11)
    for k in range(1, len(shape) + 1):
        want = mode_operator_loop(x.samples.array, k)
        got = mode_operator(x, k)
        assert np.max(np.abs(got - want)) <= 1e-12 * np.max(np.abs(want))


@pytest.mark.parametrize("shape", SHAPES)
def test_coefficients_match_loop(shape):
    x = random_dataset(shape, 3, 5)
    b = rank1_basis(x)
    c = coefficients(x, b)
    want = coefficients_loop(x.samples.array, b.factors)
    assert np.max(np.abs(c.D - want)) <= 1e-12 * np.max(np.abs(want))


def test_basis_matrix_columns_are_elements():
    x = random_dataset((2, 3, 2), 4, 2)
    b = rank1_basis(x)
    full = basis_matrix(b)
    for m in (1, 5, 12):
        np.testing.assert_allclose(full[:, m - 1], basis_element(b, m).flat, atol=1e-15)
    np.testing.assert_allclose(full.T @ full, np.eye(12), atol=1e-12)


def test_factors_diagonalize_mode_operators():
    x = random_dataset((3, 4), 6, 8)
    b = rank1_basis(x)
    for k, (u, lam) in enumerate(zip(b.factors, b.mode_spectra), start=1):
        a = mode_operator(x, k)
        np.testing.assert_allclose(u.T @ a @ u, np.diag(lam), atol=1e-11)
        assert np.all(np.diff(lam) <= 0)


@pytest.mark.parametrize("N", [3, 10])
def test_truncation_identity(N):
    x = random_dataset((3, 2, 2), N, N)
    b = rank1_basis(x)
    c = coefficients(x, b)
    for M in range(1, c.rank + 1):
        model = truncate_rank1(c, b, M)
        rep = error_report(x, model)
        assert rep.relative_gap <= 1e-12
        assert model.report.relative_gap <= 1e-12
    full = truncate_rank1(c, b, c.rank)
    np.testing.assert_allclose(full.reconstruct().matrix, x.matrix, atol=1e-12)


def test_component_tensors_orthonormal():
    x = random_dataset((2, 3, 2), 5, 1)
    b = rank1_basis(x)
    c = coefficients(x, b)
    w = component_tensors(c, b, c.rank)
    np.testing.assert_allclose(w.T @ w, np.eye(c.rank), atol=1e-12)


def test_errors():
    x = random_dataset((2, 2), 3, 0)
    b = rank1_basis(x)
    c = coefficients(x, b)
    with pytest.raises(ArgumentError):
        mode_operator(x, 3)
    with pytest.raises(ArgumentError):
        truncate_rank1(c, b, c.rank + 1)
    with pytest.raises(DimensionError):
        coefficients(random_dataset((4,), 3, 0), b)
