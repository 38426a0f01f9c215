import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from oracles import best_subset_error
from tensorpca.errors import ArgumentError, DimensionError
from tensorpca.operators import covariance_operator, eigentensor_basis
from tensorpca.pca import (
    ErrorReport,
    error_report,
    pca_truncate,
    project,
    reconstruct,
    retained_error,
)
from tensorpca.synthetic import random_dataset


def _setup(shape=(2, 3), n=10, seed=0):
    x = random_dataset(shape, n, seed)
    return x, eigentensor_basis(covariance_operator(x))


def test_project_reconstruct_roundtrip():
    x, b = _setup()
    t = x.sample(2)
    d = project(t, b)
    np.testing.assert_allclose(reconstruct(d, b).array, t.array, atol=1e-12)
    assert np.sum(d ** 2) == pytest.approx(np.sum(t.array ** 2), rel=1e-12)


@given(st.integers(0, 50), st.integers(1, 6))
@settings(max_examples=25, deadline=None)
def test_tail_identity_property(seed, M):
    x, b = _setup((2, 3), 12, seed)
    model = pca_truncate(x, b, M)
    rep = error_report(x, model)
    assert rep.relative_gap <= 1e-10
    assert rep.mean == pytest.approx(np.sum(b.eigenvalues[M:]), abs=1e-10 * rep.energy)
    assert model.report.relative_gap <= 1e-10


def test_error_monotone_in_M():
    x, b = _setup((2, 2, 2), 20, 3)
    errs = [error_report(x, pca_truncate(x, b, M)).mean for M in range(1, 9)]
    assert all(a >= c - 1e-12 for a, c in zip(errs, errs[1:]))
    assert errs[-1] <= 1e-12


def test_top_subset_is_optimal():
    x, b = _setup((2, 2, 2), 9, 5)
    for M in (1, 2, 3):
        best, best_set = best_subset_error(x.matrix, b.vectors, M)
        assert retained_error(x, b, range(M)) <= best + 1e-12


def test_negative_control_permuted_basis_breaks_identity():
    x, b = _setup((2, 3), 15, 1)
    perm = np.random.default_rng(0).permutation(len(b))
    scrambled = type(b)(b.domain_shape, b.eigenvalues, b.vectors[:, perm])
    gaps = [error_report(x, pca_truncate(x, scrambled, M)).relative_gap for M in range(1, 6)]
    assert max(gaps) > 1e-3


def test_csv(tmp_path):
    rep = ErrorReport.from_errors([1.0, 3.0], 2.0, 4.0)
    rep.to_csv(tmp_path / "e.csv")
    lines = (tmp_path / "e.csv").read_text().splitlines()
    assert lines[0] == "sample,squared_error"
    assert lines[1:3] == ["1,1", "2,3"]
    assert lines[4] == "mean,predicted,relative_gap"
    assert lines[5] == "2,2,0"


def test_errors():
    x, b = _setup()
    with pytest.raises(ArgumentError):
        pca_truncate(x, b, 0)
    with pytest.raises(ArgumentError):
        pca_truncate(x, b, 7)
    with pytest.raises(DimensionError):
        pca_truncate(random_dataset((3, 2), 4, 0), b, 1)
    with pytest.raises(DimensionError):
        error_report(random_dataset((2, 3), 4, 0), pca_truncate(x, b, 2))
