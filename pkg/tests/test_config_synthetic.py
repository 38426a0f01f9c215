import numpy as np
import pytest

from tensorpca.config import DEFAULT, Tolerances, check_allocation
from tensorpca.errors import ArgumentError, CapacityError
from tensorpca.synthetic import parse_synthetic, planted_dataset, synthetic_dataset


def test_tolerances_from_mapping():
    t = Tolerances.from_mapping({"tol_eig": "1e-6", "eig_cap": "10"})
    assert t.tol_eig == 1e-6
    assert t.eig_cap == 10
    assert t.sym_tol == DEFAULT.sym_tol
    with pytest.raises(ArgumentError):
        Tolerances.from_mapping({"nope": "1"})


def test_check_allocation():
    check_allocation(10, "small")
    with pytest.raises(CapacityError) as info:
        check_allocation(10**12, "huge")
    assert info.value.required_bytes == 8 * 10**12


def test_synthetic_is_seeded():
    a = synthetic_dataset("shape=3x3,n=4,seed=2")
    b = synthetic_dataset("shape=3x3,n=4,seed=2")
    c = synthetic_dataset("shape=3x3,n=4,seed=3")
    np.testing.assert_array_equal(a.matrix, b.matrix)
    assert not np.array_equal(a.matrix, c.matrix)


def test_planted_rank():
    x = planted_dataset((4, 4), 6, 3, seed=1)
    s = np.linalg.svd(x.matrix, compute_uv=False)
    assert np.all(s[:3] > 1.0)
    assert np.all(s[3:] < 1e-12)


def test_parse_synthetic():
    assert parse_synthetic("rank=3")["kind"] == "planted"
    assert parse_synthetic("shape=4x4x3,kind=images")["shape"] == (4, 4, 3)
    imgs = synthetic_dataset("shape=4x5x3,n=2,kind=images")
    assert imgs.samples.dims == (4, 5, 3, 2)
    assert imgs.matrix.min() >= 0 and imgs.matrix.max() <= 1
    for bad in ("rank", "color=2", "kind=noise"):
        with pytest.raises(ArgumentError):
            parse_synthetic(bad)
