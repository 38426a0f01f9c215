"""Self-adjoint tensor operators and their eigentensor bases.

An operator on order-d tensors of shape ``I = (I_1, ..., I_d)`` is an
order-2d tensor ``A[i, j]`` acting as ``(A Y)[i] = sum_j A[i, j] Y[j]``.
It is self-adjoint when ``A[i, j] == A[j, i]``. Relabeling both index
groups by the linear index turns ``A`` into a symmetric ``L x L`` matrix
whose eigenvectors, relabeled back, are the eigentensors of ``A``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from . import linalg
from .config import Tolerances, check_allocation, resolve
from .errors import ArgumentError, CapacityError, ContractViolation, DimensionError
from .tensor_core import DenseTensor, Shape, contract, index_table

__all__ = [
    "SelfAdjointOperator",
    "TensorBasis",
    "TensorDataset",
    "apply",
    "is_self_adjoint",
    "gram_operator",
    "covariance_operator",
    "rayleigh_quotient",
    "eigentensor_basis",
    "proposition1_residual",
]


class TensorDataset:
    """``N`` samples of one shape, stored as an order-(d+1) tensor with the
    sample axis last."""

    def __init__(self, samples):
        samples = samples if isinstance(samples, DenseTensor) else DenseTensor(samples)
        if samples.order < 2:
            raise DimensionError("a dataset needs at least one sample mode and the sample axis")
        self.samples = samples
        self.sample_shape = Shape(samples.dims[:-1])
        self.count = samples.dims[-1]

    @classmethod
    def from_samples(cls, tensors: Sequence) -> "TensorDataset":
        if len(tensors) == 0:
            raise ArgumentError("a dataset needs at least one sample")
        arrays = [np.asarray(t, dtype=np.float64) for t in tensors]
        first = arrays[0].shape
        for k, a in enumerate(arrays):
            if a.shape != first:
                raise DimensionError(f"sample {k + 1} has shape {a.shape}, expected {first}")
        return cls(np.stack(arrays, axis=-1))

    @classmethod
    def from_matrix(cls, matrix, sample_shape) -> "TensorDataset":
        """Build from an ``L x N`` matrix whose columns are flattened samples."""
        sample_shape = Shape.of(sample_shape)
        matrix = np.asarray(matrix, dtype=np.float64)
        if matrix.ndim != 2 or matrix.shape[0] != sample_shape.size:
            raise DimensionError(
                f"matrix of shape {matrix.shape} does not hold samples of shape {sample_shape.dims}"
            )
        return cls(DenseTensor(matrix.reshape(-1, order="F"), sample_shape.dims + (matrix.shape[1],)))

    @property
    def matrix(self) -> np.ndarray:
        """``L x N`` read-only view; column ``n - 1`` is sample ``n`` flattened."""
        return self.samples.array.reshape((self.sample_shape.size, self.count), order="F")

    def sample(self, n: int) -> DenseTensor:
        """Sample ``n`` (1-based)."""
        if not 1 <= n <= self.count:
            raise ArgumentError(f"sample {n} outside 1..{self.count}")
        return DenseTensor(self.samples.array[..., n - 1])

    def energy(self) -> float:
        """Squared Frobenius norm of the whole dataset."""
        m = self.matrix
        return float(np.einsum("ij,ij->", m, m))

    def __len__(self):
        return self.count

    def __repr__(self):
        return f"TensorDataset(sample_shape={self.sample_shape.dims}, count={self.count})"


def _as_dataset(x) -> TensorDataset:
    return x if isinstance(x, TensorDataset) else TensorDataset(x)


@dataclass(frozen=True)
class SelfAdjointOperator:
    """Order-2d operator over tensors of ``domain_shape``.

    Symmetry is not enforced at construction; :func:`is_self_adjoint`
    checks it and :func:`eigentensor_basis` requires it.
    """

    domain_shape: Shape
    entries: DenseTensor

    def __post_init__(self):
        dims = self.domain_shape.dims
        if self.entries.dims != dims + dims:
            raise DimensionError(
                f"operator entries have shape {self.entries.dims}, expected {dims + dims}"
            )

    @classmethod
    def from_tensor(cls, entries) -> "SelfAdjointOperator":
        entries = entries if isinstance(entries, DenseTensor) else DenseTensor(entries)
        d, rem = divmod(entries.order, 2)
        if rem or d == 0 or entries.dims[:d] != entries.dims[d:]:
            raise DimensionError(f"shape {entries.dims} is not of the paired form (I, I)")
        return cls(Shape(entries.dims[:d]), entries)

    @classmethod
    def from_matrix(cls, matrix, domain_shape) -> "SelfAdjointOperator":
        """Operator whose linear-index matrix is ``matrix``."""
        domain_shape = Shape.of(domain_shape)
        matrix = np.asarray(matrix, dtype=np.float64)
        L = domain_shape.size
        if matrix.shape != (L, L):
            raise DimensionError(f"matrix shape {matrix.shape} does not match domain size {L}")
        return cls(domain_shape, DenseTensor(matrix.reshape(-1, order="F"), domain_shape.dims * 2))

    @classmethod
    def identity(cls, domain_shape) -> "SelfAdjointOperator":
        domain_shape = Shape.of(domain_shape)
        return cls.from_matrix(np.eye(domain_shape.size), domain_shape)

    @property
    def size(self) -> int:
        return self.domain_shape.size

    @property
    def matrix(self) -> np.ndarray:
        """The ``L x L`` matrix ``a(n, m) = A[i(n), j(m)]`` (read-only view)."""
        L = self.size
        return self.entries.array.reshape((L, L), order="F")

    def frobenius(self) -> float:
        return float(np.linalg.norm(self.entries.flat))


@dataclass(frozen=True)
class TensorBasis:
    """Orthonormal tensors with associated real spectrum values.

    ``vectors`` stores one flattened tensor per column. Element indices
    are 1-based in :meth:`element`.
    """

    domain_shape: Shape
    eigenvalues: np.ndarray
    vectors: np.ndarray
    method: str = "selfadjoint"
    sweeps: int = field(default=0, compare=False)

    def __post_init__(self):
        if self.vectors.shape != (self.domain_shape.size, self.eigenvalues.shape[0]):
            raise DimensionError(
                f"basis vectors of shape {self.vectors.shape} do not match "
                f"{self.domain_shape.size} x {self.eigenvalues.shape[0]}"
            )

    def __len__(self):
        return int(self.eigenvalues.shape[0])

    def element(self, l: int) -> DenseTensor:
        if not 1 <= l <= len(self):
            raise ArgumentError(f"basis element {l} outside 1..{len(self)}")
        return DenseTensor(self.vectors[:, l - 1], self.domain_shape)

    @property
    def eigentensors(self) -> list[DenseTensor]:
        return [self.element(l) for l in range(1, len(self) + 1)]

    def gram(self) -> np.ndarray:
        return self.vectors.T @ self.vectors


def _operator_of(a) -> SelfAdjointOperator:
    if isinstance(a, SelfAdjointOperator):
        return a
    return SelfAdjointOperator.from_tensor(a)


def apply(a, y) -> DenseTensor:
    """``Z[i] = sum_j A[i, j] Y[j]``."""
    a = _operator_of(a)
    y = y if isinstance(y, DenseTensor) else DenseTensor(y)
    if y.dims != a.domain_shape.dims:
        raise DimensionError(f"operand shape {y.dims} does not match domain {a.domain_shape.dims}")
    out = a.matrix @ y.flat
    return DenseTensor(out, a.domain_shape)


def is_self_adjoint(a, tol: Tolerances | None = None) -> tuple[bool, float]:
    """Return ``(symmetric, max_asymmetry)`` for an operator or paired tensor.

    ``symmetric`` is true when ``max |a(n, m) - a(m, n)|`` does not exceed
    ``sym_tol * max |a|``.
    """
    tol = resolve(tol)
    a = _operator_of(a)
    mat = a.matrix
    asym = float(np.max(np.abs(mat - mat.T)))
    scale = float(np.max(np.abs(mat)))
    return asym <= tol.sym_tol * scale, asym


def gram_operator(x, contracted: Sequence[int] | None = None,
                  tol: Tolerances | None = None) -> SelfAdjointOperator:
    """Nonnegative operator ``A[i, j] = X[k, i] X[k, j]``.

    For a :class:`TensorDataset` the contracted group is the sample axis,
    giving ``A[i, j] = sum_n X[i, n] X[j, n]``. For a plain tensor,
    ``contracted`` lists the 1-based modes forming ``k``; the remaining
    modes, in order, form ``i``.
    """
    if isinstance(x, TensorDataset):
        if contracted is not None:
            raise ArgumentError("a dataset is always contracted over its sample axis")
        L = x.sample_shape.size
        check_allocation(L * L, "Gram operator", tol)
        m = x.matrix
        return SelfAdjointOperator.from_matrix(m @ m.T, x.sample_shape)

    x = x if isinstance(x, DenseTensor) else DenseTensor(x)
    if contracted is None or len(contracted) == 0:
        raise ArgumentError("contracted mode group must be non-empty")
    contracted = [int(k) for k in contracted]
    if len(set(contracted)) != len(contracted) or not all(1 <= k <= x.order for k in contracted):
        raise ArgumentError(f"invalid contracted modes {contracted} for order {x.order}")
    free = [k for k in range(1, x.order + 1) if k not in contracted]
    if not free:
        raise ArgumentError("at least one mode must remain free")
    domain = Shape([x.dims[k - 1] for k in free])
    check_allocation(domain.size ** 2, "Gram operator", tol)
    out = contract(x, x, contracted, contracted, tol)
    return SelfAdjointOperator(domain, out)


def covariance_operator(x, center: bool = False, ddof: int = 0,
                        tol: Tolerances | None = None) -> SelfAdjointOperator:
    """Sample second-moment operator ``R[i, j] = mean_n X[i, n] X[j, n]``.

    Parameters
    ----------
    center : bool
        Subtract the mean sample first.
    ddof : int
        Normalize by ``N - ddof`` (``ddof=1`` gives the unbiased estimate).
    """
    x = _as_dataset(x)
    n = x.count
    if n - ddof < 1:
        raise ArgumentError(f"need more than {ddof} samples, got {n}")
    L = x.sample_shape.size
    check_allocation(L * L, "covariance operator", tol)
    m = x.matrix
    if center:
        m = m - m.mean(axis=1, keepdims=True)
    return SelfAdjointOperator.from_matrix((m @ m.T) / (n - ddof), x.sample_shape)


def rayleigh_quotient(a, v) -> float:
    """``<V, A V> / <V, V>``."""
    a = _operator_of(a)
    v = v if isinstance(v, DenseTensor) else DenseTensor(v)
    if v.dims != a.domain_shape.dims:
        raise DimensionError(f"probe shape {v.dims} does not match domain {a.domain_shape.dims}")
    vv = float(v.flat @ v.flat)
    if vv == 0.0:
        raise ArgumentError("the Rayleigh quotient is undefined for the zero tensor")
    return float(v.flat @ apply(a, v).flat) / vv


def eigentensor_basis(a, tol: Tolerances | None = None) -> TensorBasis:
    """Orthonormal eigentensor basis of a self-adjoint operator.

    1. tabulate the inverse linear-index map ``T``;
    2. gather ``a(n, m) = A[T(n), T(m)]``;
    3. solve the symmetric eigenproblem of ``a``;
    4. place each eigenvector back into a tensor, ``U[T(n)] = u(n)``.

    Raises
    ------
    CapacityError
        If ``L`` exceeds ``tol.eig_cap`` or the ``L x L`` matrix exceeds the
        memory cap.
    ContractViolation
        If the operator is not self-adjoint within ``sym_tol``.
    """
    tol = resolve(tol)
    a = _operator_of(a)
    shape = a.domain_shape
    L = shape.size
    need = 3 * L * L * 8
    if L > tol.eig_cap:
        raise CapacityError(
            f"domain size L={L} exceeds the eigensolver cap {tol.eig_cap}; "
            f"about {need / 2**20:.0f} MiB would be needed (raise eig_cap to override)",
            required_bytes=need,
        )
    check_allocation(3 * L * L, f"eigentensor basis with L={L}", tol)

    ok, asym = is_self_adjoint(a, tol)
    if not ok:
        raise ContractViolation(f"operator is not self-adjoint (max asymmetry {asym:.3e})")

    table = index_table(shape)
    idx = tuple(table.rows[:, k] - 1 for k in range(shape.order))
    rows = tuple(i[:, None] for i in idx)
    cols = tuple(j[None, :] for j in idx)
    mat = a.entries.array[rows + cols]

    eig = linalg.sym_eig(mat, tol)

    vectors = np.empty((L, L))
    for l in range(L):
        u = np.empty(shape.dims, order="F")
        u[idx] = eig.eigenvectors[:, l]
        vectors[:, l] = u.reshape(-1, order="F")
    return TensorBasis(shape, eig.eigenvalues, vectors, "selfadjoint", eig.sweeps)


def proposition1_residual(a, basis: TensorBasis) -> float:
    """Largest relative residual ``||A U_l - lambda_l U_l|| / ||A||_F``.

    ``A U_l`` is evaluated by tensor contraction, independently of the
    matrix route used to build the basis.
    """
    a = _operator_of(a)
    if basis.domain_shape.dims != a.domain_shape.dims:
        raise DimensionError(
            f"basis domain {basis.domain_shape.dims} does not match operator {a.domain_shape.dims}"
        )
    d = a.domain_shape.order
    scale = a.frobenius()
    worst = 0.0
    for l in range(len(basis)):
        u = basis.element(l + 1)
        au = contract(a.entries, u, list(range(d + 1, 2 * d + 1)), list(range(1, d + 1)))
        r = float(np.linalg.norm(au.flat - basis.eigenvalues[l] * u.flat))
        worst = max(worst, r)
    return worst / scale if scale > 0 else worst
