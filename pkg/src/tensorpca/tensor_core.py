"""Dense order-d tensors stored in linear-index order.

Entries are laid out by the linear index

    m = i_1 + (i_2 - 1) I_1 + ... + (i_d - 1) I_1 ... I_{d-1}

so mode 1 varies fastest (Fortran / column-major order). Multi-indices
are 1-based at the API boundary.
"""

from __future__ import annotations

from dataclasses import dataclass
from math import prod
from typing import Iterable, Sequence

import numpy as np

from .config import Tolerances, check_allocation
from .errors import ArgumentError, ContractViolation, DimensionError, TensorIndexError

__all__ = [
    "Shape",
    "DenseTensor",
    "IndexTable",
    "linear_index",
    "inverse_linear_index",
    "index_table",
    "contract",
    "inner",
    "norm",
    "outer",
    "canonical_basis",
    "flatten",
    "unflatten",
]

_INDEX_LIMIT = np.iinfo(np.int64).max


@dataclass(frozen=True)
class Shape:
    """Mode extents ``(I_1, ..., I_d)``.

    An empty ``dims`` tuple is the shape of an order-0 (scalar) tensor.
    """

    dims: tuple[int, ...]

    def __init__(self, dims: Iterable[int]):
        dims = tuple(int(k) for k in dims)
        if any(k < 1 for k in dims):
            raise DimensionError(f"every extent must be >= 1, got {dims}")
        if prod(dims) > _INDEX_LIMIT:
            raise DimensionError(f"total size of {dims} overflows a 64-bit index")
        object.__setattr__(self, "dims", dims)

    @classmethod
    def of(cls, value) -> "Shape":
        if isinstance(value, Shape):
            return value
        if isinstance(value, (int, np.integer)):
            return cls((value,))
        return cls(value)

    @property
    def order(self) -> int:
        return len(self.dims)

    @property
    def size(self) -> int:
        return prod(self.dims)

    @property
    def strides(self) -> tuple[int, ...]:
        """Linear-index weight of each mode: ``(1, I_1, I_1 I_2, ...)``."""
        out, acc = [], 1
        for k in self.dims:
            out.append(acc)
            acc *= k
        return tuple(out)

    def __iter__(self):
        return iter(self.dims)

    def __len__(self):
        return len(self.dims)

    def __getitem__(self, k):
        return self.dims[k]

    def __str__(self):
        return "x".join(str(k) for k in self.dims) if self.dims else "scalar"


class DenseTensor:
    """Immutable real tensor of order ``d >= 0`` with 64-bit entries.

    Parameters
    ----------
    data : array_like
        Either an array with ``ndim == d`` or, when ``shape`` is given, a
        flat sequence of ``prod(shape)`` entries in linear-index order.
    shape : Shape or sequence of int, optional
    """

    __array_priority__ = 1

    def __init__(self, data, shape=None):
        arr = np.asarray(data, dtype=np.float64)
        if shape is not None:
            shape = Shape.of(shape)
            if arr.size != shape.size:
                raise DimensionError(
                    f"{arr.size} entries cannot fill a tensor of shape {shape.dims}"
                )
            arr = arr.reshape(shape.dims, order="F")
        if not np.all(np.isfinite(arr)):
            raise ContractViolation("tensor entries must be finite")
        arr = np.array(arr, order="F", copy=True)
        arr.flags.writeable = False
        self._array = arr
        self._shape = Shape(arr.shape)

    @classmethod
    def zeros(cls, shape) -> "DenseTensor":
        return cls(np.zeros(Shape.of(shape).dims))

    @classmethod
    def ones(cls, shape) -> "DenseTensor":
        return cls(np.ones(Shape.of(shape).dims))

    @classmethod
    def scalar(cls, value: float) -> "DenseTensor":
        return cls(np.array(float(value)))

    @property
    def shape(self) -> Shape:
        return self._shape

    @property
    def dims(self) -> tuple[int, ...]:
        return self._shape.dims

    @property
    def order(self) -> int:
        return self._shape.order

    @property
    def size(self) -> int:
        return self._shape.size

    @property
    def array(self) -> np.ndarray:
        """Read-only view with ``ndim == order``."""
        return self._array

    @property
    def flat(self) -> np.ndarray:
        """Read-only 1-D view of the entries in linear-index order."""
        return self._array.reshape(-1, order="F")

    def item(self) -> float:
        if self.size != 1:
            raise DimensionError(f"tensor of shape {self.dims} is not a scalar")
        return float(self._array.reshape(-1)[0])

    def __getitem__(self, index) -> float:
        if not isinstance(index, tuple):
            index = (index,)
        m = linear_index(index, self._shape)
        return float(self.flat[m - 1])

    def __array__(self, dtype=None, copy=None):
        if dtype is None:
            return self._array
        return self._array.astype(dtype)

    def __add__(self, other):
        _require_same_shape(self, other)
        return DenseTensor(self._array + other._array)

    def __sub__(self, other):
        _require_same_shape(self, other)
        return DenseTensor(self._array - other._array)

    def __neg__(self):
        return DenseTensor(-self._array)

    def __mul__(self, scalar):
        if isinstance(scalar, DenseTensor):
            return NotImplemented
        return DenseTensor(self._array * float(scalar))

    __rmul__ = __mul__

    def __truediv__(self, scalar):
        return DenseTensor(self._array / float(scalar))

    def __repr__(self):
        return f"DenseTensor(shape={self.dims})"


def _require_same_shape(x: DenseTensor, y: DenseTensor) -> None:
    if not isinstance(y, DenseTensor):
        raise TypeError(f"expected DenseTensor, got {type(y).__name__}")
    if x.dims != y.dims:
        raise DimensionError(f"shape mismatch: {x.dims} vs {y.dims}")


def _as_tensor(x) -> DenseTensor:
    return x if isinstance(x, DenseTensor) else DenseTensor(x)


@dataclass(frozen=True)
class IndexTable:
    """Row ``m - 1`` of ``rows`` holds the 1-based multi-index of linear slot ``m``."""

    shape: Shape
    rows: np.ndarray

    def __len__(self):
        return self.rows.shape[0]

    def __getitem__(self, m: int) -> tuple[int, ...]:
        if not 1 <= m <= len(self):
            raise TensorIndexError(f"row {m} outside 1..{len(self)}")
        return tuple(int(k) for k in self.rows[m - 1])


def linear_index(index: Sequence[int], shape) -> int:
    """Map a 1-based multi-index to its 1-based linear position."""
    shape = Shape.of(shape)
    index = tuple(index)
    if len(index) != shape.order:
        raise TensorIndexError(
            f"multi-index {index} has {len(index)} components, shape has order {shape.order}"
        )
    m = 1
    for mode, (i, extent, stride) in enumerate(zip(index, shape.dims, shape.strides), start=1):
        if not 1 <= i <= extent:
            raise TensorIndexError(f"index {i} out of range 1..{extent} in mode {mode}")
        m += (int(i) - 1) * stride
    return m


def inverse_linear_index(m: int, shape) -> tuple[int, ...]:
    """Inverse of :func:`linear_index` by successive division."""
    shape = Shape.of(shape)
    m = int(m)
    if not 1 <= m <= shape.size:
        raise TensorIndexError(f"linear index {m} out of range 1..{shape.size}")
    rest = m - 1
    out = []
    for extent in shape.dims:
        rest, r = divmod(rest, extent)
        out.append(r + 1)
    return tuple(out)


def index_table(shape) -> IndexTable:
    shape = Shape.of(shape)
    L = shape.size
    rows = np.empty((L, shape.order), dtype=np.int64)
    rest = np.arange(L, dtype=np.int64)
    for k, extent in enumerate(shape.dims):
        rows[:, k] = rest % extent + 1
        rest //= extent
    return IndexTable(shape, rows)


def _check_modes(modes, order: int, label: str) -> list[int]:
    modes = [int(k) for k in modes]
    if len(set(modes)) != len(modes):
        raise ArgumentError(f"duplicate mode id in {label}: {modes}")
    for k in modes:
        if not 1 <= k <= order:
            raise ArgumentError(f"mode {k} in {label} outside 1..{order}")
    return modes


def contract(x, y, modes_x: Sequence[int], modes_y: Sequence[int],
             tol: Tolerances | None = None) -> DenseTensor:
    """Sum over paired modes of ``x`` and ``y``.

    Free modes of ``x`` (in order) come first in the result, then the free
    modes of ``y``. Mode ids are 1-based.
    """
    x, y = _as_tensor(x), _as_tensor(y)
    if len(modes_x) != len(modes_y):
        raise DimensionError(
            f"contracted mode lists differ in length: {len(modes_x)} vs {len(modes_y)}"
        )
    mx = _check_modes(modes_x, x.order, "modes_x")
    my = _check_modes(modes_y, y.order, "modes_y")
    for a, b in zip(mx, my):
        if x.dims[a - 1] != y.dims[b - 1]:
            raise DimensionError(
                f"extent mismatch: mode {a} of x has {x.dims[a - 1]}, "
                f"mode {b} of y has {y.dims[b - 1]}"
            )
    free = [x.dims[k] for k in range(x.order) if k + 1 not in mx]
    free += [y.dims[k] for k in range(y.order) if k + 1 not in my]
    check_allocation(prod(free), "contraction result", tol)
    out = np.tensordot(x.array, y.array, axes=([k - 1 for k in mx], [k - 1 for k in my]))
    return DenseTensor(out)


def inner(x, y) -> float:
    x, y = _as_tensor(x), _as_tensor(y)
    _require_same_shape(x, y)
    return float(np.dot(x.flat, y.flat))


def norm(x) -> float:
    x = _as_tensor(x)
    return float(np.sqrt(inner(x, x)))


def outer(x, y, tol: Tolerances | None = None) -> DenseTensor:
    """``Z[i, j] = x[i] * y[j]``; an order-0 operand scales the other."""
    x, y = _as_tensor(x), _as_tensor(y)
    check_allocation(x.size * y.size, "outer product", tol)
    return DenseTensor(np.multiply.outer(x.array, y.array))


def canonical_basis(shape, tol: Tolerances | None = None) -> list[DenseTensor]:
    """The ``L`` indicator tensors, element ``m - 1`` being one at slot ``m``."""
    shape = Shape.of(shape)
    L = shape.size
    check_allocation(L * L, f"canonical basis of shape {shape.dims}", tol)
    out = []
    for m in range(L):
        e = np.zeros(L)
        e[m] = 1.0
        out.append(DenseTensor(e, shape))
    return out


def flatten(x, q: int) -> DenseTensor:
    """Group the last ``q`` modes into one linear index.

    The leading ``d - q`` modes are grouped into a row index the same way,
    so the result is a matrix, or a vector when ``q == d``. Because the
    storage order is the linear-index order this is a pure relabeling.
    """
    x = _as_tensor(x)
    if not 0 < q <= x.order:
        raise ArgumentError(f"split {q} must satisfy 0 < q <= {x.order}")
    lead = prod(x.dims[: x.order - q])
    trail = prod(x.dims[x.order - q:])
    if q == x.order:
        return DenseTensor(x.flat)
    return DenseTensor(x.array.reshape((lead, trail), order="F"))


def unflatten(y, shape) -> DenseTensor:
    """Inverse of :func:`flatten`: reshape back to ``shape`` in linear-index order."""
    y = _as_tensor(y)
    shape = Shape.of(shape)
    if y.size != shape.size:
        raise DimensionError(f"cannot unflatten {y.size} entries into shape {shape.dims}")
    return DenseTensor(y.flat, shape)
