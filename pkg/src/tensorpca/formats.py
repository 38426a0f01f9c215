"""Little-endian binary containers for tensors, bases and models.

Every file starts with a 4-byte magic. Matrices are written column by
column and tensors in linear-index order, both as ``<f8``.

=====  ==============================================================
TPT1   u32 d, d x u64 dims, L x f64 entries
TPB1   u32 d, d x u64 dims, u64 r, r x f64 eigenvalues, r x L entries
TPR1   u32 d, d x u64 dims, d factor matrices (I_k^2 f64 each),
       d spectra (I_k f64 each)
TPC1   u64 N, u64 L, u64 r, D (N x L), Y (N x r), s (r), Z (L x r)
TPS1   u32 d, d x u64 dims, u64 N, u64 r, s (r), b (N x r), Q (L x r)
TPM1   u32 method, u32 d, d x u64 dims, u64 N, u64 M, u64 T,
       spectrum (M), tail (T), sample energy (N), coefficients (N x M),
       components (L x M)
=====  ==============================================================
"""

from __future__ import annotations

import struct
from math import prod
from pathlib import Path

import numpy as np

from .errors import FormatError
from .linalg import Svd
from .operators import TensorBasis
from .pca import METHODS, SubspaceModel
from .rank1 import CoefficientSvd, Rank1Basis
from .subspace import SubspaceBasis
from .tensor_core import DenseTensor, Shape

__all__ = [
    "save_tensor",
    "load_tensor",
    "save_basis",
    "load_basis",
    "save_rank1",
    "load_rank1",
    "save_coefficients",
    "load_coefficients",
    "save_subspace",
    "load_subspace",
    "save_model",
    "load_model",
    "describe",
]

MAGICS = {
    b"TPT1": "tensor",
    b"TPB1": "selfadjoint basis",
    b"TPR1": "rank-1 basis",
    b"TPC1": "rank-1 coefficients",
    b"TPS1": "subspace basis",
    b"TPM1": "truncated model",
}


class _Writer:
    def __init__(self, magic: bytes):
        self.parts = [magic]

    def u32(self, v):
        self.parts.append(struct.pack("<I", int(v)))

    def u64(self, v):
        self.parts.append(struct.pack("<Q", int(v)))

    def dims(self, dims):
        self.u32(len(dims))
        for k in dims:
            self.u64(k)

    def floats(self, arr):
        arr = np.asarray(arr, dtype=np.float64)
        self.parts.append(arr.reshape(-1, order="F").astype("<f8").tobytes())

    def write(self, path):
        Path(path).write_bytes(b"".join(self.parts))


class _Reader:
    def __init__(self, path, magic: bytes):
        self.path = Path(path)
        self.buf = self.path.read_bytes()
        self.pos = 0
        got = self.take(4)
        if got != magic:
            raise FormatError(f"{self.path}: bad magic {got!r}, expected {magic!r}", 0)

    def take(self, n: int) -> bytes:
        if self.pos + n > len(self.buf):
            raise FormatError(
                f"{self.path}: truncated payload, needed {n} bytes, "
                f"{len(self.buf) - self.pos} available",
                self.pos,
            )
        out = self.buf[self.pos:self.pos + n]
        self.pos += n
        return out

    def u32(self) -> int:
        return struct.unpack("<I", self.take(4))[0]

    def u64(self) -> int:
        return struct.unpack("<Q", self.take(8))[0]

    def dims(self) -> tuple[int, ...]:
        d = self.u32()
        dims = tuple(self.u64() for _ in range(d))
        if any(k < 1 for k in dims):
            raise FormatError(f"{self.path}: zero extent in dims {dims}", self.pos)
        return dims

    def floats(self, count: int, shape=None) -> np.ndarray:
        start = self.pos
        if count * 8 > len(self.buf) - self.pos:
            # checked before allocating so a corrupt header cannot request huge memory
            self.take(count * 8)
        arr = np.frombuffer(self.take(count * 8), dtype="<f8").astype(np.float64)
        bad = np.flatnonzero(~np.isfinite(arr))
        if bad.size:
            raise FormatError(f"{self.path}: non-finite entry", start + 8 * int(bad[0]))
        if shape is not None:
            arr = arr.reshape(shape, order="F")
        return arr

    def finish(self):
        if self.pos != len(self.buf):
            raise FormatError(f"{self.path}: {len(self.buf) - self.pos} trailing bytes", self.pos)


def save_tensor(path, t: DenseTensor) -> None:
    w = _Writer(b"TPT1")
    w.dims(t.dims)
    w.floats(t.flat)
    w.write(path)


def load_tensor(path) -> DenseTensor:
    r = _Reader(path, b"TPT1")
    dims = r.dims()
    data = r.floats(prod(dims))
    r.finish()
    return DenseTensor(data, dims)


def save_basis(path, basis: TensorBasis) -> None:
    w = _Writer(b"TPB1")
    w.dims(basis.domain_shape.dims)
    w.u64(len(basis))
    w.floats(basis.eigenvalues)
    w.floats(basis.vectors)
    w.write(path)


def load_basis(path) -> TensorBasis:
    r = _Reader(path, b"TPB1")
    shape = Shape(r.dims())
    count = r.u64()
    lam = r.floats(count)
    vectors = r.floats(shape.size * count, (shape.size, count))
    r.finish()
    return TensorBasis(shape, lam, vectors)


def save_rank1(path, b: Rank1Basis) -> None:
    w = _Writer(b"TPR1")
    w.dims(b.sample_shape.dims)
    for u in b.factors:
        w.floats(u)
    for s in b.mode_spectra:
        w.floats(s)
    w.write(path)


def load_rank1(path) -> Rank1Basis:
    r = _Reader(path, b"TPR1")
    dims = r.dims()
    factors = tuple(r.floats(k * k, (k, k)) for k in dims)
    spectra = tuple(r.floats(k) for k in dims)
    r.finish()
    return Rank1Basis(Shape(dims), factors, spectra)


def save_coefficients(path, c: CoefficientSvd) -> None:
    n, L = c.D.shape
    w = _Writer(b"TPC1")
    w.u64(n)
    w.u64(L)
    w.u64(c.rank)
    w.floats(c.D)
    w.floats(c.svd.U)
    w.floats(c.svd.singular_values)
    w.floats(c.svd.V)
    w.write(path)


def load_coefficients(path) -> CoefficientSvd:
    r = _Reader(path, b"TPC1")
    n, L, rank = r.u64(), r.u64(), r.u64()
    D = r.floats(n * L, (n, L))
    U = r.floats(n * rank, (n, rank))
    s = r.floats(rank)
    V = r.floats(L * rank, (L, rank))
    r.finish()
    return CoefficientSvd(np.ascontiguousarray(D), Svd(U, s, V))


def save_subspace(path, b: SubspaceBasis) -> None:
    w = _Writer(b"TPS1")
    w.dims(b.domain_shape.dims)
    w.u64(b.count)
    w.u64(b.rank)
    w.floats(b.spectrum)
    w.floats(b.mixing)
    w.floats(b.q)
    w.write(path)


def load_subspace(path) -> SubspaceBasis:
    r = _Reader(path, b"TPS1")
    shape = Shape(r.dims())
    n, rank = r.u64(), r.u64()
    s = r.floats(rank)
    b = r.floats(n * rank, (n, rank))
    q = r.floats(shape.size * rank, (shape.size, rank))
    r.finish()
    return SubspaceBasis(shape, q, b, s)


def save_model(path, model: SubspaceModel) -> None:
    w = _Writer(b"TPM1")
    w.u32(METHODS.index(model.method))
    w.dims(model.domain_shape.dims)
    w.u64(model.count)
    w.u64(model.retained)
    w.u64(model.tail.shape[0])
    w.floats(model.spectrum)
    w.floats(model.tail)
    w.floats(model.sample_energy)
    w.floats(model.coefficients)
    w.floats(model.components)
    w.write(path)


def load_model(path) -> SubspaceModel:
    r = _Reader(path, b"TPM1")
    code = r.u32()
    if code >= len(METHODS):
        raise FormatError(f"{r.path}: unknown method code {code}", 4)
    shape = Shape(r.dims())
    n, M, T = r.u64(), r.u64(), r.u64()
    spectrum = r.floats(M)
    tail = r.floats(T)
    energy = r.floats(n)
    coeffs = r.floats(n * M, (n, M))
    comps = r.floats(shape.size * M, (shape.size, M))
    r.finish()
    return SubspaceModel.build(METHODS[code], shape, spectrum, tail, coeffs, comps, energy)


def describe(path) -> dict:
    """Header summary of any supported file, without reading the payload."""
    path = Path(path)
    with path.open("rb") as fh:
        head = fh.read(4096)
    magic = head[:4]
    if magic not in MAGICS:
        raise FormatError(f"{path}: unrecognized magic {magic!r}", 0)
    info = {"path": str(path), "format": magic.decode(), "kind": MAGICS[magic],
            "bytes": path.stat().st_size}
    pos = 4
    if magic == b"TPC1":
        info["N"], info["L"], info["rank"] = struct.unpack_from("<QQQ", head, pos)
        return info
    if magic == b"TPM1":
        info["method"] = METHODS[struct.unpack_from("<I", head, pos)[0]]
        pos += 4
    (d,) = struct.unpack_from("<I", head, pos)
    pos += 4
    dims = struct.unpack_from(f"<{d}Q", head, pos)
    pos += 8 * d
    info["dims"] = list(dims)
    info["L"] = prod(dims)
    if magic == b"TPB1":
        info["count"] = struct.unpack_from("<Q", head, pos)[0]
    elif magic == b"TPS1":
        info["N"], info["rank"] = struct.unpack_from("<QQ", head, pos)
    elif magic == b"TPM1":
        info["N"], info["M"] = struct.unpack_from("<QQ", head, pos)
    return info
