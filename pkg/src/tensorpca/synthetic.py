"""Seeded synthetic data for tests, the ``verify`` battery and CLI smoke runs.

All generators draw from ``numpy.random.default_rng(seed)`` (PCG64), so a
seed fixes the output bit for bit.
"""

from __future__ import annotations

import numpy as np

from .errors import ArgumentError
from .operators import SelfAdjointOperator, TensorDataset
from .tensor_core import Shape

__all__ = [
    "random_dataset",
    "planted_dataset",
    "random_self_adjoint",
    "orthonormal_columns",
    "smooth_images",
    "parse_synthetic",
    "synthetic_dataset",
]


def orthonormal_columns(rng: np.random.Generator, n: int, k: int) -> np.ndarray:
    q, r = np.linalg.qr(rng.standard_normal((n, k)))
    return q * np.sign(np.diag(r))


def random_dataset(shape, count: int, seed: int = 0) -> TensorDataset:
    shape = Shape.of(shape)
    rng = np.random.default_rng(seed)
    return TensorDataset(rng.standard_normal(shape.dims + (int(count),)))


def planted_dataset(shape, count: int, rank: int, seed: int = 0,
                    decay: float = 0.7) -> TensorDataset:
    """``count`` samples spanning exactly a ``rank``-dimensional subspace.

    Component ``l`` is scaled by ``decay**l`` so the spectrum is well
    separated.
    """
    shape = Shape.of(shape)
    if not 1 <= rank <= min(count, shape.size):
        raise ArgumentError(f"rank {rank} incompatible with {count} samples of size {shape.size}")
    rng = np.random.default_rng(seed)
    basis = orthonormal_columns(rng, shape.size, rank)
    mix = orthonormal_columns(rng, count, rank)
    scales = 3.0 * decay ** np.arange(rank)
    return TensorDataset.from_matrix(basis @ (scales[:, None] * mix.T), shape)


def random_self_adjoint(shape, seed: int = 0) -> SelfAdjointOperator:
    shape = Shape.of(shape)
    rng = np.random.default_rng(seed)
    g = rng.standard_normal((shape.size, shape.size))
    return SelfAdjointOperator.from_matrix(0.5 * (g + g.T), shape)


def smooth_images(count: int, height: int, width: int, seed: int = 0,
                  terms: int = 4) -> np.ndarray:
    """``height x width x 3 x count`` images in ``[0, 1]`` made of a few
    low-frequency cosine patterns per channel."""
    rng = np.random.default_rng(seed)
    yy, xx = np.meshgrid(np.linspace(0.0, 1.0, height), np.linspace(0.0, 1.0, width),
                         indexing="ij")
    out = np.empty((height, width, 3, count))
    for n in range(count):
        for c in range(3):
            img = np.full((height, width), rng.uniform(0.3, 0.7))
            for _ in range(terms):
                fy, fx = rng.integers(0, 4, size=2)
                phase = rng.uniform(0.0, 2.0 * np.pi)
                amp = rng.uniform(0.02, 0.12)
                img += amp * np.cos(np.pi * (fy * yy + fx * xx) + phase)
            out[:, :, c, n] = img
    return np.clip(out, 0.0, 1.0)


def parse_synthetic(text: str) -> dict:
    """Parse ``"rank=3,shape=8x8x3,n=20,seed=1"``; unspecified keys get defaults."""
    opts = {"rank": None, "shape": (8, 8, 3), "n": 20, "seed": 0, "kind": None}
    for part in filter(None, (p.strip() for p in text.split(","))):
        if "=" not in part:
            raise ArgumentError(f"synthetic option '{part}' is not key=value")
        key, value = (s.strip() for s in part.split("=", 1))
        if key == "shape":
            opts["shape"] = tuple(int(k) for k in value.lower().split("x"))
        elif key in ("rank", "n", "seed"):
            opts[key] = int(value)
        elif key == "kind":
            opts["kind"] = value
        else:
            raise ArgumentError(f"unknown synthetic option '{key}'")
    if opts["kind"] is None:
        opts["kind"] = "planted" if opts["rank"] is not None else "random"
    if opts["kind"] not in ("planted", "random", "images"):
        raise ArgumentError(f"unknown synthetic kind '{opts['kind']}'")
    return opts


def synthetic_dataset(text: str) -> TensorDataset:
    opts = parse_synthetic(text)
    if opts["kind"] == "planted":
        return planted_dataset(opts["shape"], opts["n"], opts["rank"], opts["seed"])
    if opts["kind"] == "images":
        h, w = opts["shape"][:2]
        return TensorDataset(smooth_images(opts["n"], h, w, opts["seed"]))
    return random_dataset(opts["shape"], opts["n"], opts["seed"])
