"""Image ingestion, spectrum CSV export and PNG image grids.

Images are decoded to ``H x W x 3`` arrays in ``[0, 1]`` (mode order row,
column, channel). Resizing is separable bilinear with half-pixel centers:
output pixel ``o`` samples source coordinate
``s = (o + 0.5) * n_in / n_out - 0.5`` clamped to ``[0, n_in - 1]`` and
interpolates between ``floor(s)`` and ``floor(s) + 1``.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from PIL import Image

from .config import Tolerances, check_allocation
from .errors import DimensionError, IngestionError
from .operators import TensorDataset
from .tensor_core import DenseTensor

__all__ = [
    "ImageManifest",
    "decode_image",
    "resize_bilinear",
    "load_dataset",
    "export_spectrum",
    "read_spectrum",
    "quantize",
    "grid_layout",
    "export_image_grid",
    "write_ppm",
]

SUFFIXES = (".png", ".ppm")


@dataclass(frozen=True)
class ImageManifest:
    root: Path
    files: tuple[Path, ...]
    height: int
    width: int
    channels: int = field(default=3)

    @classmethod
    def scan(cls, root, height: int, width: int) -> "ImageManifest":
        """All ``.png`` / ``.ppm`` files directly under ``root``, sorted by name."""
        root = Path(root)
        if not root.is_dir():
            raise IngestionError(f"{root}: not a directory")
        files = sorted(
            (p for p in root.iterdir() if p.is_file() and p.suffix.lower() in SUFFIXES),
            key=lambda p: p.name,
        )
        if not files:
            raise IngestionError(f"{root}: no PNG or PPM files found")
        return cls(root, tuple(files), int(height), int(width))


def _read_ppm(path: Path) -> np.ndarray:
    raw = path.read_bytes()
    if raw[:2] != b"P6":
        raise IngestionError(f"{path}: not a binary PPM (P6) file")
    tokens, pos = [], 2
    while len(tokens) < 3:
        while pos < len(raw) and raw[pos:pos + 1].isspace():
            pos += 1
        if raw[pos:pos + 1] == b"#":
            while pos < len(raw) and raw[pos:pos + 1] not in (b"\n", b"\r"):
                pos += 1
            continue
        start = pos
        while pos < len(raw) and not raw[pos:pos + 1].isspace():
            pos += 1
        if start == pos:
            raise IngestionError(f"{path}: truncated PPM header")
        tokens.append(raw[start:pos])
    pos += 1  # single whitespace byte before the raster
    try:
        width, height, maxval = (int(t) for t in tokens)
    except ValueError as exc:
        raise IngestionError(f"{path}: malformed PPM header") from exc
    if width < 1 or height < 1 or not 0 < maxval < 65536:
        raise IngestionError(f"{path}: invalid PPM header values {width}x{height} max {maxval}")
    dtype = np.dtype(">u2") if maxval > 255 else np.dtype("u1")
    need = width * height * 3 * dtype.itemsize
    body = raw[pos:pos + need]
    if len(body) < need:
        raise IngestionError(f"{path}: PPM raster truncated ({len(body)} of {need} bytes)")
    arr = np.frombuffer(body, dtype=dtype).reshape(height, width, 3)
    return arr.astype(np.float64) / maxval


def decode_image(path) -> np.ndarray:
    """Decode a PNG or binary PPM file into an ``H x W x 3`` array in ``[0, 1]``."""
    path = Path(path)
    if path.suffix.lower() == ".ppm":
        return _read_ppm(path)
    try:
        with Image.open(path) as img:
            if img.format != "PNG":
                raise IngestionError(f"{path}: expected PNG data, found {img.format}")
            if img.mode in ("I;16", "I;16B", "I"):
                arr = np.asarray(img, dtype=np.float64) / 65535.0
                return np.repeat(arr[:, :, None], 3, axis=2)
            rgb = img.convert("RGB")
            return np.asarray(rgb, dtype=np.float64) / 255.0
    except IngestionError:
        raise
    except (OSError, ValueError) as exc:
        raise IngestionError(f"{path}: cannot decode image ({exc})") from exc


def _bilinear_weights(n_in: int, n_out: int) -> np.ndarray:
    """``n_out x n_in`` interpolation matrix along one axis."""
    w = np.zeros((n_out, n_in))
    for o in range(n_out):
        s = (o + 0.5) * n_in / n_out - 0.5
        s = min(max(s, 0.0), n_in - 1.0)
        i0 = int(math.floor(s))
        i1 = min(i0 + 1, n_in - 1)
        frac = s - i0
        w[o, i0] += 1.0 - frac
        w[o, i1] += frac
    return w


def resize_bilinear(img: np.ndarray, height: int, width: int) -> np.ndarray:
    img = np.asarray(img, dtype=np.float64)
    if img.shape[:2] == (height, width):
        return img.copy()
    rows = _bilinear_weights(img.shape[0], height)
    cols = _bilinear_weights(img.shape[1], width)
    return np.einsum("ab,bcz,dc->adz", rows, img, cols)


def load_dataset(manifest: ImageManifest, tol: Tolerances | None = None) -> TensorDataset:
    """Decode, resize and stack the manifest's images into ``H x W x 3 x N``."""
    n = len(manifest.files)
    check_allocation(manifest.height * manifest.width * manifest.channels * n,
                     "image dataset", tol)
    out = np.empty((manifest.height, manifest.width, manifest.channels, n), order="F")
    for k, path in enumerate(manifest.files):
        img = decode_image(path)
        out[..., k] = resize_bilinear(img, manifest.height, manifest.width)
    return TensorDataset(DenseTensor(out))


def export_spectrum(spectrum, path) -> None:
    """Write ``index,value`` rows (1-based index, 17 significant digits)."""
    path = Path(path)
    values = np.asarray(spectrum, dtype=np.float64).ravel()
    try:
        with path.open("w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["index", "value"])
            for k, v in enumerate(values, start=1):
                w.writerow([k, f"{v:.17g}"])
    except OSError as exc:
        raise OSError(f"cannot write spectrum to {path}: {exc}") from exc


def read_spectrum(path) -> np.ndarray:
    with Path(path).open(newline="") as fh:
        rows = list(csv.reader(fh))
    return np.array([float(r[1]) for r in rows[1:] if r], dtype=np.float64)


def quantize(arr) -> np.ndarray:
    """Clamp to ``[0, 1]`` and round half away from zero to 8 bits."""
    arr = np.clip(np.asarray(arr, dtype=np.float64), 0.0, 1.0)
    return np.floor(arr * 255.0 + 0.5).astype(np.uint8)


def grid_layout(n: int) -> tuple[int, int]:
    """``rows = ceil(sqrt(n))``, ``cols = ceil(n / rows)``."""
    if n < 1:
        raise DimensionError("an image grid needs at least one tile")
    rows = math.ceil(math.sqrt(n))
    return rows, math.ceil(n / rows)


def _tiles(images) -> list[np.ndarray]:
    if isinstance(images, TensorDataset):
        arr = images.samples.array
        return [arr[..., k] for k in range(arr.shape[-1])]
    return [np.asarray(t, dtype=np.float64) for t in images]


def export_image_grid(images, path) -> np.ndarray:
    """Tile ``H x W x 3`` images row-major into one PNG; returns the 8-bit grid."""
    tiles = _tiles(images)
    if not tiles:
        raise DimensionError("an image grid needs at least one tile")
    h, w = tiles[0].shape[:2]
    for t in tiles:
        if t.ndim != 3 or t.shape != (h, w, 3):
            raise DimensionError(f"expected {h}x{w}x3 image tiles, got shape {t.shape}")
    rows, cols = grid_layout(len(tiles))
    grid = np.zeros((rows * h, cols * w, 3), dtype=np.uint8)
    for k, t in enumerate(tiles):
        r, c = divmod(k, cols)
        grid[r * h:(r + 1) * h, c * w:(c + 1) * w] = quantize(t)
    Image.fromarray(grid).save(Path(path), format="PNG")
    return grid


def write_ppm(path, img: np.ndarray) -> None:
    """Write an ``H x W x 3`` array in ``[0, 1]`` as an 8-bit binary PPM."""
    q = quantize(img)
    header = f"P6\n{q.shape[1]} {q.shape[0]}\n255\n".encode()
    Path(path).write_bytes(header + q.tobytes())
