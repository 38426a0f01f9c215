import numpy as np
import pytest
from PIL import Image

from oracles import bilinear_pixel
from tensorpca.errors import DimensionError, IngestionError
from tensorpca.io import (
    ImageManifest,
    decode_image,
    export_image_grid,
    export_spectrum,
    grid_layout,
    load_dataset,
    quantize,
    read_spectrum,
    resize_bilinear,
    write_ppm,
)


def _save_png(path, arr):
    Image.fromarray(arr.astype(np.uint8)).save(path)


def test_png_and_ppm_decode(tmp_path, rng):
    px = rng.integers(0, 256, size=(4, 5, 3))
    _save_png(tmp_path / "a.png", px)
    np.testing.assert_array_equal(decode_image(tmp_path / "a.png"), px / 255.0)
    write_ppm(tmp_path / "b.ppm", px / 255.0)
    np.testing.assert_array_equal(decode_image(tmp_path / "b.ppm"), px / 255.0)


def test_ppm_with_comment_and_16bit(tmp_path):
    body = np.array([[[0, 32768, 65535]]], dtype=">u2")
    (tmp_path / "c.ppm").write_bytes(b"P6\n# hello\n1 1\n65535\n" + body.tobytes())
    np.testing.assert_allclose(decode_image(tmp_path / "c.ppm")[0, 0], [0, 32768 / 65535, 1])


def test_grayscale_png_expands(tmp_path):
    Image.fromarray(np.full((2, 2), 51, dtype=np.uint8), mode="L").save(tmp_path / "g.png")
    np.testing.assert_allclose(decode_image(tmp_path / "g.png"), np.full((2, 2, 3), 0.2))


def test_decode_errors(tmp_path):
    (tmp_path / "bad.png").write_bytes(b"not an image")
    with pytest.raises(IngestionError):
        decode_image(tmp_path / "bad.png")
    (tmp_path / "bad.ppm").write_bytes(b"P6\n4 4\n255\n\0\0")
    with pytest.raises(IngestionError, match="truncated"):
        decode_image(tmp_path / "bad.ppm")
    with pytest.raises(IngestionError):
        ImageManifest.scan(tmp_path / "missing", 2, 2)


@pytest.mark.parametrize("src, dst", [((7, 5), (4, 4)), ((3, 3), (8, 6)), ((16, 16), (16, 16))])
def test_bilinear_matches_pixel_oracle(rng, src, dst):
    img = rng.random(src + (3,))
    out = resize_bilinear(img, *dst)
    assert out.shape == dst + (3,)
    for r in range(dst[0]):
        for c in range(dst[1]):
            for ch in range(3):
                assert out[r, c, ch] == pytest.approx(bilinear_pixel(img, *dst, r, c, ch), abs=1e-14)


def test_bilinear_preserves_constant():
    out = resize_bilinear(np.full((9, 7, 3), 0.4), 4, 5)
    np.testing.assert_allclose(out, 0.4, atol=1e-15)


def test_load_dataset_sorted(tmp_path):
    for name, v in [("b.png", 200), ("a.png", 100), ("skip.txt", 0)]:
        if name.endswith(".png"):
            _save_png(tmp_path / name, np.full((6, 6, 3), v))
        else:
            (tmp_path / name).write_text("x")
    m = ImageManifest.scan(tmp_path, 3, 3)
    assert [p.name for p in m.files] == ["a.png", "b.png"]
    x = load_dataset(m)
    assert x.samples.dims == (3, 3, 3, 2)
    assert x.sample(1)[1, 1, 1] == pytest.approx(100 / 255)


def test_spectrum_csv_roundtrip(tmp_path):
    vals = np.array([3.0, 1.0 / 3.0, 0.0])
    export_spectrum(vals, tmp_path / "s.csv")
    assert (tmp_path / "s.csv").read_text().splitlines()[0] == "index,value"
    np.testing.assert_array_equal(read_spectrum(tmp_path / "s.csv"), vals)


def test_quantize_and_layout():
    np.testing.assert_array_equal(quantize([-1.0, 0.0, 0.5 / 255, 1.0, 2.0]), [0, 0, 1, 255, 255])
    assert grid_layout(1) == (1, 1)
    assert grid_layout(10) == (4, 3)
    assert grid_layout(16) == (4, 4)
    with pytest.raises(DimensionError):
        grid_layout(0)


def test_image_grid(tmp_path, rng):
    tiles = [rng.random((2, 3, 3)) for _ in range(5)]
    grid = export_image_grid(tiles, tmp_path / "g.png")
    assert grid.shape == (3 * 2, 2 * 3, 3)
    np.testing.assert_array_equal(grid[2:4, 3:6], quantize(tiles[3]))
    np.testing.assert_array_equal(np.asarray(Image.open(tmp_path / "g.png")), grid)
    with pytest.raises(DimensionError):
        export_image_grid([np.zeros((2, 2, 3)), np.zeros((3, 3, 3))], tmp_path / "h.png")
