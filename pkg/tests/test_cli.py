import numpy as np
import pytest
from PIL import Image

from tensorpca import formats
from tensorpca.cli import main, read_config
from tensorpca.io import read_spectrum
from tensorpca.synthetic import smooth_images


def run(argv):
    lines = []
    code = main([str(a) for a in argv], out=lines.append)
    return code, lines


@pytest.fixture
def image_dir(tmp_path):
    d = tmp_path / "imgs"
    d.mkdir()
    imgs = smooth_images(10, 12, 10, seed=4)
    for k in range(imgs.shape[-1]):
        px = np.floor(imgs[..., k] * 255 + 0.5).astype(np.uint8)
        Image.fromarray(px).save(d / f"img{k:03d}.png")
    return d


def test_basis_subspace_smoke(tmp_path, image_dir):
    out = tmp_path / "run"
    code, lines = run(["basis", "--method", "subspace", "--in", image_dir, "--size", "6x6",
                       "--out", out])
    assert code == 0
    assert "L=108 N=10 r=10" in lines[-1]
    assert formats.describe(out / "basis.tps")["format"] == "TPS1"
    assert read_spectrum(out / "spectrum.csv").shape == (10,)


def test_planted_spectrum_has_three_dominant_values(tmp_path):
    out = tmp_path / "run"
    code, _ = run(["basis", "--method", "subspace", "--synthetic",
                   "rank=3,shape=6x5x2,n=8,seed=2", "--out", out])
    assert code == 0
    s = read_spectrum(out / "spectrum.csv")
    assert s.shape == (3,)
    code, _ = run(["basis", "--method", "rank1", "--synthetic",
                   "rank=3,shape=6x5x2,n=8,seed=2", "--out", tmp_path / "r1"])
    s = read_spectrum(tmp_path / "r1" / "spectrum.csv")
    assert np.all(s[:3] > 1e-3 * s[0]) and s.shape == (3,)


def test_selfadjoint_cap_exit_3(tmp_path, capsys):
    code, _ = run(["basis", "--method", "selfadjoint", "--synthetic", "shape=8x8x3,n=4",
                   "--tol", "eig_cap=100", "--out", tmp_path / "r"])
    assert code == 3
    assert "eig_cap" in capsys.readouterr().err


@pytest.mark.parametrize("method", ["selfadjoint", "rank1", "subspace"])
def test_pca_pipeline(tmp_path, image_dir, method):
    out = tmp_path / method
    assert run(["basis", "--method", method, "--in", image_dir, "--size", "4x4",
                "--center", "--out", out])[0] == 0
    assert (out / "mean.tpt").exists()
    code, lines = run(["pca", "--run", out, "--sweep", "1:r"])
    assert code == 0
    rel = float(lines[0].split("relative_error=")[1].split()[0])
    assert rel <= 1e-9
    rows = (out / "sweep.csv").read_text().splitlines()[1:]
    errs = [float(r.split(",")[1]) for r in rows]
    gaps = [float(r.split(",")[3]) for r in rows]
    assert all(a >= b - 1e-12 for a, b in zip(errs, errs[1:]))
    assert max(gaps) <= 1e-8
    orig = np.asarray(Image.open(out / "original.png"), dtype=int)
    full = np.asarray(Image.open(out / "full.png"), dtype=int)
    assert np.max(np.abs(orig - full)) <= 1
    assert formats.load_model(out / "model.tpm").method == method


def test_pca_M_too_large_exit_2(tmp_path):
    out = tmp_path / "r"
    run(["basis", "--method", "subspace", "--synthetic", "rank=2,shape=4x4,n=5", "--out", out])
    code, _ = run(["pca", "--run", out, "-M", "3"])
    assert code == 2
    code, lines = run(["pca", "--run", out, "-M", "1", "--out", tmp_path / "p"])
    assert code == 0 and (tmp_path / "p" / "errors.csv").exists()


def test_pca_on_new_data(tmp_path):
    out = tmp_path / "r"
    run(["basis", "--method", "rank1", "--synthetic", "shape=3x3,n=6,seed=1", "--out", out])
    formats.save_tensor(tmp_path / "other.tpt", formats.load_tensor(out / "dataset.tpt"))
    code, _ = run(["pca", "--run", out, "--in", tmp_path / "other.tpt", "-M", "2"])
    assert code == 0
    formats.save_tensor(tmp_path / "wrong.tpt", formats.load_tensor(out / "dataset.tpt") * 1.0)
    run(["basis", "--method", "rank1", "--synthetic", "shape=4x4,n=6", "--out", tmp_path / "q"])
    code, _ = run(["pca", "--run", tmp_path / "q", "--in", tmp_path / "wrong.tpt"])
    assert code == 2


def test_verify_and_negative_control():
    code, lines = run(["verify"])
    assert code == 0
    assert all(l.startswith("PASS") for l in lines[:-1])
    code, lines = run(["verify", "--perturb"])
    assert code == 1
    assert lines[-1] == "FAILED: eigen_equation"


def test_verify_reruns_identical():
    assert run(["verify", "--seed", "5"]) == run(["verify", "--seed", "5"])


def test_config_precedence(tmp_path):
    cfg = tmp_path / "c.cfg"
    cfg.write_text("# comment\nmethod = rank1\nsynthetic=shape=3x3,n=4\neig_cap=5\n")
    assert read_config(cfg)["synthetic"] == "shape=3x3,n=4"
    code, lines = run(["basis", "--config", cfg, "--out", tmp_path / "a"])
    assert code == 0 and "method=rank1" in lines[-1]
    code, lines = run(["basis", "--config", cfg, "--method", "subspace", "--out", tmp_path / "b"])
    assert code == 0 and "method=subspace" in lines[-1]
    code, _ = run(["basis", "--config", cfg, "--method", "selfadjoint", "--out", tmp_path / "c"])
    assert code == 3
    code, _ = run(["basis", "--config", cfg, "--method", "selfadjoint", "--tol", "eig_cap=50",
                   "--out", tmp_path / "d"])
    assert code == 0


def test_spectrum_and_info(tmp_path):
    out = tmp_path / "r"
    run(["basis", "--method", "selfadjoint", "--synthetic", "shape=2x2,n=6", "--out", out])
    code, lines = run(["spectrum", out / "basis.tpb"])
    assert code == 0 and lines[0] == "index,value" and len(lines) == 5
    code, lines = run(["info", out / "basis.tpb"])
    assert "format: TPB1" in lines
    code, _ = run(["info", out / "spectrum.csv"])
    assert code == 4
    code, _ = run(["spectrum", out / "dataset.tpt"])
    assert code == 2


def test_usage_errors(tmp_path):
    assert run(["basis", "--out", tmp_path / "x"])[0] == 2
    assert run(["basis", "--synthetic", "color=1", "--out", tmp_path / "x"])[0] == 2
    assert run(["verify", "--tol", "nonsense"])[0] == 2
    assert run(["basis", "--in", tmp_path / "missing.tpt", "--out", tmp_path / "x"])[0] == 4
    with pytest.raises(SystemExit):
        main(["frobnicate"])
