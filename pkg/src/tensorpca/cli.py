"""Command-line front end.

Exit codes
----------
0  success
1  invariant failure (failed verification, non-self-adjoint operator,
   solver non-convergence)
2  usage error (bad flags, M out of range, shape mismatch)
3  capacity (an allocation or eigensolver cap would be exceeded)
4  I/O or file-format error

Options are resolved as flags > ``--config`` file > defaults. The config
file is plain ``key=value`` lines; keys are long option names with
dashes or underscores, or tolerance names (``tol_eig``, ``eig_cap``, ...).
"""

from __future__ import annotations

import argparse
import sys
import time
import warnings
from pathlib import Path

import numpy as np

from . import formats
from .checks import run_checks
from .config import Tolerances
from .errors import (
    ArgumentError,
    CapacityError,
    ContractViolation,
    ConvergenceError,
    DimensionError,
    FormatError,
    IngestionError,
    TensorIndexError,
)
from .io import ImageManifest, export_image_grid, export_spectrum, load_dataset
from .operators import TensorDataset, covariance_operator, eigentensor_basis
from .pca import error_report, pca_truncate
from .rank1 import coefficients, rank1_basis, truncate_rank1
from .subspace import project_subspace, subspace_basis
from .synthetic import synthetic_dataset
from .tensor_core import DenseTensor

EXIT_OK, EXIT_INVARIANT, EXIT_USAGE, EXIT_CAPACITY, EXIT_IO = 0, 1, 2, 3, 4

BASIS_FILES = {"selfadjoint": "basis.tpb", "rank1": "basis.tpr", "subspace": "basis.tps"}
TOLERANCE_KEYS = set(Tolerances.__dataclass_fields__)


class UsageError(Exception):
    pass


def _bool(value) -> bool:
    if isinstance(value, bool):
        return value
    v = str(value).strip().lower()
    if v in ("1", "true", "yes", "on"):
        return True
    if v in ("0", "false", "no", "off"):
        return False
    raise UsageError(f"not a boolean: {value!r}")


def _size(value) -> tuple[int, int]:
    try:
        h, w = (int(k) for k in str(value).lower().split("x"))
    except ValueError as exc:
        raise UsageError(f"size must look like HxW, got {value!r}") from exc
    if h < 1 or w < 1:
        raise UsageError(f"size must be positive, got {value!r}")
    return h, w


# per-subcommand defaults and converters for config-file values
OPTIONS = {
    "basis": {
        "method": ("subspace", str),
        "input": (None, str),
        "synthetic": (None, str),
        "size": ("16x16", str),
        "center": (False, _bool),
        "out": ("run", str),
    },
    "pca": {
        "run": (None, str),
        "input": (None, str),
        "keep": (None, int),
        "sweep": (None, str),
        "out": (None, str),
        "grid_limit": (16, int),
    },
    "verify": {"seed": (0, int), "perturb": (False, _bool)},
    "spectrum": {"out": (None, str)},
    "info": {},
}


def read_config(path) -> dict[str, str]:
    """Parse a flat ``key=value`` file; ``#`` starts a comment."""
    out = {}
    for lineno, raw in enumerate(Path(path).read_text().splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise UsageError(f"{path}:{lineno}: expected key=value")
        key, value = (s.strip() for s in line.split("=", 1))
        out[key.replace("-", "_")] = value
    return out


def write_metadata(path, values: dict) -> None:
    Path(path).write_text("".join(f"{k}={v}\n" for k, v in values.items()))


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="flat key=value file with option defaults")
    common.add_argument("--tol", action="append", default=[], metavar="KEY=VALUE",
                        help="override a tolerance or cap (repeatable)")

    p = argparse.ArgumentParser(prog="tensorpca",
                                description="Tensor PCA from orthonormal tensor bases.")
    sub = p.add_subparsers(dest="command", required=True)

    b = sub.add_parser("basis", parents=[common], help="build a basis from a dataset")
    b.add_argument("--method", choices=sorted(BASIS_FILES), default=None)
    b.add_argument("--in", dest="input", default=None,
                   help="image directory (PNG/PPM) or TPT1 dataset tensor")
    b.add_argument("--synthetic", default=None,
                   help="generate data instead, e.g. 'rank=3,shape=8x8x3,n=20,seed=1'")
    b.add_argument("--size", default=None, help="image resize target HxW (default 16x16)")
    b.add_argument("--center", action="store_const", const=True, default=None,
                   help="subtract the mean sample before building the basis")
    b.add_argument("--out", default=None, help="output directory (default ./run)")

    q = sub.add_parser("pca", parents=[common], help="truncate and reconstruct with a basis")
    q.add_argument("--run", default=None, help="directory written by 'basis'")
    q.add_argument("--in", dest="input", default=None,
                   help="dataset to project (default: the run's dataset)")
    q.add_argument("-M", "--keep", type=int, default=None,
                   help="retained components (default: all available)")
    q.add_argument("--sweep", default=None, help="also report every M in A:B ('r' = max)")
    q.add_argument("--out", default=None, help="output directory (default: the run directory)")
    q.add_argument("--grid-limit", dest="grid_limit", type=int, default=None,
                   help="samples shown in image grids (default 16)")

    v = sub.add_parser("verify", parents=[common], help="run the invariant battery")
    v.add_argument("--seed", type=int, default=None)
    v.add_argument("--perturb", action="store_const", const=True, default=None,
                   help="inject an asymmetry (negative control)")

    s = sub.add_parser("spectrum", parents=[common], help="export the spectrum of a basis file")
    s.add_argument("file")
    s.add_argument("--out", default=None, help="CSV path (default: stdout)")

    i = sub.add_parser("info", parents=[common], help="describe a binary file")
    i.add_argument("file")
    return p


def resolve_options(args) -> tuple[argparse.Namespace, Tolerances]:
    config = read_config(args.config) if args.config else {}
    tol_values = {k: v for k, v in config.items() if k in TOLERANCE_KEYS}
    for item in args.tol:
        if "=" not in item:
            raise UsageError(f"--tol expects KEY=VALUE, got {item!r}")
        key, value = (s.strip() for s in item.split("=", 1))
        tol_values[key] = value
    tol = Tolerances.from_mapping(tol_values)
    for key, (default, convert) in OPTIONS[args.command].items():
        if getattr(args, key, None) is None:
            raw = config.get(key, config.get("in" if key == "input" else key))
            setattr(args, key, convert(raw) if raw is not None else default)
    return args, tol


def _load_input(path, size, tol) -> TensorDataset:
    path = Path(path)
    if path.is_dir():
        h, w = _size(size)
        return load_dataset(ImageManifest.scan(path, h, w), tol)
    return TensorDataset(formats.load_tensor(path))


def _centered(x: TensorDataset, mean: DenseTensor | None) -> TensorDataset:
    if mean is None:
        return x
    return TensorDataset.from_matrix(x.matrix - mean.flat[:, None], x.sample_shape)


def cmd_basis(args, tol, out=print) -> int:
    if (args.input is None) == (args.synthetic is None):
        raise UsageError("give exactly one of --in or --synthetic")
    started = time.perf_counter()
    x = _load_input(args.input, args.size, tol) if args.input else synthetic_dataset(args.synthetic)
    run = Path(args.out)
    run.mkdir(parents=True, exist_ok=True)

    mean = None
    if args.center:
        mean = DenseTensor(x.matrix.mean(axis=1), x.sample_shape)
        formats.save_tensor(run / "mean.tpt", mean)
    work = _centered(x, mean)
    L, N = x.sample_shape.size, x.count

    if args.method == "selfadjoint":
        if L > tol.eig_cap:
            raise CapacityError(
                f"selfadjoint basis needs an {L}x{L} eigenproblem, above eig_cap={tol.eig_cap}"
            )
        basis = eigentensor_basis(covariance_operator(work, tol=tol), tol)
        formats.save_basis(run / BASIS_FILES["selfadjoint"], basis)
        spectrum = basis.eigenvalues
        lam_max = spectrum[0] if spectrum.size else 0.0
        r = int(np.count_nonzero(spectrum > tol.eps_rank * lam_max)) if lam_max > 0 else 0
    elif args.method == "rank1":
        b = rank1_basis(work, tol)
        c = coefficients(work, b, tol)
        formats.save_rank1(run / BASIS_FILES["rank1"], b)
        formats.save_coefficients(run / "coefficients.tpc", c)
        spectrum = c.svd.singular_values
        r = c.rank
    else:
        with warnings.catch_warnings(record=True) as caught:
            warnings.simplefilter("always")
            b = subspace_basis(work, tol)
        for w in caught:
            out(f"warning: {w.message}")
        formats.save_subspace(run / BASIS_FILES["subspace"], b)
        spectrum = b.spectrum
        r = b.rank

    formats.save_tensor(run / "dataset.tpt", x.samples)
    export_spectrum(spectrum, run / "spectrum.csv")
    write_metadata(run / "run.txt", {
        "method": args.method,
        "center": int(bool(args.center)),
        "L": L,
        "N": N,
        "r": r,
        "dims": "x".join(str(k) for k in x.sample_shape.dims),
    })
    elapsed = time.perf_counter() - started
    out(f"method={args.method} L={L} N={N} r={r} elapsed={elapsed:.2f}s")
    return EXIT_OK


def _parse_sweep(text: str, top: int) -> range:
    try:
        a, b = text.split(":")
        lo = top if a.strip().lower() in ("r", "l") else int(a)
        hi = top if b.strip().lower() in ("r", "l") else int(b)
    except ValueError as exc:
        raise UsageError(f"--sweep expects A:B, got {text!r}") from exc
    if not 1 <= lo <= hi <= top:
        raise ArgumentError(f"sweep {lo}:{hi} outside 1..{top}")
    return range(lo, hi + 1)


def _model_factory(method: str, run: Path, x: TensorDataset, own_data: bool, tol):
    """Return ``(make_model(M), available)`` for a stored basis."""
    if method == "selfadjoint":
        basis = formats.load_basis(run / BASIS_FILES[method])
        return (lambda M: pca_truncate(x, basis, M)), len(basis)
    if method == "rank1":
        b = formats.load_rank1(run / BASIS_FILES[method])
        c = formats.load_coefficients(run / "coefficients.tpc") if own_data else coefficients(x, b, tol)
        return (lambda M: truncate_rank1(c, b, M)), c.rank
    b = formats.load_subspace(run / BASIS_FILES[method])
    return (lambda M: project_subspace(x, b, M)), b.rank


def cmd_pca(args, tol, out=print) -> int:
    if args.run is None:
        raise UsageError("--run is required")
    run = Path(args.run)
    meta = read_config(run / "run.txt")
    method = meta["method"]
    dims = tuple(int(k) for k in meta["dims"].split("x"))
    own_data = args.input is None
    if own_data:
        x = TensorDataset(formats.load_tensor(run / "dataset.tpt"))
    else:
        x = _load_input(args.input, f"{dims[0]}x{dims[1]}" if len(dims) == 3 else "16x16", tol)
    if x.sample_shape.dims != dims:
        raise DimensionError(f"dataset samples {x.sample_shape.dims} do not match the run {dims}")
    mean = formats.load_tensor(run / "mean.tpt") if _bool(meta.get("center", "0")) else None
    work = _centered(x, mean)

    make_model, available = _model_factory(method, run, work, own_data, tol)
    M = available if args.keep is None else args.keep
    if not 1 <= M <= available:
        raise ArgumentError(f"M={M} outside 1..{available}")
    dest = Path(args.out) if args.out else run
    dest.mkdir(parents=True, exist_ok=True)

    model = make_model(M)
    report = error_report(work, model)
    formats.save_model(dest / "model.tpm", model)
    report.to_csv(dest / "errors.csv")
    rel = float(np.sqrt(report.total / x.energy()))
    out(f"method={method} M={M} available={available} relative_error={rel:.3e} "
        f"mean_squared_error={report.mean:.6e} predicted={report.predicted:.6e} "
        f"relative_gap={report.relative_gap:.3e}")

    if args.sweep:
        lines = ["M,mean_squared_error,predicted,relative_gap"]
        for k in _parse_sweep(args.sweep, available):
            rep = error_report(work, make_model(k))
            lines.append(f"{k},{rep.mean:.17g},{rep.predicted:.17g},{rep.relative_gap:.17g}")
        (dest / "sweep.csv").write_text("\n".join(lines) + "\n")

    if len(dims) == 3 and dims[2] == 3:
        limit = max(1, min(args.grid_limit, x.count))

        def images(ds: TensorDataset) -> TensorDataset:
            mat = ds.matrix[:, :limit]
            if mean is not None:
                mat = mat + mean.flat[:, None]
            return TensorDataset.from_matrix(mat, ds.sample_shape)

        export_image_grid(images(work), dest / "original.png")
        export_image_grid(images(make_model(available).reconstruct()), dest / "full.png")
        export_image_grid(images(model.reconstruct()), dest / "truncated.png")
    return EXIT_OK


def cmd_verify(args, tol, out=print) -> int:
    checks = run_checks(seed=args.seed, perturb=args.perturb)
    for c in checks:
        out(c.line())
    failed = [c.name for c in checks if not c.passed]
    if failed:
        out(f"FAILED: {', '.join(failed)}")
        return EXIT_INVARIANT
    out(f"all {len(checks)} checks passed")
    return EXIT_OK


def cmd_spectrum(args, tol, out=print) -> int:
    info = formats.describe(args.file)
    fmt = info["format"]
    if fmt == "TPB1":
        values = formats.load_basis(args.file).eigenvalues
    elif fmt == "TPS1":
        values = formats.load_subspace(args.file).spectrum
    elif fmt == "TPC1":
        values = formats.load_coefficients(args.file).svd.singular_values
    elif fmt == "TPR1":
        values = np.concatenate(formats.load_rank1(args.file).mode_spectra)
    elif fmt == "TPM1":
        values = formats.load_model(args.file).spectrum
    else:
        raise UsageError(f"{args.file} ({info['kind']}) carries no spectrum")
    if args.out:
        export_spectrum(values, args.out)
    else:
        out("index,value")
        for k, v in enumerate(values, start=1):
            out(f"{k},{v:.17g}")
    return EXIT_OK


def cmd_info(args, tol, out=print) -> int:
    for key, value in formats.describe(args.file).items():
        out(f"{key}: {value}")
    return EXIT_OK


COMMANDS = {
    "basis": cmd_basis,
    "pca": cmd_pca,
    "verify": cmd_verify,
    "spectrum": cmd_spectrum,
    "info": cmd_info,
}


def main(argv=None, out=print) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)

    def err(msg):
        print(f"tensorpca: error: {msg}", file=sys.stderr)

    try:
        args, tol = resolve_options(args)
        return COMMANDS[args.command](args, tol, out)
    except (UsageError, ArgumentError, DimensionError, TensorIndexError) as exc:
        err(exc)
        return EXIT_USAGE
    except CapacityError as exc:
        err(exc)
        return EXIT_CAPACITY
    except (ContractViolation, ConvergenceError) as exc:
        err(exc)
        return EXIT_INVARIANT
    except (FormatError, IngestionError, OSError, KeyError) as exc:
        err(exc)
        return EXIT_IO


def main_entry() -> None:
    sys.exit(main())


if __name__ == "__main__":
    main_entry()
