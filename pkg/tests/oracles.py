"""Brute-force reference implementations.

Everything here loops over explicit multi-indices with ``itertools``; none
of it calls into the package, so agreement with the optimized code is
evidence rather than tautology.
"""

from __future__ import annotations

import itertools
import math

import numpy as np


def multi_indices(dims):
    """All 1-based multi-indices in linear-index order (mode 1 fastest)."""
    for rev in itertools.product(*(range(1, k + 1) for k in reversed(dims))):
        yield tuple(reversed(rev))


def linear_index_loop(index, dims):
    for m, j in enumerate(multi_indices(dims), start=1):
        if j == tuple(index):
            return m
    raise IndexError(index)


def contract_loop(x, y, modes_x, modes_y):
    """Explicit sum over the paired (1-based) modes."""
    x, y = np.asarray(x), np.asarray(y)
    fx = [k for k in range(x.ndim) if k + 1 not in modes_x]
    fy = [k for k in range(y.ndim) if k + 1 not in modes_y]
    pair_dims = [x.shape[k - 1] for k in modes_x]
    out_dims = [x.shape[k] for k in fx] + [y.shape[k] for k in fy]
    out = np.zeros(out_dims)
    for free in itertools.product(*(range(n) for n in out_dims)):
        s = 0.0
        for p in itertools.product(*(range(n) for n in pair_dims)):
            ix = [0] * x.ndim
            iy = [0] * y.ndim
            for k, v in zip(fx, free[: len(fx)]):
                ix[k] = v
            for k, v in zip(fy, free[len(fx):]):
                iy[k] = v
            for a, b, v in zip(modes_x, modes_y, p):
                ix[a - 1] = v
                iy[b - 1] = v
            s += x[tuple(ix)] * y[tuple(iy)]
        out[free] = s
    return out


def gram_loop(samples):
    """``G[n, m] = sum_i X_n[i] X_m[i]`` over a list of arrays."""
    n = len(samples)
    g = np.zeros((n, n))
    for a in range(n):
        for b in range(n):
            s = 0.0
            for idx in itertools.product(*(range(k) for k in samples[a].shape)):
                s += samples[a][idx] * samples[b][idx]
            g[a, b] = s
    return g


def mode_operator_loop(data, k):
    """``A^k[i, j] = sum_n sum_{other idx} X_n[..i..] X_n[..j..]`` for 1-based mode ``k``.

    ``data`` has the sample axis last.
    """
    data = np.asarray(data)
    dims = data.shape[:-1]
    ext = dims[k - 1]
    others = [range(n) for pos, n in enumerate(dims) if pos != k - 1]
    a = np.zeros((ext, ext))
    for i in range(ext):
        for j in range(ext):
            s = 0.0
            for n in range(data.shape[-1]):
                for rest in itertools.product(*others):
                    ii = list(rest)
                    jj = list(rest)
                    ii.insert(k - 1, i)
                    jj.insert(k - 1, j)
                    s += data[tuple(ii) + (n,)] * data[tuple(jj) + (n,)]
            a[i, j] = s
    return a


def coefficients_loop(data, factors):
    """``D[n, m - 1] = <X_n, U_{j1}^1 o ... o U_{jd}^d>`` with ``j`` the multi-index of ``m``."""
    data = np.asarray(data)
    dims = data.shape[:-1]
    n_samples = data.shape[-1]
    L = math.prod(dims)
    d = np.zeros((n_samples, L))
    for n in range(n_samples):
        for m, j in enumerate(multi_indices(dims)):
            s = 0.0
            for i in multi_indices(dims):
                w = 1.0
                for k, (ik, jk) in enumerate(zip(i, j)):
                    w *= factors[k][ik - 1, jk - 1]
                s += data[tuple(v - 1 for v in i) + (n,)] * w
            d[n, m] = s
    return d


def char_poly_eigenvalues(a):
    """Eigenvalues from the Faddeev-LeVerrier characteristic polynomial.

    Only sensible for small, well-separated spectra.
    """
    a = np.asarray(a, dtype=np.float64)
    n = a.shape[0]
    coeffs = [1.0]
    m = np.zeros_like(a)
    for k in range(1, n + 1):
        m = a @ m + coeffs[-1] * np.eye(n)
        c = -np.trace(a @ m) / k
        coeffs.append(c)
    return np.sort(np.roots(coeffs).real)


def bilinear_pixel(img, height, width, r, c, ch):
    """One output pixel of half-pixel-center bilinear resizing, computed directly."""
    h_in, w_in = img.shape[:2]

    def src(o, n_in, n_out):
        s = (o + 0.5) * n_in / n_out - 0.5
        return min(max(s, 0.0), n_in - 1.0)

    sy, sx = src(r, h_in, height), src(c, w_in, width)
    y0, x0 = int(math.floor(sy)), int(math.floor(sx))
    y1, x1 = min(y0 + 1, h_in - 1), min(x0 + 1, w_in - 1)
    fy, fx = sy - y0, sx - x0
    top = (1 - fx) * img[y0, x0, ch] + fx * img[y0, x1, ch]
    bot = (1 - fx) * img[y1, x0, ch] + fx * img[y1, x1, ch]
    return (1 - fy) * top + fy * bot


def best_subset_error(data_matrix, vectors, M):
    """Smallest mean squared error over every ``M``-subset of the basis columns."""
    best, best_set = np.inf, None
    n = data_matrix.shape[1]
    for subset in itertools.combinations(range(vectors.shape[1]), M):
        comps = vectors[:, subset]
        resid = data_matrix - comps @ (comps.T @ data_matrix)
        err = float(np.sum(resid ** 2)) / n
        if err < best:
            best, best_set = err, subset
    return best, best_set
