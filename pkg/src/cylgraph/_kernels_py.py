"""Numpy/scipy implementations of the compiled kernels in ``_kernels.pyx``.

Used when the extension is not built, or when ``CYLGRAPH_PURE_PYTHON=1``.
Arithmetic is arranged in the same order as the compiled loops so both
backends agree to the last bit on the operations tests compare.
"""

import numpy as np
from scipy.spatial import cKDTree


def _axis_gap(a, b, period):
    d = np.abs(a - b)
    if period > 0.0:
        d = np.where(period - d < d, period - d, d)
    return d


def radius_pairs(coords, periods, rho):
    coords = np.ascontiguousarray(coords, dtype=np.float64)
    periods = np.asarray(periods, dtype=np.float64)
    if coords.shape[0] == 0:
        empty = np.empty(0, dtype=np.int64)
        return empty, empty.copy(), np.empty(0)
    # cKDTree needs a box for every axis; clamped axes get a box wide
    # enough that wrapping never produces a pair
    span = coords.max(axis=0) - coords.min(axis=0)
    box = np.where(periods > 0.0, periods, 2.0 * span + 4.0 * rho + 1.0)
    shifted = coords - np.where(periods > 0.0, 0.0, coords.min(axis=0))
    shifted = np.mod(shifted, box)
    tree = cKDTree(shifted, boxsize=box)
    pairs = tree.query_pairs(rho * (1.0 + 1e-9) + 1e-300, output_type="ndarray")
    if pairs.size == 0:
        empty = np.empty(0, dtype=np.int64)
        return empty, empty.copy(), np.empty(0)
    i = np.minimum(pairs[:, 0], pairs[:, 1]).astype(np.int64)
    j = np.maximum(pairs[:, 0], pairs[:, 1]).astype(np.int64)
    d0 = _axis_gap(coords[i, 0], coords[j, 0], periods[0])
    d1 = _axis_gap(coords[i, 1], coords[j, 1], periods[1])
    d2 = _axis_gap(coords[i, 2], coords[j, 2], periods[2])
    dist = np.sqrt(d0 * d0 + d1 * d1 + d2 * d2)
    keep = dist < rho
    return i[keep], j[keep], dist[keep]


def csr_matvec(indptr, indices, data, x):
    n = indptr.shape[0] - 1
    rows = np.repeat(np.arange(n), np.diff(indptr))
    return np.bincount(rows, weights=data * x[indices], minlength=n)


def csr_matmat(indptr, indices, data, x):
    from scipy.sparse import csr_matrix

    n = indptr.shape[0] - 1
    mat = csr_matrix((data, indices, indptr), shape=(n, x.shape[0]))
    return np.ascontiguousarray(mat @ x)


def _shifted(f, offset, periodic):
    """Return g with g[x] = f[x + offset], zero where a clamped axis runs out."""
    out = f
    for axis, (o, per) in enumerate(zip(offset, periodic)):
        o = int(o)
        if o == 0:
            continue
        if per:
            out = np.roll(out, -o, axis=axis)
        else:
            size = out.shape[axis]
            moved = np.zeros_like(out)
            if abs(o) < size:
                src = [slice(None)] * out.ndim
                dst = [slice(None)] * out.ndim
                if o > 0:
                    src[axis] = slice(o, size)
                    dst[axis] = slice(0, size - o)
                else:
                    src[axis] = slice(0, size + o)
                    dst[axis] = slice(-o, size)
                moved[tuple(dst)] = out[tuple(src)]
            out = moved
    return out


def ball_correlate(f, offsets, weights, periodic):
    out = np.zeros_like(f)
    for o, w in zip(offsets, weights):
        out += w * _shifted(f, o, periodic)
    return out


def ball_dispersion(f, offsets, periodic):
    out = np.zeros_like(f)
    for o in offsets:
        diff = _shifted(f, o, periodic) - f
        out += diff * diff
    return out
