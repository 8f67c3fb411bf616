"""Backend selection for the hot loops.

The compiled extension ``cylgraph._kernels`` is used when it imports and
``CYLGRAPH_PURE_PYTHON`` is unset; otherwise the numpy twins are used.
``BACKEND`` names the active one.
"""

import os

import numpy as np

from . import _kernels_py

if os.environ.get("CYLGRAPH_PURE_PYTHON"):
    _impl = _kernels_py
    BACKEND = "python"
else:
    try:
        from . import _kernels as _impl  # type: ignore[attr-defined]

        BACKEND = "cython"
    except ImportError:
        _impl = _kernels_py
        BACKEND = "python"


def backend_module(name=None):
    """Return the kernel module named ``name`` ("cython" or "python")."""
    if name is None:
        return _impl
    if name == "python":
        return _kernels_py
    if name == "cython":
        from . import _kernels  # type: ignore[attr-defined]

        return _kernels
    raise ValueError(f"unknown kernel backend {name!r}")


def _pad3(coords):
    coords = np.asarray(coords, dtype=np.float64)
    if coords.ndim == 1:
        coords = coords[:, None]
    out = np.zeros((coords.shape[0], 3))
    out[:, : coords.shape[1]] = coords
    return out


def radius_pairs(coords, periods, rho, impl=None):
    """All unordered pairs closer than ``rho``, sorted lexicographically.

    Parameters
    ----------
    coords : (N, n) array, n <= 3; periodic coordinates must lie in [0, period)
    periods : length-n sequence; 0 marks a non-periodic axis
    rho : strict distance cutoff

    Returns
    -------
    i, j, dist : arrays with i < j
    """
    mod = backend_module(impl)
    c3 = _pad3(coords)
    p3 = np.zeros(3)
    p3[: len(periods)] = periods
    i, j, d = mod.radius_pairs(np.ascontiguousarray(c3), p3, float(rho))
    order = np.lexsort((j, i))
    return i[order], j[order], d[order]


def csr_matvec(indptr, indices, data, x, impl=None):
    mod = backend_module(impl)
    return mod.csr_matvec(indptr, indices, data, np.ascontiguousarray(x, dtype=np.float64))


def csr_matmat(indptr, indices, data, x, impl=None):
    mod = backend_module(impl)
    return mod.csr_matmat(indptr, indices, data, np.ascontiguousarray(x, dtype=np.float64))


def _as3(values, periodic, offsets):
    values = np.asarray(values, dtype=np.float64)
    shape = values.shape
    # pad leading axes so the last grid axis stays the contiguous inner loop
    lead = 3 - values.ndim
    f3 = np.ascontiguousarray(values.reshape((1,) * lead + shape))
    per = np.zeros(3, dtype=np.int32)
    per[lead:] = [1 if p else 0 for p in periodic]
    off = np.zeros((len(offsets), 3), dtype=np.int64)
    if len(offsets):
        off[:, lead:] = np.asarray(offsets, dtype=np.int64).reshape(len(offsets), -1)
    return f3, per, off, shape


def ball_correlate(values, offsets, weights, periodic, impl=None):
    """Stencil sum ``out[x] = sum_k w_k f[x + o_k]`` on a grid array."""
    mod = backend_module(impl)
    f3, per, off, shape = _as3(values, periodic, offsets)
    w = np.ascontiguousarray(weights, dtype=np.float64)
    return mod.ball_correlate(f3, off, w, per).reshape(shape)


def ball_dispersion(values, offsets, periodic, impl=None):
    """Per-node ``sum_k (f[x + o_k] - f[x])**2`` on a grid array."""
    mod = backend_module(impl)
    f3, per, off, shape = _as3(values, periodic, offsets)
    return mod.ball_dispersion(f3, off, per).reshape(shape)
