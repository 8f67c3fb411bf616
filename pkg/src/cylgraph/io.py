"""Plain-text serialization of nets, graphs and spectra.

Every file starts with ``# schema=1`` followed by ``# key=value`` parameter
lines and a CSV header row. Floats are written with 17 significant digits,
so reading a file back reproduces the arrays exactly.
"""

import csv
import io as _io

import numpy as np

from . import manifold as mf
from .errors import DomainError
from .netgen import LayeredNet

SCHEMA = "1"


def _fmt(x):
    return f"{float(x):.17g}"


def _header(params):
    lines = [f"# schema={SCHEMA}"]
    lines += [f"# {k}={v}" for k, v in params.items()]
    return lines


def _split(text):
    params, rows = {}, []
    for line in text.splitlines():
        if line.startswith("#"):
            key, _, val = line[1:].strip().partition("=")
            params[key] = val
        elif line.strip():
            rows.append(line)
    if params.get("schema") != SCHEMA:
        raise DomainError(f"unsupported schema {params.get('schema')!r}")
    reader = csv.reader(rows)
    columns = next(reader)
    return params, columns, list(reader)


def _model_params(m):
    return {k: (v if k == "kind" else _fmt(v)) for k, v in m.describe().items()}


# ---------------------------------------------------------------------------
# nets


def net_to_csv(net):
    params = _model_params(net.model)
    params.update(eps=_fmt(net.eps), t=_fmt(net.t))
    if net.tangential_counts:
        params["tangential_counts"] = " ".join(str(c) for c in net.tangential_counts)
    coords = [f"x{a}" for a in range(net.model.dim)]
    lines = _header(params) + [",".join(["index"] + coords + ["layer", "mu", "in_Xt"])]
    for i in range(net.size):
        row = [str(i)] + [_fmt(c) for c in net.points[i]]
        row += [str(int(net.layer[i])), _fmt(net.mu[i]), str(int(net.in_Xt[i]))]
        lines.append(",".join(row))
    return "\n".join(lines) + "\n"


def net_from_csv(text):
    params, cols, rows = _split(text)
    m = mf.from_descriptor({k: v for k, v in params.items() if k not in ("schema", "eps", "t", "tangential_counts")})
    data = np.array(rows, dtype=object)
    dim = m.dim
    points = data[:, 1 : 1 + dim].astype(np.float64)
    layer = data[:, 1 + dim].astype(np.int64)
    mu = data[:, 2 + dim].astype(np.float64)
    in_xt = data[:, 3 + dim].astype(np.int64).astype(bool)
    counts = tuple(int(c) for c in params.get("tangential_counts", "").split())
    heights = None
    if counts or m.kind == "Interval":
        nh = len(points) // int(np.prod(counts, dtype=np.int64))
        heights = points[:nh, -1].copy()
    return LayeredNet(
        model=m,
        eps=float(params["eps"]),
        t=float(params["t"]),
        points=points,
        layer=layer,
        mu=mu,
        in_Xt=in_xt,
        boundary_component_count=2,
        tangential_counts=counts,
        heights=heights,
    )


# ---------------------------------------------------------------------------
# graphs


def graph_to_csv(g):
    params = _model_params(g.net.model)
    params.update(
        eps=_fmt(g.eps),
        rho=_fmt(g.rho),
        t=_fmt(g.t),
        vertices=str(g.net.size),
        edges=str(g.edge_count),
    )
    lines = _header(params) + ["i,j,dist,w"]
    for a, b, d, w in zip(g.i, g.j, g.dist, g.w):
        lines.append(f"{a},{b},{_fmt(d)},{_fmt(w)}")
    return "\n".join(lines) + "\n"


def edges_from_csv(text):
    """Return ``(params, i, j, dist, w)`` from an edge-list file."""
    params, _, rows = _split(text)
    if not rows:
        empty = np.empty(0, dtype=np.int64)
        return params, empty, empty.copy(), np.empty(0), np.empty(0)
    data = np.array(rows, dtype=object)
    return (
        params,
        data[:, 0].astype(np.int64),
        data[:, 1].astype(np.int64),
        data[:, 2].astype(np.float64),
        data[:, 3].astype(np.float64),
    )


# ---------------------------------------------------------------------------
# spectra


def spectrum_to_csv(eigenvalues, residuals=None, params=None):
    """``index,eigenvalue,residual`` rows (1-based index).

    Analytic spectra have no residual column values; zeros are written.
    """
    vals = np.asarray(eigenvalues, dtype=np.float64)
    res = np.zeros_like(vals) if residuals is None else np.asarray(residuals, dtype=np.float64)
    lines = _header(params or {}) + ["index,eigenvalue,residual"]
    for k, (v, r) in enumerate(zip(vals, res), start=1):
        lines.append(f"{k},{_fmt(v)},{_fmt(r)}")
    return "\n".join(lines) + "\n"


def spectrum_from_csv(text):
    params, _, rows = _split(text)
    data = np.array(rows, dtype=object).reshape(-1, 3)
    return params, data[:, 1].astype(np.float64), data[:, 2].astype(np.float64)


def eigenvectors_to_text(vectors, index=None):
    """Dense matrix file: one row per vertex of ``X_t``, one column per eigenvector.

    The first column is the vertex index in the full net when ``index`` is given.
    """
    vectors = np.asarray(vectors, dtype=np.float64)
    buf = _io.StringIO()
    buf.write(f"# schema={SCHEMA}\n# rows={vectors.shape[0]}\n# cols={vectors.shape[1]}\n")
    for r in range(vectors.shape[0]):
        row = [_fmt(v) for v in vectors[r]]
        if index is not None:
            row.insert(0, str(int(index[r])))
        buf.write(" ".join(row) + "\n")
    return buf.getvalue()


def write_text(path, text):
    with open(path, "w", newline="\n") as fh:
        fh.write(text)
