"""Proximity graphs and the truncated graph Laplacian.

Vertices ``x_i``, ``x_j`` of a net are joined when ``d(x_i, x_j) < rho`` and
the edge carries the weight ``2(n+2) / (nu_n rho^(n+2)) * mu_i * mu_j``.

Discrete functions are plain float arrays indexed by the vertices of the
whole net, with the convention that they vanish outside ``X_t``. Arrays of
length ``|X_t|`` are "restricted" vectors and are what the Laplacian acts on.
"""

from dataclasses import dataclass

import numpy as np

from . import kernels
from .errors import ConfigError, DomainError
from .manifold import unit_ball_volume


@dataclass(frozen=True)
class ProximityGraph:
    net: object
    rho: float
    i: np.ndarray
    j: np.ndarray
    dist: np.ndarray
    w: np.ndarray
    nu_n: float

    @property
    def eps(self):
        return self.net.eps

    @property
    def t(self):
        return self.net.t

    @property
    def n(self):
        return self.net.model.dim

    @property
    def edge_count(self):
        return len(self.i)

    @property
    def weight_constant(self):
        return weight_constant(self.n, self.rho)


def weight_constant(n, rho):
    """``2(n+2) / (nu_n rho^(n+2))``, the factor in front of ``mu_i mu_j``."""
    return 2.0 * (n + 2) / (unit_ball_volume(n) * rho ** (n + 2))


def check_graph_parameters(eps, rho, t):
    """Return the list of violated standing hypotheses ``eps < rho``, ``3 rho < t + eps``."""
    failed = []
    if not eps < rho:
        failed.append(f"eps < rho ({eps:.6g} >= {rho:.6g})")
    if not 3.0 * rho < t + eps:
        failed.append(f"3*rho < t + eps ({3 * rho:.6g} >= {t + eps:.6g})")
    return failed


def build_graph(net, rho, check=True, impl=None):
    """Build the ``(eps, rho)``-proximity graph on ``net``.

    With ``check`` set, ``eps < rho`` (eps being the largest spacing actually
    used by the net) and ``3 rho < t + eps`` are enforced.
    """
    if not rho > 0:
        raise ConfigError(f"rho must be positive, got {rho}")
    if check:
        failed = check_graph_parameters(net.max_spacing, rho, net.t)
        if failed:
            raise ConfigError("proximity graph constraints violated: " + "; ".join(failed))
    i, j, dist = kernels.radius_pairs(net.points, net.model.axis_periods, rho, impl=impl)
    n = net.model.dim
    w = weight_constant(n, rho) * net.mu[i] * net.mu[j]
    return ProximityGraph(net=net, rho=float(rho), i=i, j=j, dist=dist, w=w, nu_n=unit_ball_volume(n))


def discrete_differential(g, u, directed=False):
    """``du(e_ij) = u(x_j) - u(x_i)`` on every stored edge (i < j).

    With ``directed`` the reversed orientations are appended, giving the
    differential on the set of directed edges.
    """
    u = np.asarray(u, dtype=np.float64)
    du = u[g.j] - u[g.i]
    if directed:
        return np.concatenate([du, -du])
    return du


def edge_inner(g, du, dv):
    """Inner product on undirected edge values, ``sum_e w_e du_e dv_e``.

    Equal to ``1/2 sum`` over directed edges.
    """
    return float(np.dot(g.w * du, dv))


def _check_support(g, u):
    outside = ~g.net.in_Xt
    if np.any(np.asarray(u)[outside] != 0):
        raise DomainError("discrete function must vanish outside X_t")


def dirichlet_energy(g, u, enforce_support=True):
    """Discrete Dirichlet energy ``sum_{i<j, i~j} w_ij (u_i - u_j)^2``."""
    u = np.asarray(u, dtype=np.float64)
    if enforce_support:
        _check_support(g, u)
    du = discrete_differential(g, u)
    return float(np.dot(g.w, du * du))


def dirichlet_energy_directed(g, u):
    """The same energy as ``1/2 sum`` over directed edges."""
    du = discrete_differential(g, u, directed=True)
    w2 = np.concatenate([g.w, g.w])
    return 0.5 * float(np.sum(w2 * du * du))


@dataclass(frozen=True)
class TruncatedLaplacian:
    graph: ProximityGraph
    index: np.ndarray  # X_t -> vertex index
    position: np.ndarray  # vertex index -> row, -1 outside X_t
    degree: np.ndarray
    mu: np.ndarray
    indptr: np.ndarray
    indices: np.ndarray
    data: np.ndarray

    @property
    def dim(self):
        return len(self.index)

    def restrict(self, u):
        return np.asarray(u, dtype=np.float64)[self.index]

    def extend(self, v):
        out = np.zeros(self.graph.net.size)
        out[self.index] = v
        return out

    def coupling(self, v):
        """``(W v)_i = sum_{j in X_t, j ~ i} w_ij v_j``."""
        return kernels.csr_matvec(self.indptr, self.indices, self.data, v)

    def apply(self, v):
        """``-Delta_t v`` for a restricted vector ``v``."""
        v = np.asarray(v, dtype=np.float64)
        return (self.degree * v - self.coupling(v)) / self.mu

    def inner(self, u, v):
        """``<u, v>_mu`` for restricted vectors."""
        return float(np.dot(self.mu * u, v))


def _csr_from_pairs(rows, cols, vals, n):
    order = np.lexsort((cols, rows))
    rows, cols, vals = rows[order], cols[order], vals[order]
    indptr = np.zeros(n + 1, dtype=np.int64)
    np.cumsum(np.bincount(rows, minlength=n), out=indptr[1:])
    return indptr, np.ascontiguousarray(cols, dtype=np.int64), np.ascontiguousarray(vals)


def assemble_truncated_laplacian(g):
    """Assemble ``-Delta_t`` on ``X_t`` with extension-by-zero outside.

    Degrees sum weights over all neighbors in ``X``; only pairs inside
    ``X_t`` couple off the diagonal.
    """
    net = g.net
    index = np.flatnonzero(net.in_Xt)
    if index.size == 0:
        raise DomainError("X_t is empty")
    position = np.full(net.size, -1, dtype=np.int64)
    position[index] = np.arange(index.size)

    full_degree = np.bincount(g.i, weights=g.w, minlength=net.size)
    full_degree += np.bincount(g.j, weights=g.w, minlength=net.size)

    pi, pj = position[g.i], position[g.j]
    inside = (pi >= 0) & (pj >= 0)
    pi, pj, w = pi[inside], pj[inside], g.w[inside]
    indptr, indices, data = _csr_from_pairs(
        np.concatenate([pi, pj]), np.concatenate([pj, pi]), np.concatenate([w, w]), index.size
    )
    return TruncatedLaplacian(
        graph=g,
        index=index,
        position=position,
        degree=full_degree[index],
        mu=net.mu[index],
        indptr=indptr,
        indices=indices,
        data=data,
    )
