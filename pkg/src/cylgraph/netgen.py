"""Layered epsilon-nets with product Voronoi cells.

The vertex set is a product ``(tangential net) x (heights)``. Near each
boundary component the heights are the normal projections at depths
``t - k*eps`` (k = 0, 1, ...) down to the boundary, plus the layer at depth
``t + eps``; the same spacing then continues towards the midline, where the
layering from the opposite component is met (one adjustment layer is added
at the midline when the gap would exceed ``eps``).

Because the layout is a product, every Voronoi cell is a product
``W_i x [slab]`` of a tangential cell and a height slab, and all measures are
exact.

Vertex ordering is tangential-major with the height index varying fastest.
"""

import dataclasses
from dataclasses import dataclass
from math import ceil

import numpy as np

from . import manifold as mf
from .errors import ConfigError, ConstructionError, DomainError

# layer tags: regular layers at depth t - k*eps carry tag k (so t + eps is -1);
# the two extra layers get sentinels
LAYER_BOUNDARY_FILL = 1_000_000
LAYER_MIDLINE = -1_000_000

XT_TOL = 1e-12
_SNAP = 1e-9


@dataclass(frozen=True)
class LayeredNet:
    model: mf.ManifoldModel
    eps: float
    t: float
    points: np.ndarray
    layer: np.ndarray
    mu: np.ndarray
    in_Xt: np.ndarray
    boundary_component_count: int
    tangential_counts: tuple = ()
    heights: np.ndarray = None

    @property
    def size(self):
        return self.points.shape[0]

    @property
    def tangential_spacing(self):
        return tuple(p / c for p, c in zip(self.model.periods, self.tangential_counts))

    @property
    def max_spacing(self):
        """Largest spacing actually used along any axis (the working epsilon)."""
        return max((self.eps,) + self.tangential_spacing)

    @property
    def is_product(self):
        return self.heights is not None

    @property
    def xt_indices(self):
        return np.flatnonzero(self.in_Xt)

    def slab_bounds(self):
        """Height slab ``[lo, hi]`` of every height layer."""
        h = self.heights
        mids = 0.5 * (h[1:] + h[:-1])
        lo = np.concatenate([[0.0], mids])
        hi = np.concatenate([mids, [self.model.height]])
        return lo, hi


def boundary_net(m, eps):
    """Equispaced eps-net of each boundary component.

    Returns ``(points, component)`` where ``component`` is 0 for the bottom
    (height 0) and 1 for the top (height H).
    """
    if not eps > 0:
        raise ConfigError("eps must be positive")
    counts = _tangential_counts(m, eps)
    tang = _tangential_grid(m, counts)
    pts, comp = [], []
    for c, h in ((0, 0.0), (1, m.height)):
        block = np.column_stack([tang, np.full(len(tang), h)]) if tang.size else np.array([[h]])
        pts.append(block)
        comp.append(np.full(len(block), c))
    return np.vstack(pts), np.concatenate(comp)


def _tangential_counts(m, eps):
    # the small slack keeps C/eps = 200.00000000000003 from rounding up to 201
    return tuple(int(ceil(p / eps - _SNAP)) for p in m.periods)


def _tangential_grid(m, counts):
    if not counts:
        return np.zeros((1, 0))
    axes = [np.arange(c) * (p / c) for p, c in zip(m.periods, counts)]
    mesh = np.meshgrid(*axes, indexing="ij")
    return np.column_stack([a.ravel() for a in mesh])


def layer_heights(m, eps, t):
    """Sorted heights of all layers and their integer tags."""
    H = m.height
    half = H / 2.0
    tol = _SNAP * max(eps, H)
    depths = {}

    k = 0
    while t - k * eps > tol:
        depths[t - k * eps] = k
        k += 1
    if abs(t - k * eps) <= tol:
        depths[0.0] = k
    else:
        depths[0.0] = LAYER_BOUNDARY_FILL

    k = -1
    midline = False
    while True:
        d = t - k * eps
        if d < half - tol:
            depths[d] = k
            k -= 1
            continue
        if abs(d - half) <= tol:
            midline = True
            mid_tag = k
        break
    deepest = max(depths)
    if not midline and H - 2.0 * deepest > eps + tol:
        midline = True
        mid_tag = LAYER_MIDLINE

    heights, tags = [], []
    for d, tag in depths.items():
        heights.append(d)
        tags.append(tag)
        heights.append(H - d)
        tags.append(tag)
    if midline:
        heights.append(half)
        tags.append(mid_tag)
    order = np.argsort(heights, kind="stable")
    return np.asarray(heights)[order], np.asarray(tags, dtype=np.int64)[order]


def build_layered_net(m, eps, t):
    """Build the layered net ``X`` with measures and the ``X_t`` mask.

    Requires ``0 < eps``, ``0 <= t`` and ``t + eps < s0``.
    """
    if not eps > 0:
        raise ConfigError(f"eps must be positive, got {eps}")
    if t < 0:
        raise ConfigError(f"truncation depth must be >= 0, got {t}")
    if not t + eps < m.s0:
        raise ConfigError(f"need t + eps < s0: {t} + {eps} >= {m.s0}")
    counts = _tangential_counts(m, eps)
    heights, tags = layer_heights(m, eps, t)
    if np.any(np.diff(heights) > eps * (1 + _SNAP)):
        raise ConstructionError("layer spacing exceeds eps")

    tang = _tangential_grid(m, counts)
    nt, nh = len(tang), len(heights)
    pts = np.empty((nt * nh, m.dim))
    pts[:, :-1] = np.repeat(tang, nh, axis=0)
    pts[:, -1] = np.tile(heights, nt)
    layer = np.tile(tags, nt)
    in_xt = mf.boundary_distance(m, pts) >= t - XT_TOL

    net = LayeredNet(
        model=m,
        eps=float(eps),
        t=float(t),
        points=pts,
        layer=layer,
        mu=np.full(len(pts), np.nan),
        in_Xt=in_xt,
        boundary_component_count=2,
        tangential_counts=counts,
        heights=heights,
    )
    return voronoi_measures(net)


def voronoi_measures(net):
    """Return a copy of ``net`` with exact product cell measures."""
    if not net.is_product:
        raise ConstructionError("exact measures need a product layout; use monte_carlo_measures")
    lo, hi = net.slab_bounds()
    slab = hi - lo
    if np.any(slab <= 0):
        raise ConstructionError("degenerate height slab")
    tang_measure = float(np.prod(net.tangential_spacing)) if net.tangential_counts else 1.0
    mu = np.tile(slab, int(np.prod(net.tangential_counts, dtype=np.int64))) * tang_measure
    if np.any(mu <= 0):
        raise ConstructionError("degenerate Voronoi cell")
    return dataclasses.replace(net, mu=mu)


def truncate(net, t=None):
    """Indices of ``X_t`` (vertices at boundary distance >= t)."""
    if t is None:
        t = net.t
    if t == 0:
        return np.arange(net.size)
    bd = mf.boundary_distance(net.model, net.points)
    return np.flatnonzero(bd >= t - XT_TOL)


def assign_to_cells(net, pts):
    """Index of the Voronoi cell containing each point.

    Product layouts are resolved axis by axis; points on a cell boundary go
    to the lower vertex index. Non-product nets use a brute-force nearest
    search with the same tie rule.
    """
    pts = np.asarray(pts, dtype=np.float64).reshape(-1, net.model.dim)
    if not net.is_product:
        return _nearest_bruteforce(net, pts)
    m = net.model
    tan_index = np.zeros(len(pts), dtype=np.int64)
    for axis, (period, count) in enumerate(zip(m.periods, net.tangential_counts)):
        s = period / count
        idx = np.ceil(np.mod(pts[:, axis], period) / s - 0.5).astype(np.int64) % count
        tan_index = tan_index * count + idx
    lo, hi = net.slab_bounds()
    h_index = np.searchsorted(hi[:-1], pts[:, -1], side="left")
    return tan_index * len(net.heights) + h_index


def _nearest_bruteforce(net, pts, chunk=2048):
    out = np.empty(len(pts), dtype=np.int64)
    for start in range(0, len(pts), chunk):
        block = pts[start : start + chunk]
        d = mf.distance(net.model, block[:, None, :], net.points[None, :, :])
        out[start : start + chunk] = np.argmin(d, axis=1)
    return out


def random_points(m, count, rng):
    """Uniform samples on ``m``."""
    sizes = np.array(m.axis_periods[:-1] + (m.height,))
    return rng.random((count, m.dim)) * sizes


def max_cell_radius(net, samples=10_000, seed=0):
    """Largest distance from a random point to the vertex of its cell.

    Bounds both the covering radius and ``max_i sup_{y in V_i} d(x_i, y)``.
    """
    rng = np.random.default_rng(seed)
    pts = random_points(net.model, samples, rng)
    cells = assign_to_cells(net, pts)
    return float(np.max(mf.distance(net.model, pts, net.points[cells])))


def monte_carlo_measures(net, samples=1_000_000, seed=0, chunk=200_000):
    """Cell measures by uniform sampling and nearest-vertex counting.

    Fallback for layouts without product structure; the declared relative
    tolerance is 1e-2.
    """
    rng = np.random.default_rng(seed)
    counts = np.zeros(net.size, dtype=np.int64)
    remaining = samples
    while remaining > 0:
        n = min(chunk, remaining)
        cells = assign_to_cells(net, random_points(net.model, n, rng))
        counts += np.bincount(cells, minlength=net.size)
        remaining -= n
    mu = mf.volume(net.model) * counts / samples
    if np.any(mu <= 0):
        raise ConstructionError("a Voronoi cell received no samples")
    return dataclasses.replace(net, mu=mu)


def from_vertices(m, points, mu, t, eps, layer=None):
    """Wrap an arbitrary vertex set (no product layout) as a net."""
    points = mf.canonical_point(m, points).reshape(-1, m.dim)
    mu = np.asarray(mu, dtype=np.float64)
    if mu.shape != (len(points),):
        raise DomainError("one measure per vertex required")
    if np.any(mu <= 0):
        raise ConstructionError("measures must be positive")
    in_xt = mf.boundary_distance(m, points) >= t - XT_TOL
    if layer is None:
        layer = np.zeros(len(points), dtype=np.int64)
    return LayeredNet(
        model=m,
        eps=float(eps),
        t=float(t),
        points=points,
        layer=np.asarray(layer, dtype=np.int64),
        mu=mu,
        in_Xt=in_xt,
        boundary_component_count=2,
    )
