"""Continuum-side operators on uniform quadrature grids.

Functions on ``M`` are sampled at the midpoints of a uniform grid of cells
(``GridFunction``). All integrals use the midpoint rule on that grid, and
ball integrals run over node-to-node offsets, so every operator here is a
finite sum that can be compared against its discrete counterpart exactly.

The grid built by :meth:`GridSpec.for_net` is aligned with the Voronoi cells
of a layered net: cell boundaries fall on grid-cell faces, so each Voronoi
cell is an exact union of grid cells and the quadrature of ``1_{V_i}`` is
exact. That makes the identities between ``P`` and ``P*`` hold to rounding.

Operators:

* ``dispersion``   ``E_r(f, V) = int_V int_{B_r(x)} |f(y) - f(x)|^2``
* ``discretize``   ``P f(x_i) = mu_i^{-1} int_{V_i} f``
* ``extend``       ``P* u = sum_i u(x_i) 1_{V_i}``
* ``smooth``       ``Lambda_r f = theta_r^{-1} int k_r(., y) f(y) dy``
* ``interpolate``  ``I u = Lambda_{rho - 2 eps} P* u``
* ``grad_energy``  ``int |df|^2`` by central differences
"""

from dataclasses import dataclass, field
from math import ceil

import numpy as np

from . import kernels
from . import manifold as mf
from . import netgen
from .errors import ConfigError, DomainError

_ALIGN_TOL = 1e-9


# ---------------------------------------------------------------------------
# grids


@dataclass(frozen=True)
class GridSpec:
    """Uniform cell-centred grid on a model.

    Node ``i`` on axis ``a`` sits at ``origin[a] + (i + 1/2) * h[a]``.
    Periodic axes cover exactly one period; the height axis covers
    ``[0, H]``.
    """

    model: mf.ManifoldModel
    origin: tuple
    h: tuple
    counts: tuple

    @property
    def dim(self):
        return self.model.dim

    @property
    def periodic(self):
        return tuple(p > 0 for p in self.model.axis_periods)

    @property
    def shape(self):
        return self.counts

    @property
    def cell_volume(self):
        return float(np.prod(self.h))

    @property
    def size(self):
        return int(np.prod(self.counts))

    def axis(self, a):
        return self.origin[a] + (np.arange(self.counts[a]) + 0.5) * self.h[a]

    def nodes(self):
        """All node coordinates, shape ``(size, dim)``, C order."""
        mesh = np.meshgrid(*[self.axis(a) for a in range(self.dim)], indexing="ij")
        return np.column_stack([m.ravel() for m in mesh])

    def boundary_distance(self):
        """Distance to the boundary at every node, shaped like the grid."""
        z = self.axis(self.dim - 1)
        bd = np.minimum(z, self.model.height - z)
        return np.broadcast_to(bd, self.counts)

    @classmethod
    def uniform(cls, m, h):
        """Grid with spacing close to ``h`` on every axis (origin 0)."""
        sizes = m.periods + (m.height,)
        counts = tuple(max(1, int(round(s / h))) for s in sizes)
        return cls(m, (0.0,) * m.dim, tuple(s / c for s, c in zip(sizes, counts)), counts)

    @classmethod
    def for_net(cls, net, refine=8):
        """Grid aligned with the Voronoi cells of a product net.

        Tangential axes use ``spacing / refine`` with the origin shifted by
        half a spacing, so cell faces sit on grid faces. The height axis uses
        ``eps / refine`` from 0; slab faces at odd multiples of ``eps/2`` are
        then grid faces as well when ``t`` and ``H`` are multiples of ``eps``.
        """
        if refine < 1:
            raise ConfigError("refine must be >= 1")
        m = net.model
        origin, h, counts = [], [], []
        for period, count in zip(m.periods, net.tangential_counts):
            s = period / count
            origin.append(-0.5 * s)
            h.append(s / refine)
            counts.append(count * refine)
        hz = net.eps / refine
        nz = max(1, int(round(m.height / hz)))
        origin.append(0.0)
        h.append(m.height / nz)
        counts.append(nz)
        return cls(m, tuple(origin), tuple(h), tuple(counts))

    def is_aligned_with(self, net):
        """True when every Voronoi cell is a union of grid cells."""
        if not net.is_product:
            return False
        for a, (period, count) in enumerate(zip(net.model.periods, net.tangential_counts)):
            ratio = (period / count) / self.h[a]
            shift = (self.origin[a] + 0.5 * period / count) / self.h[a]
            if abs(ratio - round(ratio)) > _ALIGN_TOL or abs(shift - round(shift)) > _ALIGN_TOL:
                return False
        lo, hi = net.slab_bounds()
        faces = np.concatenate([lo, hi[-1:]]) / self.h[-1]
        return bool(np.all(np.abs(faces - np.round(faces)) <= _ALIGN_TOL * max(1.0, faces.max())))


@dataclass
class GridFunction:
    """Values of a function at the nodes of a ``GridSpec``.

    ``support_depth`` declares that the function lives in ``M_s``: values at
    nodes with boundary distance below ``s`` are zero.
    """

    spec: GridSpec
    values: np.ndarray
    support_depth: float = 0.0

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=np.float64).reshape(self.spec.counts)

    @property
    def model(self):
        return self.spec.model

    def norm(self):
        return float(np.sqrt(np.sum(self.values * self.values) * self.spec.cell_volume))

    def inner(self, other):
        return float(np.sum(self.values * other.values) * self.spec.cell_volume)

    def support_ok(self, tol=1e-12):
        outside = self.spec.boundary_distance() < self.support_depth - tol
        return not np.any(self.values[outside] != 0)

    def with_values(self, values, support_depth=None):
        depth = self.support_depth if support_depth is None else support_depth
        return GridFunction(self.spec, values, depth)


def grid_function(spec, fn, support_depth=0.0):
    """Sample ``fn(points) -> values`` on the grid and cut it off at ``support_depth``.

    ``points`` has shape ``(size, dim)`` and periodic coordinates in
    ``[origin, origin + period)``.
    """
    pts = spec.nodes()
    vals = np.asarray(fn(pts), dtype=np.float64).reshape(spec.counts)
    vals = np.where(spec.boundary_distance() >= support_depth, vals, 0.0)
    return GridFunction(spec, vals, float(support_depth))


def constant(spec, c, support_depth=0.0):
    return grid_function(spec, lambda p: np.full(len(p), float(c)), support_depth)


# ---------------------------------------------------------------------------
# ball stencils


def ball_offsets(spec, r, closed=False):
    """Integer node offsets ``o`` with ``|o| < r`` (``<= r`` with ``closed``).

    Returns ``(offsets, lengths)``; ``lengths`` are the Euclidean lengths.
    Points with ``|o| = r`` are detected with a relative tolerance of 1e-12.
    """
    ranges = [np.arange(-int(ceil(r / h)), int(ceil(r / h)) + 1) for h in spec.h]
    mesh = np.meshgrid(*ranges, indexing="ij")
    offs = np.column_stack([m.ravel() for m in mesh])
    sq = np.sum((offs * np.asarray(spec.h)) ** 2, axis=1)
    r2 = r * r
    on_sphere = np.abs(sq - r2) <= 1e-12 * r2
    keep = (sq < r2) & ~on_sphere
    if closed:
        keep |= on_sphere
    return offs[keep], np.sqrt(sq[keep])


def sphere_offsets(spec, r):
    """Integer node offsets lying exactly on the sphere ``|o| = r``."""
    closed, lengths = ball_offsets(spec, r, closed=True)
    return closed[np.abs(lengths - r) <= 1e-12 * r]


def second_moment(spec, r, sphere_weight=0.0):
    """Quadrature of ``int_{B_r} o_1^2 do`` with the grid's own offsets.

    The continuum value is ``nu_n r^(n+2) / (n+2)``; on the grid the same
    sum over node offsets is what the discrete estimates actually involve.
    Cubic lattices have an isotropic second-moment tensor, so the axis does
    not matter.
    """
    offs, _ = ball_offsets(spec, r)
    m2 = float(np.sum((offs[:, 0] * spec.h[0]) ** 2))
    if sphere_weight:
        sph = sphere_offsets(spec, r)
        m2 += sphere_weight * float(np.sum((sph[:, 0] * spec.h[0]) ** 2))
    return m2 * spec.cell_volume


def _check_ball_domain(spec, mask, r, what):
    if not np.any(mask):
        return
    bd = np.broadcast_to(spec.boundary_distance(), spec.counts)[mask]
    if bd.min() <= r * (1 - 1e-12):
        raise DomainError(
            f"{what}: balls of radius {r:.6g} reach the boundary "
            f"(closest point at distance {bd.min():.6g})"
        )


def dispersion(f, r, t=None, region=None, per_node=False, sphere_weight=0.0):
    """Average dispersion ``E_r(f, V)``.

    Parameters
    ----------
    f : GridFunction
    r : ball radius
    t : if given, ``V`` is restricted to ``M_t``
    region : optional boolean mask over the grid, intersected with ``M_t``
    per_node : also return the inner integral at every node of ``V``
    sphere_weight : weight of the offsets with ``|o| = r`` exactly (the
        ball is open by default, so they are left out)

    Raises
    ------
    DomainError
        When a ball around a point of ``V`` meets the boundary.
    """
    if not r > 0:
        raise DomainError("radius must be positive")
    spec = f.spec
    mask = np.ones(spec.counts, dtype=bool) if region is None else np.asarray(region, dtype=bool)
    if t is not None:
        mask = mask & (spec.boundary_distance() >= t - 1e-12)
    _check_ball_domain(spec, mask, r, "dispersion")
    offs, _ = ball_offsets(spec, r)
    inner = kernels.ball_dispersion(f.values, offs, spec.periodic)
    if sphere_weight:
        sph = sphere_offsets(spec, r)
        if len(sph):
            inner = inner + sphere_weight * kernels.ball_dispersion(f.values, sph, spec.periodic)
    inner = inner * spec.cell_volume
    total = float(np.sum(inner[mask]) * spec.cell_volume)
    if per_node:
        return total, np.where(mask, inner, 0.0)
    return total


# ---------------------------------------------------------------------------
# discretization and extension


def node_cells(spec, net):
    """Voronoi cell index of every grid node (C order)."""
    pts = spec.nodes()
    for a, period in enumerate(spec.model.periods):
        pts[:, a] = np.mod(pts[:, a], period)
    return netgen.assign_to_cells(net, pts)


def _grid_fine_enough(spec, net):
    limit = net.max_spacing / 8.0 * (1 + 1e-9)
    if max(spec.h) > limit:
        raise DomainError(f"grid spacing {max(spec.h):.6g} exceeds eps/8 = {limit:.6g}")


def discretize(f, net, cells=None):
    """``P f``: cell averages, returned as a vector over all vertices of ``net``.

    Requires ``f`` to live in ``M_{t + eps/2}``.
    """
    _grid_fine_enough(f.spec, net)
    need = net.t + 0.5 * net.eps
    if f.support_depth < need - 1e-12 or not f.support_ok():
        raise DomainError(f"P needs support in M_(t+eps/2) = M_{need:.6g}")
    if cells is None:
        cells = node_cells(f.spec, net)
    mass = np.bincount(cells, weights=f.values.ravel(), minlength=net.size) * f.spec.cell_volume
    return mass / net.mu


def extend(u, net, spec, cells=None):
    """``P* u``: the piecewise-constant lift of a vertex function.

    ``u`` is a vector over all vertices and must vanish outside ``X_t``. The
    result's support depth is the lower face of the deepest slab carrying a
    vertex of ``X_t``, i.e. ``t - eps/2``.
    """
    u = np.asarray(u, dtype=np.float64)
    if u.shape != (net.size,):
        raise DomainError(f"expected a vector of length {net.size}")
    if np.any(u[~net.in_Xt] != 0):
        raise DomainError("P* needs u supported in X_t")
    _grid_fine_enough(spec, net)
    if cells is None:
        cells = node_cells(spec, net)
    return GridFunction(spec, u[cells], max(net.t - 0.5 * net.eps, 0.0))


def cell_grid_measure(spec, net, cells=None):
    """Grid quadrature of every cell's volume (equals ``mu`` on aligned grids)."""
    if cells is None:
        cells = node_cells(spec, net)
    return np.bincount(cells, minlength=net.size) * spec.cell_volume


# ---------------------------------------------------------------------------
# kernel and smoothing


def psi(s, n):
    """Quadratic bump ``(n+2)/(2 nu_n) (1 - s^2)`` on ``[0, 1]``, zero beyond."""
    s = np.asarray(s, dtype=np.float64)
    c = (n + 2) / (2.0 * mf.unit_ball_volume(n))
    return np.where(s <= 1.0, c * (1.0 - s * s), 0.0)


@dataclass(frozen=True)
class KernelSpec:
    r: float
    n: int

    @property
    def normalization(self):
        return (self.n + 2) / (2.0 * mf.unit_ball_volume(self.n))

    @property
    def bound(self):
        """Upper bound ``(n+2)/(nu_n r^n)`` on ``|k_r|``."""
        return (self.n + 2) / (mf.unit_ball_volume(self.n) * self.r**self.n)


def kernel_eval(ks, m, x, y):
    """``k_r(x, y) = r^-n psi(d(x, y) / r)``; ``x`` must be farther than ``r`` from the boundary."""
    x = np.asarray(x, dtype=np.float64)
    if np.any(mf.boundary_distance(m, x) <= ks.r):
        raise DomainError("kernel centre too close to the boundary")
    val = ks.r ** (-ks.n) * psi(mf.distance(m, x, y) / ks.r, ks.n)
    assert np.all(val <= ks.bound)
    return val


def psi_integral(n, resolution=400):
    """Midpoint quadrature of ``int_{R^n} psi(|x|) dx`` on a grid of step ``1/resolution``."""
    h = 1.0 / resolution
    k = (np.arange(-resolution, resolution) + 0.5) * h
    if n == 1:
        return float(np.sum(psi(np.abs(k), 1)) * h)
    total = 0.0
    if n == 2:
        for x in k:
            total += float(np.sum(psi(np.hypot(x, k), 2)))
        return total * h * h
    for x in k:
        yy, zz = np.meshgrid(k, k, indexing="ij")
        total += float(np.sum(psi(np.sqrt(x * x + yy * yy + zz * zz), 3)))
    return total * h**3


def theta(ks, m, x, resolution=100):
    """``theta_r(x) = int_{B_r(x)} k_r(x, y) dy`` by midpoint quadrature.

    The quadrature cells have side ``r / resolution`` and are centred
    symmetrically about ``x``; distances are geodesic on ``m``.
    """
    x = np.asarray(x, dtype=np.float64)
    if mf.boundary_distance(m, x) <= ks.r:
        raise DomainError("theta needs boundary distance > r")
    h = ks.r / resolution
    k = (np.arange(-resolution, resolution) + 0.5) * h
    mesh = np.meshgrid(*([k] * m.dim), indexing="ij")
    pts = x + np.stack([g.ravel() for g in mesh], axis=1)
    vals = ks.r ** (-ks.n) * psi(mf.distance(m, x, pts) / ks.r, ks.n)
    return float(np.sum(vals) * h**m.dim)


def _smoothing_stencil(spec, r):
    n = spec.dim
    offs, lengths = ball_offsets(spec, r)
    w = r ** (-n) * psi(lengths / r, n) * spec.cell_volume
    return offs, w, float(np.sum(w))


def grid_theta(spec, r):
    """Quadrature value of ``theta_r`` used by :func:`smooth` (same at every interior node)."""
    return _smoothing_stencil(spec, r)[2]


def _check_smoothing(f, r):
    if not r > 0:
        raise DomainError("smoothing radius must be positive")
    if not f.support_depth - r > r:
        raise DomainError(
            f"smoothing radius {r:.6g} too large for support depth {f.support_depth:.6g} "
            "(output points would see the boundary)"
        )


def smooth(f, r):
    """Normalized smoothing ``Lambda_r f`` on the grid of ``f``.

    The result lives in ``M_{s - r}`` where ``s`` is the support depth of
    ``f``; ``s > 2r`` is required so that no ball around an output point
    meets the boundary. ``theta_r`` is evaluated with the same stencil, so
    constants are reproduced exactly.
    """
    _check_smoothing(f, r)
    offs, w, th = _smoothing_stencil(f.spec, r)
    out = kernels.ball_correlate(f.values, offs, w / th, f.spec.periodic)
    depth = f.support_depth - r
    out = np.where(f.spec.boundary_distance() >= depth - 1e-12, out, 0.0)
    return GridFunction(f.spec, out, depth)


def smooth_raw(f, r):
    """Unnormalized ``Lambda_r^0 f``."""
    _check_smoothing(f, r)
    offs, w, _ = _smoothing_stencil(f.spec, r)
    out = kernels.ball_correlate(f.values, offs, w, f.spec.periodic)
    return GridFunction(f.spec, out, f.support_depth - r)


def grad_smooth_analytic(f, r):
    """Gradient of ``Lambda_r f`` through the kernel gradient.

    ``grad_x k_r(x, y) = (n+2)/(nu_n r^(n+2)) (y - x)`` inside the ball, so
    each component is a stencil sum with weights ``c * o_a``. Offsets on the
    sphere ``|o| = r`` enter with weight 1/2 (trapezoid rule for the jump of
    the kernel gradient there). ``theta_r`` is constant on the grid, so its
    gradient term drops out.

    Returns an array of shape ``(dim,) + grid shape``.
    """
    _check_smoothing(f, r)
    spec = f.spec
    n = spec.dim
    th = grid_theta(spec, r)
    offs, lengths = ball_offsets(spec, r, closed=True)
    half = np.where(np.abs(lengths - r) <= 1e-12 * r, 0.5, 1.0)
    c = (n + 2) / (mf.unit_ball_volume(n) * r ** (n + 2))
    out = np.empty((n,) + spec.counts)
    for a in range(n):
        wa = c * offs[:, a] * spec.h[a] * half * spec.cell_volume / th
        out[a] = kernels.ball_correlate(f.values, offs, wa, spec.periodic)
    return out


def smoothing_gradient_bound(f, r, region=None):
    """Right-hand side of the gradient estimate for ``Lambda_r f`` on the grid.

    Cauchy-Schwarz applied to the stencil of :func:`grad_smooth_analytic`
    gives ``|grad Lambda_r f(x)|^2 <= (c/theta)^2 M2 E_r(f, x)`` with
    ``c = (n+2)/(nu_n r^(n+2))``, ``M2`` the grid second moment and the
    dispersion taken with half weight on the sphere. In the continuum
    ``(c/theta)^2 M2 = (n+2)/(nu_n r^(n+2))``.
    """
    spec = f.spec
    n = spec.dim
    c = (n + 2) / (mf.unit_ball_volume(n) * r ** (n + 2))
    th = grid_theta(spec, r)
    m2 = second_moment(spec, r, sphere_weight=0.5)
    E = dispersion(f, r, region=region, sphere_weight=0.5)
    return (c / th) ** 2 * m2 * E


def interpolate(u, g, spec, cells=None):
    """``I u = Lambda_{rho - 2 eps} P* u`` for a vertex function ``u``.

    ``u`` may be a full vertex vector or a vector over ``X_t`` only.

    Raises
    ------
    ConfigError
        When ``2 eps >= rho``.
    """
    net = g.net
    eps = net.max_spacing
    if not 2.0 * eps < g.rho:
        raise ConfigError(f"interpolation needs 2*eps < rho ({2 * eps:.6g} >= {g.rho:.6g})")
    u = np.asarray(u, dtype=np.float64)
    if u.shape == (int(np.count_nonzero(net.in_Xt)),) and u.shape != (net.size,):
        full = np.zeros(net.size)
        full[net.in_Xt] = u
        u = full
    return smooth(extend(u, net, spec, cells=cells), g.rho - 2.0 * eps)


# ---------------------------------------------------------------------------
# gradients


@dataclass
class GradEnergy:
    value: float
    flagged: np.ndarray = field(default_factory=lambda: np.zeros(0, dtype=np.int64))

    @property
    def flagged_count(self):
        return len(self.flagged)


def gradient(f):
    """Central-difference gradient, shape ``(dim,) + grid shape``.

    Periodic axes wrap; on the height axis the first and last nodes use
    one-sided differences. Also returns the boolean mask of nodes where a
    one-sided stencil met a nonzero value.
    """
    v = f.values
    spec = f.spec
    grads = np.empty((spec.dim,) + spec.counts)
    flagged = np.zeros(spec.counts, dtype=bool)
    for a in range(spec.dim):
        h = spec.h[a]
        if spec.periodic[a]:
            grads[a] = (np.roll(v, -1, axis=a) - np.roll(v, 1, axis=a)) / (2 * h)
            continue
        g = np.empty_like(v)
        inner = [slice(None)] * v.ndim
        up = [slice(None)] * v.ndim
        dn = [slice(None)] * v.ndim
        inner[a], up[a], dn[a] = slice(1, -1), slice(2, None), slice(None, -2)
        g[tuple(inner)] = (v[tuple(up)] - v[tuple(dn)]) / (2 * h)
        for edge, nxt in ((0, 1), (-1, -2)):
            sel = [slice(None)] * v.ndim
            sel2 = [slice(None)] * v.ndim
            sel[a], sel2[a] = edge, nxt
            sign = 1.0 if edge == 0 else -1.0
            g[tuple(sel)] = sign * (v[tuple(sel2)] - v[tuple(sel)]) / h
            flagged[tuple(sel)] |= v[tuple(sel)] != 0
        grads[a] = g
    return grads, flagged


def grad_energy(f, region=None):
    """``int |df|^2`` by central differences.

    Nodes where a one-sided boundary stencil meets a nonzero value are
    excluded from the sum and returned in ``flagged`` (flat indices).
    """
    grads, flagged = gradient(f)
    dens = np.sum(grads * grads, axis=0)
    keep = ~flagged
    if region is not None:
        keep &= np.asarray(region, dtype=bool)
    return GradEnergy(
        value=float(np.sum(dens[keep]) * f.spec.cell_volume),
        flagged=np.flatnonzero(flagged),
    )


def vector_energy(spec, grads, region=None):
    """``int |G|^2`` for a gradient field sampled on the grid."""
    dens = np.sum(np.asarray(grads) ** 2, axis=0)
    if region is not None:
        dens = np.where(region, dens, 0.0)
    return float(np.sum(dens) * spec.cell_volume)


def lipschitz_estimate(f):
    """Largest central-difference gradient norm (a Lipschitz constant estimate)."""
    grads, _ = gradient(f)
    return float(np.sqrt(np.max(np.sum(grads * grads, axis=0))))


# ---------------------------------------------------------------------------
# test functions


def sine_bump(spec, depth, modes=(), j=1):
    """Product of ``sin(j pi (z - s)/(H - 2s))`` with tangential cosines.

    Vanishes outside ``M_s`` for ``s = depth``; ``modes`` gives one integer
    frequency per periodic axis.
    """
    m = spec.model
    span = m.height - 2.0 * depth
    if span <= 0:
        raise DomainError("support depth leaves no interior")
    modes = tuple(modes) + (0,) * (len(m.periods) - len(modes))

    def fn(p):
        z = p[:, -1]
        val = np.sin(j * np.pi * (z - depth) / span)
        for a, (period, k) in enumerate(zip(m.periods, modes)):
            val = val * np.cos(2 * np.pi * k * p[:, a] / period)
        return val

    return grid_function(spec, fn, depth)


def random_trig(spec, depth, seed, degree=3):
    """Random trigonometric polynomial times a sine envelope vanishing at ``depth``.

    Coefficients decay like ``1/(1 + |k|^2)`` so the function stays smooth.
    """
    rng = np.random.default_rng(seed)
    m = spec.model
    span = m.height - 2.0 * depth
    if span <= 0:
        raise DomainError("support depth leaves no interior")
    freqs = np.array(np.meshgrid(*([np.arange(-degree, degree + 1)] * m.dim), indexing="ij"))
    freqs = freqs.reshape(m.dim, -1).T
    amp = rng.standard_normal(len(freqs)) / (1.0 + np.sum(freqs**2, axis=1))
    phase = rng.uniform(0, 2 * np.pi, len(freqs))
    scales = np.array(m.periods + (span,))

    def fn(p):
        z = p[:, -1]
        local = p.copy()
        local[:, -1] = z - depth
        arg = 2 * np.pi * (local / scales) @ freqs.T + phase
        poly = np.cos(arg) @ amp
        return poly * np.sin(np.pi * (z - depth) / span)

    return grid_function(spec, fn, depth)


def function_family(spec, depth, seeds=(0, 1, 2)):
    """Fixed test functions: two sine bumps and a few random trigonometric ones."""
    fams = [("sine_1", sine_bump(spec, depth))]
    if spec.model.periods:
        fams.append(("sine_m1", sine_bump(spec, depth, modes=(1,) * len(spec.model.periods))))
    else:
        fams.append(("sine_2", sine_bump(spec, depth, j=2)))
    for s in seeds:
        fams.append((f"trig_{s}", random_trig(spec, depth, seed=s)))
    return fams


# ---------------------------------------------------------------------------
# text serialization


def write_grid_function(f, path):
    """Header with the grid spec, then one value per line (17 significant digits)."""
    spec = f.spec
    desc = spec.model.describe()
    lines = ["# schema=1", "# kind=" + desc["kind"]]
    lines += [f"# {k}={v!r}" for k, v in desc.items() if k != "kind"]
    lines.append(f"# support_depth={f.support_depth!r}")
    for a in range(spec.dim):
        lines.append(f"# axis{a} origin={spec.origin[a]!r} h={spec.h[a]!r} count={spec.counts[a]}")
    lines += [f"{v:.17g}" for v in f.values.ravel()]
    with open(path, "w") as fh:
        fh.write("\n".join(lines) + "\n")


def read_grid_function(path):
    header, values = {}, []
    axes = []
    with open(path) as fh:
        for line in fh:
            line = line.strip()
            if not line:
                continue
            if line.startswith("#"):
                body = line[1:].strip()
                if body.startswith("axis"):
                    parts = dict(item.split("=") for item in body.split()[1:])
                    axes.append((float(parts["origin"]), float(parts["h"]), int(parts["count"])))
                else:
                    key, _, val = body.partition("=")
                    header[key] = val
            else:
                values.append(float(line))
    if header.get("schema") != "1":
        raise DomainError("unsupported grid function schema")
    desc = {k: v for k, v in header.items() if k not in ("schema", "support_depth")}
    m = mf.from_descriptor(desc)
    spec = GridSpec(m, tuple(a[0] for a in axes), tuple(a[1] for a in axes), tuple(a[2] for a in axes))
    return GridFunction(spec, np.array(values), float(header["support_depth"]))
