"""Flat product manifolds with cylindrical boundary.

Three models are supported, all of the form ``T x [0, H]`` with ``T`` a flat
torus of dimension 0, 1 or 2:

* ``Interval``       -- ``[0, L]``                 (n = 1)
* ``FlatCylinder2``  -- ``S^1_C x [0, H]``         (n = 2)
* ``FlatCylinder3``  -- ``T^2_{a,b} x [0, H]``     (n = 3)

Points are arrays whose last coordinate is the height (the normal
coordinate); the leading coordinates are periodic. Every model is flat and
the whole collar ``{d(x, dM) < H/2}`` is a metric product, so the cylindrical
width is ``s0 = H/2``.
"""

from dataclasses import dataclass
from math import gamma, pi

import numpy as np

from .errors import DomainError, InvalidTruncation

KINDS = ("Interval", "FlatCylinder2", "FlatCylinder3")

BOUNDARY_TOL = 1e-12


@dataclass(frozen=True)
class ManifoldModel:
    kind: str
    periods: tuple
    height: float

    def __post_init__(self):
        if self.kind not in KINDS:
            raise DomainError(f"unknown model kind {self.kind!r}")
        expected = KINDS.index(self.kind)
        if len(self.periods) != expected:
            raise DomainError(f"{self.kind} needs {expected} period(s), got {len(self.periods)}")
        sizes = tuple(self.periods) + (self.height,)
        if not all(np.isfinite(s) and s > 0 for s in sizes):
            raise DomainError(f"size parameters must be positive, got {sizes}")
        object.__setattr__(self, "periods", tuple(float(p) for p in self.periods))
        object.__setattr__(self, "height", float(self.height))

    @property
    def dim(self):
        return len(self.periods) + 1

    @property
    def s0(self):
        """Cylindrical width: half the height."""
        return self.height / 2.0

    @property
    def injectivity_radius(self):
        """Injectivity parameter i0 = min(period/2), infinite for the interval."""
        if not self.periods:
            return float("inf")
        return min(p / 2.0 for p in self.periods)

    @property
    def axis_periods(self):
        """Per-axis period, 0.0 for the height axis."""
        return self.periods + (0.0,)

    def describe(self):
        """Flat key-value descriptor, e.g. ``{"kind": "FlatCylinder2", "C": 1.0, "H": 1.0}``."""
        if self.kind == "Interval":
            return {"kind": self.kind, "L": self.height}
        if self.kind == "FlatCylinder2":
            return {"kind": self.kind, "C": self.periods[0], "H": self.height}
        return {"kind": self.kind, "a": self.periods[0], "b": self.periods[1], "H": self.height}


def interval(L):
    return ManifoldModel("Interval", (), L)


def flat_cylinder2(C, H):
    return ManifoldModel("FlatCylinder2", (C,), H)


def flat_cylinder3(a, b, H):
    return ManifoldModel("FlatCylinder3", (a, b), H)


_ALIASES = {
    "interval": "Interval",
    "cylinder2": "FlatCylinder2",
    "flatcylinder2": "FlatCylinder2",
    "cylinder": "FlatCylinder2",
    "cylinder3": "FlatCylinder3",
    "flatcylinder3": "FlatCylinder3",
}


def from_descriptor(desc):
    """Inverse of :meth:`ManifoldModel.describe`."""
    try:
        kind = _ALIASES.get(str(desc["kind"]).lower(), desc["kind"])
        if kind == "Interval":
            return interval(float(desc["L"]))
        if kind == "FlatCylinder2":
            return flat_cylinder2(float(desc["C"]), float(desc["H"]))
        if kind == "FlatCylinder3":
            return flat_cylinder3(float(desc["a"]), float(desc["b"]), float(desc["H"]))
    except KeyError as exc:
        raise DomainError(f"model descriptor {desc!r} is missing key {exc}") from None
    raise DomainError(f"unknown model kind {desc.get('kind')!r}")


def parse_model(text):
    """Parse ``"interval:L=1"`` or ``"cylinder2:C=1,H=1"`` into a model."""
    kind, _, rest = text.partition(":")
    desc = {"kind": kind.strip()}
    for item in filter(None, (s.strip() for s in rest.split(","))):
        key, _, value = item.partition("=")
        desc[key.strip()] = value.strip()
    return from_descriptor(desc)


def canonical_point(m, p):
    """Reduce periodic coordinates into ``[0, period)``; validate the height."""
    p = np.array(p, dtype=np.float64, ndmin=1)
    if p.shape[-1] != m.dim:
        raise DomainError(f"point has {p.shape[-1]} coordinates, model needs {m.dim}")
    for axis, period in enumerate(m.periods):
        p[..., axis] = np.mod(p[..., axis], period)
        # np.mod can return the period itself for tiny negative inputs
        p[..., axis] = np.where(p[..., axis] >= period, 0.0, p[..., axis])
    h = p[..., -1]
    if np.any(h < -BOUNDARY_TOL) or np.any(h > m.height + BOUNDARY_TOL):
        raise DomainError(f"height outside [0, {m.height}]")
    return p


def distance(m, p, q):
    """Geodesic distance on the flat product; broadcasts over leading axes."""
    p = np.asarray(p, dtype=np.float64)
    q = np.asarray(q, dtype=np.float64)
    sq = 0.0
    for axis, period in enumerate(m.axis_periods):
        d = np.abs(p[..., axis] - q[..., axis])
        if period > 0.0:
            d = np.mod(d, period)
            d = np.minimum(d, period - d)
        sq = sq + d * d
    return np.sqrt(sq)


def boundary_distance(m, p):
    h = np.asarray(p, dtype=np.float64)[..., -1]
    return np.minimum(h, m.height - h)


def volume(m):
    return float(np.prod(m.periods)) * m.height


def truncated_volume(m, t):
    """Volume of ``M_t = {d(x, dM) >= t}``; requires ``0 <= t < s0``."""
    if t < 0 or t >= m.s0:
        raise InvalidTruncation(f"truncation depth {t} outside [0, {m.s0})")
    return float(np.prod(m.periods)) * (m.height - 2.0 * t)


def on_boundary(m, p, tol=BOUNDARY_TOL):
    return np.asarray(boundary_distance(m, p)) <= tol


def normal_project(m, b, t):
    """Move a boundary point ``b`` a distance ``t`` along the inward normal."""
    b = np.array(b, dtype=np.float64, ndmin=1)
    if not np.all(on_boundary(m, b)):
        raise DomainError("normal_project needs a point on the boundary")
    if t < 0 or t > m.s0:
        raise DomainError(f"projection depth {t} outside [0, {m.s0}]")
    out = b.copy()
    h = b[..., -1]
    out[..., -1] = np.where(h <= m.s0, t, m.height - t)
    return out


def unit_ball_volume(n):
    """Volume of the Euclidean unit ball in dimension ``n``."""
    if n < 1:
        raise DomainError("dimension must be >= 1")
    return pi ** (n / 2.0) / gamma(n / 2.0 + 1.0)
