import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from cylgraph import manifold as mf
from cylgraph.errors import DomainError, InvalidTruncation


def test_distance_examples():
    assert mf.distance(mf.interval(1.0), [0.2], [0.7]) == pytest.approx(0.5, abs=1e-15)
    cyl = mf.flat_cylinder2(1.0, 1.0)
    assert mf.distance(cyl, [0.9, 0.5], [0.1, 0.5]) == pytest.approx(0.2, abs=1e-15)
    assert mf.distance(cyl, [0.0, 0.0], [0.5, 0.5]) == pytest.approx(math.sqrt(0.5), abs=1e-15)


def test_boundary_distance_examples():
    assert mf.boundary_distance(mf.interval(1.0), [0.3]) == pytest.approx(0.3)
    cyl = mf.flat_cylinder2(1.0, 1.0)
    assert mf.boundary_distance(cyl, [0.4, 0.8]) == pytest.approx(0.2)
    assert mf.boundary_distance(cyl, [0.4, 0.5]) == pytest.approx(0.5)


def test_volumes():
    assert mf.truncated_volume(mf.interval(1.0), 0.0) == 1.0
    assert mf.volume(mf.flat_cylinder2(2.0, 1.0)) == 2.0
    assert mf.truncated_volume(mf.flat_cylinder2(1.0, 1.0), 0.2) == pytest.approx(0.6)
    assert mf.volume(mf.flat_cylinder3(1.0, 2.0, 3.0)) == 6.0
    with pytest.raises(InvalidTruncation):
        mf.truncated_volume(mf.interval(1.0), 0.5)


def test_truncated_volume_decreasing():
    m = mf.flat_cylinder2(1.3, 0.9)
    ts = np.linspace(0, m.s0, 50, endpoint=False)
    vols = [mf.truncated_volume(m, t) for t in ts]
    assert vols[0] == mf.volume(m)
    assert all(b < a for a, b in zip(vols, vols[1:]))


def test_normal_project_examples():
    cyl = mf.flat_cylinder2(1.0, 1.0)
    np.testing.assert_allclose(mf.normal_project(cyl, [0.25, 0.0], 0.3), [0.25, 0.3])
    np.testing.assert_allclose(mf.normal_project(cyl, [0.25, 1.0], 0.3), [0.25, 0.7])
    np.testing.assert_allclose(mf.normal_project(mf.interval(1.0), [0.0], 0.1), [0.1])
    with pytest.raises(DomainError):
        mf.normal_project(cyl, [0.25, 0.5], 0.1)


def test_unit_ball_volume():
    assert mf.unit_ball_volume(1) == pytest.approx(2.0)
    assert mf.unit_ball_volume(2) == pytest.approx(math.pi)
    assert mf.unit_ball_volume(3) == pytest.approx(4 * math.pi / 3)


def test_model_validation():
    with pytest.raises(DomainError):
        mf.flat_cylinder2(-1.0, 1.0)
    with pytest.raises(DomainError):
        mf.ManifoldModel("Torus", (1.0,), 1.0)
    with pytest.raises(DomainError):
        mf.ManifoldModel("FlatCylinder2", (), 1.0)
    m = mf.flat_cylinder3(1.0, 2.0, 0.8)
    assert m.dim == 3 and m.s0 == pytest.approx(0.4)
    assert mf.interval(2.0).injectivity_radius == math.inf


def test_descriptor_round_trip():
    for m in (mf.interval(1.5), mf.flat_cylinder2(1.0, 2.0), mf.flat_cylinder3(1.0, 0.5, 2.0)):
        assert mf.from_descriptor(m.describe()) == m
    assert mf.parse_model("cylinder2:C=1,H=1") == mf.flat_cylinder2(1.0, 1.0)
    assert mf.parse_model("interval:L=1") == mf.interval(1.0)
    with pytest.raises(DomainError):
        mf.parse_model("interval:C=1")


def test_canonical_point_wraps_and_validates():
    m = mf.flat_cylinder2(1.0, 1.0)
    np.testing.assert_allclose(mf.canonical_point(m, [1.25, 0.5]), [0.25, 0.5])
    np.testing.assert_allclose(mf.canonical_point(m, [-0.25, 0.5]), [0.75, 0.5])
    with pytest.raises(DomainError):
        mf.canonical_point(m, [0.1, 1.5])


coord = st.floats(0.0, 1.0, allow_nan=False)
point2 = st.tuples(st.floats(-3.0, 3.0, allow_nan=False), coord)


@settings(max_examples=200, deadline=None)
@given(point2, point2, point2)
def test_distance_is_a_metric(p, q, r):
    m = mf.flat_cylinder2(1.0, 1.0)
    d = lambda a, b: float(mf.distance(m, a, b))  # noqa: E731
    assert d(p, p) == pytest.approx(0.0, abs=1e-12)
    assert d(p, q) == pytest.approx(d(q, p), abs=1e-12)
    assert d(p, r) <= d(p, q) + d(q, r) + 1e-12
    assert d(p, q) >= 0.0


@settings(max_examples=100, deadline=None)
@given(st.floats(0.0, 1.0), st.floats(0.0, 0.5), st.booleans())
def test_normal_project_depth(theta, t, top):
    m = mf.flat_cylinder2(1.0, 1.0)
    p = mf.normal_project(m, [theta, 1.0 if top else 0.0], t)
    assert mf.boundary_distance(m, p) == pytest.approx(t, abs=1e-15)
