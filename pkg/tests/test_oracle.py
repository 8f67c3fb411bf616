import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from cylgraph import manifold as mf
from cylgraph import oracle
from cylgraph.errors import DomainError, InvalidTruncation


def test_interval_examples():
    assert oracle.interval_spectrum(1.0, 0.0, 1)[1] == pytest.approx(math.pi**2, rel=1e-15)
    s = oracle.interval_spectrum(1.0, 0.1, 5)
    assert s[1] == pytest.approx(15.4212569, rel=1e-8)
    np.testing.assert_allclose(s.values / s[1], np.arange(1, 6) ** 2, rtol=1e-14)
    with pytest.raises(InvalidTruncation):
        oracle.interval_spectrum(1.0, 0.5, 1)
    with pytest.raises(DomainError):
        oracle.interval_spectrum(1.0, 0.1, 0)
    with pytest.raises(IndexError):
        s[0]


def test_cylinder_examples():
    s = oracle.cylinder_spectrum(1.0, 1.0, 0.2, 5)
    assert s.count == 5
    assert s[1] == pytest.approx(27.4155678, rel=1e-8)
    assert s[2] == pytest.approx(66.8939856, rel=1e-8)
    assert s[3] == pytest.approx(66.8939856, rel=1e-8)
    assert s[4] == pytest.approx(109.6622713, rel=1e-8)
    assert s[5] == pytest.approx((2 * math.pi / 0.6) ** 2 + 4 * math.pi**2, rel=1e-12)


def brute_force(periods, height, t, K, pad=4):
    length = height - 2 * t
    ranges = [range(-K - pad, K + pad + 1) for _ in periods]
    vals = []
    for j in range(1, K + pad + 1):
        for ms in np.array(np.meshgrid(*ranges, indexing="ij")).reshape(len(periods), -1).T if periods else [()]:
            v = (j * math.pi / length) ** 2
            v += sum((2 * math.pi * mm / p) ** 2 for mm, p in zip(ms, periods))
            vals.append(v)
    return np.sort(vals)[:K]


@settings(max_examples=40, deadline=None)
@given(
    st.floats(0.3, 3.0),
    st.floats(0.3, 3.0),
    st.floats(0.0, 0.45),
    st.integers(1, 12),
)
def test_enumeration_is_complete(C, H, tfrac, K):
    t = tfrac * H
    got = oracle.cylinder_spectrum(C, H, t, K).values
    np.testing.assert_allclose(got, brute_force((C,), H, t, K), rtol=1e-12)


def test_three_dimensional_enumeration():
    got = oracle.product_spectrum((1.0, 0.7), 1.0, 0.1, 15).values
    np.testing.assert_allclose(got, brute_force((1.0, 0.7), 1.0, 0.1, 15), rtol=1e-12)


def test_weyl_counting():
    C, H, t = 1.0, 1.0, 0.0
    lam = 4000.0
    K = 600
    vals = oracle.cylinder_spectrum(C, H, t, K).values
    assert vals[-1] > lam
    count = int(np.sum(vals <= lam))
    weyl = C * H * lam / (4 * math.pi)
    assert 0.5 * weyl <= count <= 2.0 * weyl


def test_model_dispatch():
    assert oracle.model_spectrum(mf.interval(1.0), 0.1, 2)[2] == pytest.approx(4 * (math.pi / 0.8) ** 2)
    s = oracle.model_spectrum(mf.flat_cylinder3(1.0, 1.0, 1.0), 0.0, 3)
    assert s[1] == pytest.approx(math.pi**2)


def test_limit_check_interval():
    rep = oracle.spectrum_limit_check(mf.interval(1.0), [0.2, 0.1, 0.05, 0.01], 3)
    expected = [(math.pi / (1 - 2 * t)) ** 2 for t in (0.2, 0.1, 0.05, 0.01)]
    np.testing.assert_allclose(rep.paths[0], expected, rtol=1e-14)
    assert rep.paths[0][1] == pytest.approx(15.421257, rel=1e-7)
    assert rep.limit[0] == pytest.approx(math.pi**2)
    assert rep.gap_decreasing and rep.monotone_in_t and rep.passed
    np.testing.assert_allclose(np.array(rep.paths[2]) / np.array(rep.paths[0]), 9.0, rtol=1e-13)
    with pytest.raises(DomainError):
        oracle.spectrum_limit_check(mf.interval(1.0), [0.1, 0.2], 1)


@settings(max_examples=50, deadline=None)
@given(st.floats(0.0, 0.49), st.floats(0.0, 0.49), st.integers(1, 10))
def test_domain_monotonicity(t1, t2, K):
    lo, hi = sorted((t1, t2))
    a = oracle.cylinder_spectrum(1.0, 1.0, lo, K).values
    b = oracle.cylinder_spectrum(1.0, 1.0, hi, K).values
    assert np.all(b >= a * (1 - 1e-14))
