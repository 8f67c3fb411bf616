"""Closed-form Dirichlet spectra of the flat models and their truncations.

The truncated domain ``M_t`` of ``T x [0, H]`` is ``T x [t, H - t]``, so its
Dirichlet spectrum is the sum of the torus spectrum and the interval
spectrum ``(j pi / (H - 2t))^2``, ``j >= 1``. Eigenvalues are returned as a
flat nondecreasing list with repeats, so ``values[k-1]`` is the k-th
eigenvalue counted with multiplicity.
"""

from dataclasses import dataclass
from math import ceil, pi, sqrt

import numpy as np

from .errors import DomainError, InvalidTruncation


@dataclass(frozen=True)
class AnalyticSpectrum:
    model: object
    t: float
    values: np.ndarray

    @property
    def count(self):
        return len(self.values)

    def __getitem__(self, k):
        """1-based access: ``spec[1]`` is the first eigenvalue."""
        if k < 1:
            raise IndexError("eigenvalues are indexed from 1")
        return float(self.values[k - 1])


def _check(height, t, K):
    if K < 1:
        raise DomainError("K must be >= 1")
    if t < 0 or t >= height / 2.0:
        raise InvalidTruncation(f"truncation depth {t} outside [0, {height / 2.0})")
    return height - 2.0 * t


def interval_spectrum(L, t, K, model=None):
    """``(k pi / (L - 2t))^2`` for ``k = 1..K``."""
    length = _check(L, t, K)
    k = np.arange(1, K + 1, dtype=np.float64)
    return AnalyticSpectrum(model, float(t), (k * pi / length) ** 2)


def _torus_modes(periods, bound):
    """All torus eigenvalues ``sum (2 pi m_a / p_a)^2`` not exceeding ``bound``."""
    vals = np.zeros(1)
    for p in periods:
        mmax = int(ceil(p * sqrt(bound) / (2 * pi))) + 1
        m = np.arange(-mmax, mmax + 1, dtype=np.float64)
        axis_vals = (2 * pi * m / p) ** 2
        vals = (vals[:, None] + axis_vals[None, :]).ravel()
        vals = vals[vals <= bound * (1 + 1e-12)]
    return vals


def product_spectrum(periods, height, t, K, model=None):
    """First ``K`` Dirichlet eigenvalues of ``T_periods x [t, H - t]``.

    ``(K pi / (H - 2t))^2`` is itself the K-th of K eigenvalues, so it bounds
    the answer; every mode below that bound is enumerated before sorting.
    """
    length = _check(height, t, K)
    bound = (K * pi / length) ** 2
    torus = np.sort(_torus_modes(periods, bound))
    j = np.arange(1, K + 1, dtype=np.float64)
    normal = (j * pi / length) ** 2
    vals = (torus[:, None] + normal[None, :]).ravel()
    vals = np.sort(vals[vals <= bound * (1 + 1e-12)])
    if len(vals) < K:
        raise AssertionError("enumeration bound failed")  # cannot happen
    return AnalyticSpectrum(model, float(t), vals[:K])


def cylinder_spectrum(C, H, t, K, model=None):
    """Sorted ``(2 pi m / C)^2 + (j pi / (H - 2t))^2``, ``m in Z``, ``j >= 1``."""
    return product_spectrum((C,), H, t, K, model=model)


def model_spectrum(m, t, K):
    """Dirichlet spectrum of ``M_t`` for any supported model."""
    if m.kind == "Interval":
        return interval_spectrum(m.height, t, K, model=m)
    return product_spectrum(m.periods, m.height, t, K, model=m)


@dataclass
class LimitReport:
    t_values: list
    limit: list
    paths: list  # paths[k-1][i] = lambda_k(M_{t_i})
    gap_decreasing: bool
    monotone_in_t: bool
    final_gap: list
    passed: bool


def spectrum_limit_check(m, t_values, K, threshold=0.05):
    """Check ``lambda_k(M_t) -> lambda_k(M)`` along a decreasing ``t`` sequence.

    ``threshold`` bounds the final relative gap for every ``k <= K``.
    """
    t_values = [float(t) for t in t_values]
    if any(b >= a for a, b in zip(t_values, t_values[1:])):
        raise DomainError("t-sequence must be strictly decreasing")
    limit = model_spectrum(m, 0.0, K).values
    paths = np.array([model_spectrum(m, t, K).values for t in t_values]).T
    gaps = np.abs(paths - limit[:, None])
    decreasing = bool(np.all(np.diff(gaps, axis=1) < 0))
    # larger t means a smaller domain, hence larger eigenvalues
    monotone = bool(np.all(np.diff(paths, axis=1) <= 0))
    final = (gaps[:, -1] / limit).tolist()
    return LimitReport(
        t_values=t_values,
        limit=limit.tolist(),
        paths=paths.tolist(),
        gap_decreasing=decreasing,
        monotone_in_t=monotone,
        final_gap=final,
        passed=decreasing and monotone and max(final) <= threshold,
    )
