"""Frequency-domain reference estimators: local Whittle and FEXP.

Both work off the periodogram and estimate the same memory parameter d
as the wavelet pipeline; they provide the comparison columns of the
benchmark tables.
"""

from __future__ import annotations

import math
from typing import NamedTuple

import numpy as np
from scipy.optimize import fminbound
from sklearn.base import BaseEstimator

from ._validation import DegenerateSeriesError, check_series

__all__ = [
    "periodogram",
    "local_whittle",
    "fexp_estimate",
    "FexpFit",
    "LocalWhittleEstimator",
    "FexpEstimator",
]

EULER_GAMMA = 0.5772156649015329


def periodogram(x) -> tuple[np.ndarray, np.ndarray]:
    """Fourier frequencies 2 pi j / N and ordinates |sum x_t e^{-it l}|^2/(2 pi N)
    for j = 1 .. floor((N-1)/2)."""
    x = check_series(x)
    n = x.size
    m = (n - 1) // 2
    transform = np.fft.rfft(x)[1 : m + 1]
    freqs = 2.0 * np.pi * np.arange(1, m + 1) / n
    ordinates = np.abs(transform) ** 2 / (2.0 * np.pi * n)
    return freqs, ordinates


def whittle_objective(ordinates: np.ndarray) -> "callable":
    """Profiled local Whittle contrast R(d) over the given low-frequency
    ordinates: log mean_j j^{2d} I_j - 2d mean_j log j."""
    log_j = np.log(np.arange(1, ordinates.size + 1, dtype=float))
    mean_log_j = log_j.mean()

    def objective(d):
        return math.log(np.mean(np.exp(2.0 * d * log_j) * ordinates)) - 2.0 * d * mean_log_j

    return objective


def local_whittle_from_ordinates(ordinates) -> float:
    """Minimize the local Whittle contrast over d in (-1/2, 1)."""
    ordinates = np.asarray(ordinates, dtype=float)
    if np.all(ordinates == 0.0):
        raise DegenerateSeriesError("all periodogram ordinates vanish")
    return float(fminbound(whittle_objective(ordinates), -0.5, 1.0, xtol=1e-6))


def local_whittle(x, m: int | None = None) -> float:
    """Local Whittle estimate of d from the m lowest periodogram ordinates.

    Minimized over d in (-1/2, 1); the default bandwidth is N/30.
    """
    x = check_series(x, min_length=64)
    n = x.size
    if m is None:
        m = n // 30
    half = (n - 1) // 2
    if not 2 <= m <= half:
        raise ValueError(f"bandwidth m={m} outside [2, {half}]")
    _, ordinates = periodogram(x)
    return local_whittle_from_ordinates(ordinates[:m])


class FexpFit(NamedTuple):
    d: float
    order: int
    criterion: float


def fexp_from_periodogram(freqs, ordinates, kappa: float = 2.0,
                          max_order: int | None = None) -> FexpFit:
    """FEXP fit from precomputed periodogram coordinates; see
    :func:`fexp_estimate`."""
    if kappa <= 0.0:
        raise ValueError("kappa must be positive")
    freqs = np.asarray(freqs, dtype=float)
    ordinates = np.asarray(ordinates, dtype=float)
    keep = ordinates > 0.0
    freqs, ordinates = freqs[keep], ordinates[keep]
    k_count = freqs.size
    if k_count < 8:
        raise DegenerateSeriesError("too few usable periodogram ordinates")
    if max_order is None:
        max_order = int(2.0 * math.log(2 * k_count))  # ~ 2 log N
    max_order = min(max_order, k_count - 4)

    y = np.log(ordinates) + EULER_GAMMA
    long_memory = -2.0 * np.log(np.abs(2.0 * np.sin(freqs / 2.0)))
    columns = [np.ones(k_count), long_memory]
    best: FexpFit | None = None
    design = np.column_stack(columns)
    for p in range(max_order + 1):
        if p > 0:
            design = np.column_stack([design, np.cos(p * freqs)])
        if np.linalg.matrix_rank(design) < design.shape[1]:
            raise DegenerateSeriesError(f"rank-deficient FEXP design at order {p}")
        beta, *_ = np.linalg.lstsq(design, y, rcond=None)
        resid = y - design @ beta
        crit = float(resid @ resid) / k_count + kappa * (p + 1) * math.pi**2 / (6.0 * k_count)
        if best is None or crit < best.criterion:
            best = FexpFit(d=float(beta[1]), order=p, criterion=crit)
    return best


def fexp_estimate(x, kappa: float = 2.0, max_order: int | None = None) -> FexpFit:
    """Global log-periodogram (FEXP) estimate of d.

    Regresses log I(l_j) + Euler's constant on the long-memory regressor
    -2 log|2 sin(l_j / 2)| and the short-memory basis cos(k l_j),
    k = 1..p, over all Fourier frequencies.  The expansion order p
    minimizes a Mallows-type criterion RSS/K + kappa (p+1) pi^2 / (6 K),
    the penalty using the known variance pi^2/6 of log-periodogram noise;
    kappa -> infinity collapses to the pure p = 0 fit.
    """
    x = check_series(x, min_length=64)
    freqs, ordinates = periodogram(x)
    return fexp_from_periodogram(freqs, ordinates, kappa=kappa, max_order=max_order)


class LocalWhittleEstimator(BaseEstimator):
    """sklearn-style wrapper around :func:`local_whittle`.

    ``m=None`` uses the N/30 default bandwidth.  After ``fit``, the
    estimate is in ``d_`` and the bandwidth used in ``m_``.
    """

    def __init__(self, m=None):
        self.m = m

    def fit(self, X, y=None):
        x = check_series(X, min_length=64)
        self.m_ = self.m if self.m is not None else x.size // 30
        self.d_ = local_whittle(x, m=self.m_)
        self.n_features_in_ = 1
        return self


class FexpEstimator(BaseEstimator):
    """sklearn-style wrapper around :func:`fexp_estimate`."""

    def __init__(self, kappa=2.0, max_order=None):
        self.kappa = kappa
        self.max_order = max_order

    def fit(self, X, y=None):
        fit = fexp_estimate(X, kappa=self.kappa, max_order=self.max_order)
        self.d_ = fit.d
        self.order_ = fit.order
        self.n_features_in_ = 1
        return self
