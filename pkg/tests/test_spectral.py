"""Periodogram, local Whittle, FEXP."""

import numpy as np
import pytest
from sklearn.base import clone

from longmem._validation import DegenerateSeriesError
from longmem.spectral import (
    FexpEstimator,
    LocalWhittleEstimator,
    fexp_estimate,
    fexp_from_periodogram,
    local_whittle,
    local_whittle_from_ordinates,
    periodogram,
)
from longmem.synthesis import gen_farima, gen_fgn


# ---------------------------------------------------------------------------
# periodogram
# ---------------------------------------------------------------------------

def test_periodogram_shape_and_positivity(rng):
    for n in (100, 101):
        x = rng.standard_normal(n)
        freqs, ordinates = periodogram(x)
        assert freqs.size == ordinates.size == (n - 1) // 2
        assert np.all(ordinates >= 0.0)
        assert freqs[0] == pytest.approx(2 * np.pi / n)


@pytest.mark.parametrize("h", [0.5, 0.8])
def test_periodogram_parseval(h):
    n = 4096
    x = gen_fgn(h, n, 5).values
    _, ordinates = periodogram(x)
    # sum_j I_j * (2 pi / N) * 2 ~ sample variance
    approx = float(ordinates.sum() * (2 * np.pi / n) * 2.0)
    sample_var = float(np.mean((x - x.mean()) ** 2))
    assert abs(approx - sample_var) / sample_var < 0.01


# ---------------------------------------------------------------------------
# local Whittle
# ---------------------------------------------------------------------------

def test_local_whittle_noiseless_oracle():
    # exact power-law ordinates recover d to the optimizer tolerance
    n, m = 10_000, 333
    lam = 2 * np.pi * np.arange(1, m + 1) / n
    for d in (0.0, 0.15, 0.35):
        ordinates = 4.2 * lam ** (-2 * d)
        assert abs(local_whittle_from_ordinates(ordinates) - d) < 1e-4


def test_local_whittle_white_noise():
    rng = np.random.default_rng(8)
    values = [local_whittle(rng.standard_normal(10_000)) for _ in range(5)]
    assert abs(np.mean(values)) < 0.05
    assert np.max(np.abs(values)) < 0.12


def test_local_whittle_default_bandwidth_matches_explicit():
    x = gen_farima(0.2, 3000, 3).values
    assert local_whittle(x) == local_whittle(x, m=100)


def test_local_whittle_degenerate_bandwidth_still_finite():
    x = gen_farima(0.2, 1000, 4).values
    d = local_whittle(x, m=2)
    assert np.isfinite(d) and -0.5 <= d <= 1.0


def test_local_whittle_bandwidth_validation(rng):
    x = rng.standard_normal(300)
    with pytest.raises(ValueError):
        local_whittle(x, m=1)
    with pytest.raises(ValueError):
        local_whittle(x, m=200)


def test_local_whittle_scale_invariant():
    x = gen_farima(0.3, 4000, 6).values
    assert abs(local_whittle(x) - local_whittle(100.0 * x)) < 1e-6


def test_local_whittle_rejects_zero_spectrum():
    with pytest.raises(DegenerateSeriesError):
        local_whittle_from_ordinates(np.zeros(50))


# ---------------------------------------------------------------------------
# FEXP
# ---------------------------------------------------------------------------

def test_fexp_noiseless_oracle():
    # ordinates exactly on an FEXP spectrum (times e^{-gamma}, which the
    # estimator adds back) are fit exactly: d to 1e-6
    n = 4096
    m = (n - 1) // 2
    freqs = 2 * np.pi * np.arange(1, m + 1) / n
    d, thetas = 0.25, [0.4, -0.2, 0.1]
    log_f = -2 * d * np.log(np.abs(2 * np.sin(freqs / 2)))
    for k, th in enumerate(thetas, start=1):
        log_f += th * np.cos(k * freqs)
    ordinates = np.exp(log_f - 0.5772156649015329)
    fit = fexp_from_periodogram(freqs, ordinates)
    assert abs(fit.d - d) < 1e-6
    assert fit.order >= len(thetas)


def test_fexp_large_penalty_forces_order_zero():
    x = gen_farima(0.2, 2000, 10, ar=(0.7,), ma=(-0.3,)).values
    fit = fexp_estimate(x, kappa=1e9)
    assert fit.order == 0


def test_fexp_scale_invariant():
    x = gen_farima(0.2, 2000, 11).values
    a = fexp_estimate(x)
    b = fexp_estimate(0.01 * x)
    assert abs(a.d - b.d) < 1e-10
    assert a.order == b.order


def test_fexp_rejects_bad_kappa(rng):
    with pytest.raises(ValueError):
        fexp_estimate(rng.standard_normal(500), kappa=0.0)


def test_fexp_white_noise():
    rng = np.random.default_rng(9)
    values = [fexp_estimate(rng.standard_normal(4000)).d for _ in range(5)]
    assert abs(np.mean(values)) < 0.06


# ---------------------------------------------------------------------------
# estimator classes
# ---------------------------------------------------------------------------

def test_local_whittle_estimator_protocol():
    est = LocalWhittleEstimator()
    assert est.get_params() == {"m": None}
    x = gen_farima(0.2, 3000, 12).values
    fitted = clone(est).fit(x)
    assert fitted.m_ == 100
    assert fitted.d_ == local_whittle(x)


def test_fexp_estimator_protocol():
    est = FexpEstimator(kappa=2.0)
    x = gen_farima(0.2, 2000, 13).values
    fitted = clone(est).fit(x)
    ref = fexp_estimate(x, kappa=2.0)
    assert fitted.d_ == ref.d
    assert fitted.order_ == ref.order
