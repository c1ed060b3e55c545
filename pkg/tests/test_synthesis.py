"""Benchmark process generators, seeding, contamination, series I/O."""

import numpy as np
import pytest
from scipy.integrate import quad
from scipy.special import gammaln

from longmem.montecarlo import BENCHMARK_PROCESSES
from longmem.synthesis import (
    ProcessModel,
    TimeSeries,
    burr_ppf,
    contaminate,
    fgn_autocovariance,
    frac_weights,
    gen_farima,
    gen_fgn,
    gen_mfarima,
    gen_spectral,
    generate,
    load_series,
    load_series_binary,
    load_series_csv,
    save_series_binary,
    save_series_csv,
    spectral_autocovariance,
)


def lag1_autocorr(x):
    x = x - x.mean()
    return float(np.dot(x[1:], x[:-1]) / np.dot(x, x))


# ---------------------------------------------------------------------------
# determinism & seeding
# ---------------------------------------------------------------------------

@pytest.mark.parametrize("model", [
    ProcessModel.fgn(0.7),
    ProcessModel.farima(0.3),
    ProcessModel.farima(0.2, ar=(0.7,), ma=(-0.3,), innovation="uniform"),
    ProcessModel.spectral("power_law", d=0.2, dprime=1.0),
    ProcessModel.mfarima(0.1, 0.4),
    ProcessModel.farima(0.1).contaminated(trend=True, seasonal=True),
])
def test_generate_deterministic(model):
    a = generate(model, 256, 12345)
    b = generate(model, 256, 12345)
    assert np.array_equal(a.values, b.values)
    c = generate(model, 256, 54321)
    assert not np.array_equal(a.values, c.values)


def test_generate_accepts_seed_sequences():
    a = generate(ProcessModel.farima(0.2), 128, [7, 1, 0])
    b = generate(ProcessModel.farima(0.2), 128, [7, 1, 0])
    c = generate(ProcessModel.farima(0.2), 128, [7, 1, 1])
    assert np.array_equal(a.values, b.values)
    assert not np.array_equal(a.values, c.values)


# ---------------------------------------------------------------------------
# fGn
# ---------------------------------------------------------------------------

def test_fgn_half_is_white_noise():
    n = 4096
    ts = gen_fgn(0.5, n, 11)
    assert abs(lag1_autocorr(ts.values)) < 3.0 / np.sqrt(n)


def test_fgn_unit_variance():
    # mean square against gamma(0) = 1; at H = 0.9 a single replicate
    # fluctuates with sd ~ 0.2 (mean-square variance decays like n^{4H-3}),
    # so the strong-persistence check pools replicates
    ts = gen_fgn(0.7, 2**14, 3)
    assert abs(np.mean(ts.values**2) - 1.0) < 0.05
    rng = np.random.default_rng(314)
    pooled = np.mean([np.mean(gen_fgn(0.9, 2**14, rng).values ** 2) for _ in range(30)])
    assert abs(pooled - 1.0) < 0.12


def test_fgn_benchmark_rows_cover_d_grid():
    for d in (0.0, 0.1, 0.2, 0.3, 0.4):
        model = BENCHMARK_PROCESSES["X1"](d)
        assert model.kind == "fgn"
        assert model.hurst == pytest.approx(d + 0.5)


def test_fgn_rejects_bad_hurst():
    with pytest.raises(ValueError):
        ProcessModel.fgn(1.2)


def test_fgn_autocovariance_roundtrip():
    # pooled empirical autocovariance of many replicates vs the target
    hurst, n, reps = 0.8, 512, 200
    target = fgn_autocovariance(hurst, 20)
    rng = np.random.default_rng(99)
    acvs = np.empty((reps, 21))
    for r in range(reps):
        x = gen_fgn(hurst, n, rng).values  # exact zero-mean draw
        acvs[r] = [np.dot(x[: n - k], x[k:]) / n for k in range(21)]
    mean = acvs.mean(axis=0)
    stderr = acvs.std(axis=0, ddof=1) / np.sqrt(reps)
    assert np.all(np.abs(mean - target) < 4.0 * stderr + 1e-12)


# ---------------------------------------------------------------------------
# FARIMA
# ---------------------------------------------------------------------------

def test_frac_weights_match_gamma_closed_form():
    d = 0.3
    w = frac_weights(d, 50)
    j = np.arange(0, 51, dtype=float)
    closed = np.exp(gammaln(j + d) - gammaln(d) - gammaln(j + 1.0))
    np.testing.assert_allclose(w, closed, rtol=1e-10)


def test_frac_weights_asymptotics():
    # a_j ~ j^{d-1} / Gamma(d): Stirling limit of the recursion
    d = 0.4
    j = 10_000
    w = frac_weights(d, j)[-1]
    ratio = w * np.exp(gammaln(d)) * j ** (1.0 - d)
    assert abs(ratio - 1.0) < 0.01


def test_farima_d0_is_white_noise():
    ts = gen_farima(0.0, 4096, 5)
    assert abs(lag1_autocorr(ts.values)) < 3.0 / np.sqrt(ts.n)


def test_farima_rejects_unstable_and_out_of_range():
    with pytest.raises(ValueError):
        ProcessModel.farima(0.2, ar=(1.1,))
    with pytest.raises(ValueError):
        ProcessModel.farima(0.6)
    with pytest.raises(ValueError):
        ProcessModel.farima(0.2, innovation="levy")


def test_farima_arma_benchmark_model():
    ts = gen_farima(0.2, 512, 1, ar=(0.7,), ma=(-0.3,))
    assert np.all(np.isfinite(ts.values))
    # AR(1) with phi=0.7 dominates short-range correlation
    assert lag1_autocorr(ts.values) > 0.3


def test_burr_quantiles():
    assert burr_ppf(0.75) == pytest.approx(1.0, abs=1e-12)
    assert burr_ppf(0.5) == pytest.approx(0.0, abs=1e-12)
    assert burr_ppf(0.25) == pytest.approx(-1.0, abs=1e-12)
    rng = np.random.default_rng(2)
    sample = burr_ppf(rng.random(200_000))
    phat = np.mean(sample <= 1.0)
    assert abs(phat - 0.75) < 3.0 * np.sqrt(0.75 * 0.25 / sample.size)
    # the density vanishes at 0, so the sample median converges slowly;
    # the sign balance pins the median at 0 instead
    pos = np.mean(sample > 0.0)
    assert abs(pos - 0.5) < 3.0 * np.sqrt(0.25 / sample.size)


def test_cauchy_innovations_run():
    ts = gen_farima(0.2, 256, 8, innovation="cauchy")
    assert np.all(np.isfinite(ts.values))


# ---------------------------------------------------------------------------
# spectral-density synthesis
# ---------------------------------------------------------------------------

def test_constant_density_is_white_noise():
    ts = gen_spectral("constant", 4096, 21)
    assert abs(lag1_autocorr(ts.values)) < 3.0 / np.sqrt(ts.n)
    assert abs(ts.values.var() - 1.0) < 0.08


def test_power_law_autocov_lag0_against_oracle():
    # gamma(0) = int_-pi^pi f: analytic near 0 + high-res trapezoid beyond
    d, dprime = 0.2, 1.0
    delta = 1e-4
    lam = np.linspace(delta, np.pi, 400_001)
    f = lam ** (-2 * d) * (1.0 + lam**dprime)
    tail = np.trapezoid(f, lam)
    head = delta ** (1 - 2 * d) / (1 - 2 * d) + delta ** (1 + dprime - 2 * d) / (1 + dprime - 2 * d)
    oracle = 2.0 * (head + tail)
    value = spectral_autocovariance("power_law", d, dprime, 0)[0]
    assert abs(value - oracle) / oracle < 1e-6


@pytest.mark.parametrize("beta", [0.4, -0.6, 0.8])
@pytest.mark.parametrize("k", [64, 65, 100, 501])
def test_power_cos_asymptotic_matches_quadrature(beta, k):
    from longmem.synthesis import _power_cos_integral, _power_cos_pi_asymptotic

    exact = _power_cos_integral(k, beta, np.pi)
    approx = float(_power_cos_pi_asymptotic(np.array([float(k)]), beta)[0])
    assert abs(approx - exact) < 1e-10 * (1.0 + abs(exact))


def test_power_law_autocov_small_lags_against_quad():
    d, dprime = 0.3, 1.0
    table = spectral_autocovariance("power_law", d, dprime, 5)
    for k in range(1, 6):
        val, _ = quad(
            lambda lam: lam ** (-2 * d) * (1 + lam**dprime) * np.cos(k * lam),
            0.0, np.pi, limit=400, points=[0.0],
        )
        assert abs(table[k] - 2.0 * val) < 1e-6 * abs(table[0])


def test_shifted_singularity_autocov():
    d = 0.2
    table = spectral_autocovariance("shifted_singularity", d, None, 9)
    assert np.all(table[1::2] == 0.0)  # odd lags vanish by symmetry
    for k in (0, 2, 4):
        val, _ = quad(
            lambda lam: np.abs(lam - np.pi / 2) ** (-2 * d) * np.cos(k * lam),
            0.0, np.pi, limit=600, points=[np.pi / 2],
        )
        assert abs(table[k] - 2.0 * val) < 1e-6 * abs(table[0])


def test_spectral_benchmark_row_variance():
    model = BENCHMARK_PROCESSES["X8"](0.2)
    assert model.density == "power_law" and model.dprime == 1.0
    n = 4096
    ts = generate(model, n, 17)
    target = spectral_autocovariance("power_law", 0.2, 1.0, 0)[0]
    assert abs(ts.values.var() / target - 1.0) < 0.2


def test_spectral_rejects_unknown_density():
    with pytest.raises(ValueError):
        ProcessModel.spectral("lorentzian", d=0.2)


# ---------------------------------------------------------------------------
# contamination
# ---------------------------------------------------------------------------

def test_contaminate_identity_when_disabled():
    ts = gen_farima(0.2, 128, 4)
    out = contaminate(ts, trend=False, seasonal=False)
    assert out is ts


def test_contaminate_trend_keeps_mean_near_zero():
    ts = gen_farima(0.1, 10_000, 42)
    out = contaminate(ts, trend=True)
    sigma = out.values.std()
    assert abs(out.values.mean()) < 3.0 * sigma / np.sqrt(ts.n)
    assert out.model.trend and not out.model.seasonal


def test_contaminate_seasonal_period_12():
    ts = gen_farima(0.0, 480, 9)
    out = contaminate(ts, seasonal=True)
    component = out.values - ts.values
    assert np.allclose(component[12:], component[:-12], atol=1e-12)
    assert not np.allclose(component[6:], component[:-6], atol=1e-3)


# ---------------------------------------------------------------------------
# change-point process
# ---------------------------------------------------------------------------

def test_mfarima_halves_uncorrelated():
    n = 4096
    ts = gen_mfarima(0.1, 0.4, n, 13)
    first, second = ts.values[: n // 2], ts.values[n // 2:]
    f = first - first.mean()
    s = second - second.mean()
    rho = np.dot(f, s) / (np.linalg.norm(f) * np.linalg.norm(s))
    assert abs(rho) < 3.0 / np.sqrt(n // 2)


def test_mfarima_equal_halves_recovered_by_estimator():
    from longmem.estimation import WaveletMemoryEstimator

    d = 0.3
    ts = gen_mfarima(d, d, 4000, 123)
    est = WaveletMemoryEstimator(ell2_cap=50, gamma_step=0.01).fit(ts.values)
    lo, hi = est.conf_int_
    assert lo - 0.05 < d < hi + 0.05


# ---------------------------------------------------------------------------
# I/O
# ---------------------------------------------------------------------------

def test_csv_roundtrip(tmp_path):
    values = np.random.default_rng(0).standard_normal(100)
    path = tmp_path / "series.csv"
    save_series_csv(path, values)
    text = path.read_text().splitlines()
    assert text[0] == "value"
    assert len(text) == 101
    np.testing.assert_array_equal(load_series_csv(path), values)


def test_binary_roundtrip_and_layout(tmp_path):
    values = np.random.default_rng(1).standard_normal(37)
    path = tmp_path / "series.bin"
    save_series_binary(path, values)
    raw = path.read_bytes()
    assert int.from_bytes(raw[:8], "little") == 37
    assert len(raw) == 8 + 37 * 8
    np.testing.assert_array_equal(load_series_binary(path), values)


def test_load_series_sniffs_format(tmp_path):
    values = np.arange(64.0)
    save_series_csv(tmp_path / "a.csv", values)
    save_series_binary(tmp_path / "a.bin", values)
    np.testing.assert_array_equal(load_series(tmp_path / "a.csv"), values)
    np.testing.assert_array_equal(load_series(tmp_path / "a.bin"), values)


def test_binary_truncation_detected(tmp_path):
    path = tmp_path / "bad.bin"
    save_series_binary(path, np.arange(32.0))
    data = path.read_bytes()
    path.write_bytes(data[:-8])
    with pytest.raises(ValueError):
        load_series_binary(path)


def test_timeseries_validates():
    model = ProcessModel.farima(0.1)
    with pytest.raises(ValueError):
        TimeSeries(np.array([1.0, np.nan] * 20), model, 0)
    with pytest.raises(ValueError):
        TimeSeries(np.ones(4), model, 0)
