"""Analyzing function, Fourier transform, weighted masses, covariance."""

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.integrate import quad

from longmem.wavelet import (
    DEFAULT_WAVELET,
    SERIES_SWITCH,
    CovarianceModel,
    _pair_integral,
    _power_spectrum_spline,
    gamma_matrix,
    interpolated_gamma,
    k_integral,
    psi_eval,
    psi_hat,
    regularized_inverse,
    sigma2_d,
)


# ---------------------------------------------------------------------------
# psi
# ---------------------------------------------------------------------------

def test_psi_support_boundaries():
    assert psi_eval(0.0) == 0.0
    assert psi_eval(1.0) == 0.0


@given(st.floats(allow_nan=False, allow_infinity=False))
@settings(max_examples=200)
def test_psi_zero_outside_support(x):
    if x <= 0.0 or x >= 1.0:
        assert psi_eval(x) == 0.0


def test_psi_integral_zero_by_gauss_legendre():
    nodes, weights = np.polynomial.legendre.leggauss(200)
    x = 0.5 * (nodes + 1.0)
    assert abs(0.5 * np.dot(weights, psi_eval(x))) < 1e-12


def test_psi_first_and_second_moment_vanish():
    # exact rational values cached on the spec object
    assert DEFAULT_WAVELET.moment(0) == 0.0
    assert DEFAULT_WAVELET.moment(1) == 0.0
    assert DEFAULT_WAVELET.moment(2) == 0.0
    # the third moment is tiny but genuinely nonzero
    assert 0.0 < DEFAULT_WAVELET.moment(3) < 1e-6


def test_psi_antisymmetric_about_half():
    x = np.linspace(0.01, 0.99, 199)
    np.testing.assert_allclose(psi_eval(1.0 - x), -psi_eval(x), atol=1e-16)


def test_psi_derivatives_vanish_at_edges():
    # C^2 smoothness across the support boundary: finite differences of
    # psi near 0 and 1 shrink like h^3 (triple zeros at both ends)
    for edge, sign in ((0.0, 1.0), (1.0, -1.0)):
        for h in (1e-3, 1e-4):
            val = psi_eval(edge + sign * h)
            assert abs(val) < 10.0 * h**3


# ---------------------------------------------------------------------------
# psi_hat
# ---------------------------------------------------------------------------

def test_psi_hat_zero_mean():
    assert psi_hat(0.0) == 0.0 + 0.0j


def test_psi_hat_conjugate_symmetry():
    u = np.linspace(0.1, 40.0, 57)
    np.testing.assert_allclose(psi_hat(-u), np.conj(psi_hat(u)), rtol=1e-12)


def test_psi_hat_branch_agreement_at_switch():
    # adjacent floats straddle the branch cut; the true function changes
    # by ~1e-21 between them, so any gap is branch disagreement
    below = psi_hat(np.nextafter(SERIES_SWITCH, 0.0))
    above = psi_hat(SERIES_SWITCH)
    assert abs(below - above) <= 1e-10 * abs(above)


def test_psi_hat_matches_quadrature():
    # direct numerical Fourier integral as an independent oracle
    for u in (0.3, 2.0, 7.5, 33.0):
        re, _ = quad(lambda t: psi_eval(t) * np.cos(u * t), 0.0, 1.0, limit=200)
        im, _ = quad(lambda t: -psi_eval(t) * np.sin(u * t), 0.0, 1.0, limit=200)
        assert abs(psi_hat(u) - (re + 1j * im)) < 1e-14


def test_psi_hat_fast_decay_envelope():
    # |psi_hat| <= C u^-3 with a decaying envelope across decades
    peaks = []
    for u0 in (1e2, 1e3, 1e4):
        u = np.linspace(u0, 2 * u0, 20001)
        peaks.append(np.max(np.abs(psi_hat(u)) * u**3))
    assert peaks[0] > peaks[1] > peaks[2]


def test_parseval_identity():
    target = 2.0 * np.pi * DEFAULT_WAVELET.norm2
    value = k_integral(0.0)
    assert abs(value - target) / target < 1e-6


# ---------------------------------------------------------------------------
# k_integral
# ---------------------------------------------------------------------------

def test_k_integral_rejects_divergent_exponent():
    with pytest.raises(ValueError):
        k_integral(1.0)
    with pytest.raises(ValueError):
        k_integral(1.7)


@pytest.mark.parametrize("alpha", [-2.0, -1.0, -0.5, 0.0, 0.4, 0.8, 0.98])
def test_k_integral_positive(alpha):
    assert k_integral(alpha) > 0.0


def test_k_integral_finite_for_correction_exponents():
    for d in (0.4, 0.49, 0.0, -0.3):
        assert k_integral(2 * d) > 0.0
        for dprime in (0.01, 1.0, 2.0):
            assert np.isfinite(k_integral(2 * d - dprime))


def test_k_integral_against_trapezoid_oracle():
    # brute-force oracle: symmetric trapezoid over [-1e4, 1e4], 1e7 points
    u = np.linspace(0.0, 1.0e4, 5_000_001)
    f = np.abs(psi_hat(u)) ** 2
    f[1:] *= u[1:] ** (-0.5)
    f[0] = 0.0
    oracle = 2.0 * np.trapezoid(f, u)
    value = k_integral(0.5)
    assert abs(value - oracle) / oracle < 1e-4


def test_power_spectrum_spline_accuracy(rng):
    spline = _power_spectrum_spline()
    u = rng.uniform(0.0, 150.0, 3000)
    exact = np.abs(psi_hat(u)) ** 2
    approx = spline(u)
    scale = np.maximum(exact, exact.max() * 1e-9)
    assert np.max(np.abs(approx - exact) / scale) < 1e-5


# ---------------------------------------------------------------------------
# gamma matrix
# ---------------------------------------------------------------------------

def test_gamma_symmetric_and_positive_diagonal():
    cov = gamma_matrix(0.2, 12)
    assert np.array_equal(cov.gamma, cov.gamma.T)
    assert np.all(np.diag(cov.gamma) > 0.0)
    assert cov.ratios == tuple(range(1, 13))


def test_gamma_diagonal_scales_linearly():
    # change of variables gives gamma_ii = i * gamma_11 exactly
    cov = gamma_matrix(0.1, 10)
    diag = np.diag(cov.gamma)
    np.testing.assert_allclose(diag / diag[0], np.arange(1, 11), rtol=1e-5)


def test_gamma_11_against_simpson_oracle():
    # independent fixed-grid Simpson on the raw transform (no spline),
    # different truncation and resolution than the implementation
    lam = np.linspace(0.0, 300.0, 120_001)
    p = np.abs(psi_hat(lam)) ** 4
    h = lam[1] - lam[0]
    integral = h / 3.0 * (p[0] + p[-1] + 4.0 * p[1::2].sum() + 2.0 * p[2:-1:2].sum())
    k0 = k_integral(0.0)
    oracle = 4.0 * np.pi * 2.0 * integral / k0**2
    cov = gamma_matrix(0.0, 1)
    assert abs(cov.gamma[0, 0] - oracle) / oracle < 1e-4


def test_gamma_11_against_adaptive_quad_oracle():
    val = 0.0
    for a, b in [(0.0, 30.0), (30.0, 80.0), (80.0, 200.0)]:
        part, _ = quad(lambda u: abs(psi_hat(u)) ** 4, a, b, limit=400)
        val += part
    oracle = 8.0 * np.pi * val / k_integral(0.0) ** 2
    assert abs(gamma_matrix(0.0, 1).gamma[0, 0] - oracle) / oracle < 1e-4


def test_gamma_entries_stable_under_refinement_doubling():
    spectrum = _power_spectrum_spline()
    for d in (0.0, 0.3):
        for (i, j) in ((1, 1), (2, 5), (7, 8)):
            coarse = _pair_integral(i, j, d, spectrum, 1274)
            fine = _pair_integral(i, j, d, spectrum, 2 * 1274)
            finer = _pair_integral(i, j, d, spectrum, 4 * 1274)
            assert abs(fine - coarse) / abs(finer) < 1e-6
            assert abs(finer - fine) / abs(finer) < 1e-6


def test_gamma_matches_empirical_covariance_of_log_variances():
    # Monte-Carlo validation of the CLT scale: Var(log T_N(a)) ~ (a/N) g_11
    from longmem.estimation import wavelet_coeffs
    from longmem.synthesis import gen_fgn

    d, n, a, reps = 0.2, 4096, 16, 300
    rng = np.random.default_rng(7)
    logs = np.empty(reps)
    for r in range(reps):
        x = gen_fgn(d + 0.5, n, rng).values
        logs[r] = np.log(np.mean(wavelet_coeffs(x, a) ** 2))
    ratio = np.var(logs, ddof=1) / ((a / n) * gamma_matrix(d, 1).gamma[0, 0])
    assert 0.85 < ratio < 1.35  # finite-scale bias shrinks as a grows


def test_gamma_requires_d_below_half():
    with pytest.raises(ValueError):
        gamma_matrix(0.5, 5)


def test_covariance_model_validates():
    good = gamma_matrix(0.0, 4)
    with pytest.raises(ValueError):
        CovarianceModel(0.0, good.ratios, good.gamma[:3, :3], good.k_2d)
    asym = good.gamma.copy()
    asym[0, 1] *= 1.5
    with pytest.raises(ValueError):
        CovarianceModel(0.0, good.ratios, asym, good.k_2d)


def test_submodel_picks_requested_ratios():
    cov = gamma_matrix(0.1, 8)
    sub = cov.submodel((2, 3, 5))
    assert sub.ratios == (2, 3, 5)
    assert sub.gamma[0, 0] == cov.gamma[1, 1]
    assert sub.gamma[1, 2] == cov.gamma[2, 4]


def test_interpolated_gamma_close_to_exact():
    exact = gamma_matrix(0.205, 10)
    approx = interpolated_gamma(0.205, 10, step=0.01)
    err = np.abs(approx.gamma - exact.gamma) / np.abs(exact.gamma).max()
    assert err.max() < 5e-3


def test_regularized_inverse_is_positive_definite():
    cov = gamma_matrix(0.2, 40)
    inv = regularized_inverse(cov.gamma, 1e-2)
    np.linalg.cholesky(inv)  # succeeds iff SPD
    # flooring only may increase the smallest eigenvalue
    mu = np.linalg.eigvalsh(cov.gamma)
    mu_inv = 1.0 / np.linalg.eigvalsh(inv)[::-1]
    assert mu_inv.min() >= mu.min() - 1e-12


# ---------------------------------------------------------------------------
# sigma^2_d
# ---------------------------------------------------------------------------

def test_sigma2_identity_covariance_reduces_to_ols():
    ell = 15
    eye = CovarianceModel(0.0, tuple(range(1, ell + 1)), np.eye(ell), 1.0)
    z = np.column_stack([np.ones(ell), np.log(np.arange(1, ell + 1))])
    expected = 0.25 * np.linalg.inv(z.T @ z)[1, 1]
    assert abs(sigma2_d(eye) - expected) < 1e-14


def test_sigma2_decreases_with_more_scales():
    values = [sigma2_d(gamma_matrix(0.2, ell)) for ell in (10, 20, 50)]
    assert values[0] > values[1] > values[2]


def test_sigma2_nearly_flat_in_d():
    values = [sigma2_d(gamma_matrix(d, 20)) for d in (0.0, 0.2, 0.45)]
    spread = (max(values) - min(values)) / min(values)
    assert spread < 0.10
