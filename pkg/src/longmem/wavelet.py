"""Analyzing wavelet, its Fourier transform, and asymptotic covariances.

The analyzing function is the degree-9 polynomial

    psi(x) = x^3 (1-x)^3 (x^3 - 3/2 x^2 + 15/22 x - 1/11)    on [0, 1],

identically zero elsewhere.  It is C^2 on the real line, antisymmetric
about x = 1/2, and its moments of order 0, 1 and 2 all vanish (verified
in exact rational arithmetic at import time).  The vanishing moments are
what make the log-variance regression insensitive to additive constants
and linear trends.

Everything downstream needs three derived quantities:

* ``psi_hat(u)``   -- the Fourier transform  int_0^1 psi(t) e^{-iut} dt,
* ``k_integral``   -- weighted L2 masses  int |psi_hat(u)|^2 |u|^{-alpha} du,
* ``gamma_matrix`` -- the asymptotic covariance of the log wavelet
  variances across the scale ratios 1..ell, entering both the weighted
  regression and the goodness-of-fit statistic.
"""

from __future__ import annotations

import functools
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np
from scipy.interpolate import CubicSpline

from ._validation import QuadratureError, SingularCovarianceError

__all__ = [
    "WaveletSpec",
    "CovarianceModel",
    "DEFAULT_WAVELET",
    "SERIES_SWITCH",
    "psi_eval",
    "psi_hat",
    "k_integral",
    "gamma_matrix",
    "interpolated_gamma",
    "regularized_inverse",
    "sigma2_d",
]


def _expanded_coefficients() -> list[Fraction]:
    """Exact coefficients of psi as a degree-9 polynomial in x."""
    base = {3: Fraction(1), 4: Fraction(-3), 5: Fraction(3), 6: Fraction(-1)}  # x^3(1-x)^3
    cubic = {0: Fraction(-1, 11), 1: Fraction(15, 22), 2: Fraction(-3, 2), 3: Fraction(1)}
    out: dict[int, Fraction] = {}
    for i, a in base.items():
        for j, b in cubic.items():
            out[i + j] = out.get(i + j, Fraction(0)) + a * b
    return [out.get(k, Fraction(0)) for k in range(10)]


_POLY_FRAC = _expanded_coefficients()
_POLY = np.array([float(c) for c in _POLY_FRAC])


def _moment_frac(n: int) -> Fraction:
    """Exact n-th moment  int_0^1 t^n psi(t) dt."""
    return sum((c / (k + n + 1) for k, c in enumerate(_POLY_FRAC)), Fraction(0))


# Moments 0..2 must vanish exactly: downstream code relies on it.
if any(_moment_frac(n) != 0 for n in range(3)):
    raise AssertionError("analyzing polynomial lost its vanishing moments")

#: squared L2 norm  int_0^1 psi^2, exact rational evaluated once
PSI_NORM2 = float(
    sum(
        (ci * cj / Fraction(i + j + 1) for i, ci in enumerate(_POLY_FRAC) for j, cj in enumerate(_POLY_FRAC)),
        Fraction(0),
    )
)

#: |u| below which psi_hat switches to the power series.  The 10-step
#: integration-by-parts recursion loses ~4 significant digits by |u|=1
#: (catastrophic cancellation), so the switch sits at 5 where both
#: branches agree to ~1e-11 relative.
SERIES_SWITCH = 5.0
_SERIES_TERMS = 60
_MOMENTS = np.array([float(_moment_frac(n)) for n in range(_SERIES_TERMS)])


def psi_eval(x):
    """Evaluate the analyzing function; exactly 0 outside (0, 1).

    Accepts scalars or arrays and preserves the input shape.
    """
    arr = np.asarray(x, dtype=float)
    scalar = arr.ndim == 0
    arr = np.atleast_1d(arr)
    out = np.zeros(arr.shape)
    inside = (arr > 0.0) & (arr < 1.0)
    if inside.any():
        xi = arr[inside]
        acc = np.zeros_like(xi)
        for k in range(9, 2, -1):  # Horner on the cubic-through-nonic part
            acc = acc * xi + _POLY[k]
        out[inside] = acc * xi**3
    return float(out[0]) if scalar else out


def psi_hat(u):
    """Fourier transform  int_0^1 psi(t) e^{-iut} dt  of the wavelet.

    Two branches: a truncated power series in u for |u| < 5 (the closed
    form cancels catastrophically near 0 since psi_hat(u) = O(u^3)), and
    the 10-step integration-by-parts recursion otherwise.  The remainder
    of the 60-term series is below 1e-25 relative at the switch point.
    """
    arr = np.asarray(u, dtype=float)
    scalar = arr.ndim == 0
    arr = np.atleast_1d(arr)
    out = np.empty(arr.shape, dtype=complex)

    small = np.abs(arr) < SERIES_SWITCH
    if small.any():
        us = arr[small]
        acc = np.zeros(us.shape, dtype=complex)
        term = np.ones(us.shape, dtype=complex)  # (-iu)^n / n!
        for n in range(_SERIES_TERMS):
            if n >= 3:
                acc += term * _MOMENTS[n]
            term *= (-1j * us) / (n + 1)
        out[small] = acc
    if (~small).any():
        ub = arr[~small]
        iu = 1j * ub
        e = np.exp(-iu)
        # I_k = int_0^1 t^k e^{-iut} dt via I_k = (k I_{k-1} - e^{-iu})/(iu)
        Ik = (1.0 - e) / iu
        acc = np.zeros(ub.shape, dtype=complex)
        for k in range(1, 10):
            Ik = (k * Ik - e) / iu
            if k >= 3:
                acc += _POLY[k] * Ik
        out[~small] = acc
    return complex(out[0]) if scalar else out


@dataclass(frozen=True)
class WaveletSpec:
    """The analyzing function: polynomial coefficients, regularity, support.

    ``power_spectrum`` is the cached evaluator of |psi_hat|^2 used by the
    covariance quadratures.
    """

    poly_coeffs: tuple = tuple(float(c) for c in _POLY_FRAC)
    regularity_k: int = 2
    support: tuple = (0.0, 1.0)

    def __call__(self, x):
        return psi_eval(x)

    def fourier(self, u):
        return psi_hat(u)

    @property
    def norm2(self) -> float:
        return PSI_NORM2

    def power_spectrum(self, u):
        return _power_spectrum_spline()(u)

    def moment(self, n: int) -> float:
        return float(_moment_frac(n))


DEFAULT_WAVELET = WaveletSpec()


# ---------------------------------------------------------------------------
# adaptive Gauss-Kronrod quadrature (vectorized over panels)
# ---------------------------------------------------------------------------

# Standard (G7, K15) abscissae and weights on [-1, 1], cf. QUADPACK dqk15.
_K15_NODES = np.array([
    -0.991455371120813, -0.949107912342759, -0.864864423359769,
    -0.741531185599394, -0.586087235467691, -0.405845151377397,
    -0.207784955007898, 0.0,
    0.207784955007898, 0.405845151377397, 0.586087235467691,
    0.741531185599394, 0.864864423359769, 0.949107912342759,
    0.991455371120813,
])
_K15_WEIGHTS = np.array([
    0.022935322010529, 0.063092092629979, 0.104790010322250,
    0.140653259715525, 0.169004726639267, 0.190350578064785,
    0.204432940075298, 0.209482141084728,
    0.204432940075298, 0.190350578064785, 0.169004726639267,
    0.140653259715525, 0.104790010322250, 0.063092092629979,
    0.022935322010529,
])
_G7_WEIGHTS = np.array([
    0.129484966168870, 0.279705391489277, 0.381830050505119,
    0.417959183673469, 0.381830050505119, 0.279705391489277,
    0.129484966168870,
])
_G7_IDX = np.arange(1, 15, 2)  # Gauss nodes sit at the odd Kronrod positions


def _adaptive_gk(f, edges, rel_tol=1e-9, max_panels=2048):
    """Globally adaptive G7-K15 bisection over the initial ``edges`` panels.

    ``f`` must accept an ndarray.  Panels with the largest error estimates
    are bisected until the summed error estimate drops below
    ``rel_tol * |integral|``.
    """
    a = np.asarray(edges[:-1], dtype=float)
    b = np.asarray(edges[1:], dtype=float)

    def evaluate(lo, hi):
        mid = 0.5 * (lo + hi)[:, None]
        half = 0.5 * (hi - lo)[:, None]
        x = mid + half * _K15_NODES[None, :]
        y = f(x.ravel()).reshape(x.shape)
        k15 = (y * _K15_WEIGHTS).sum(axis=1) * half[:, 0]
        g7 = (y[:, _G7_IDX] * _G7_WEIGHTS).sum(axis=1) * half[:, 0]
        return k15, np.abs(k15 - g7)

    vals, errs = evaluate(a, b)
    while True:
        total = vals.sum()
        tol = rel_tol * max(abs(total), 1e-300)
        if errs.sum() <= tol:
            return total, errs.sum()
        if len(vals) >= max_panels:
            raise QuadratureError(
                f"Gauss-Kronrod budget exhausted: {len(vals)} panels, "
                f"error {errs.sum():.3e} > {tol:.3e}"
            )
        # bisect every panel contributing more than its share of the budget
        cut = max(errs.max() * 0.25, tol / max(len(vals), 1))
        split = errs >= cut
        if not split.any():
            split = errs == errs.max()
        keep = ~split
        mids = 0.5 * (a[split] + b[split])
        new_a = np.concatenate([a[keep], a[split], mids])
        new_b = np.concatenate([b[keep], mids, b[split]])
        new_vals, new_errs = evaluate(
            np.concatenate([a[split], mids]), np.concatenate([mids, b[split]])
        )
        vals = np.concatenate([vals[keep], new_vals])
        errs = np.concatenate([errs[keep], new_errs])
        a, b = new_a, new_b


# Constant of the integration-by-parts tail bound |psi_hat(u)| <= C / u^4
# for u >= 1 (one order sharper than the C^2-regularity bound C u^{-3};
# both hold, the sharper one keeps the truncation point reasonable).
_PSI3 = np.polynomial.polynomial.polyder(_POLY, 3)
_PSI4 = np.polynomial.polynomial.polyder(_POLY, 4)
_TAIL_C = float(
    abs(np.polynomial.polynomial.polyval(0.0, _PSI3))
    + abs(np.polynomial.polynomial.polyval(1.0, _PSI3))
    + np.abs(np.polynomial.polynomial.polyval(np.linspace(0, 1, 4001), _PSI4)).max()
)


def k_integral(alpha: float, rel_tol: float = 1e-9) -> float:
    """K_(psi,alpha) = int_R |psi_hat(u)|^2 |u|^{-alpha} du,  alpha < 1.

    The integrand behaves like u^{6-alpha} near 0 (psi_hat vanishes to
    third order) and decays like u^{-8-alpha} at infinity, so the integral
    converges for every alpha < 1.  Computed by adaptive Gauss-Kronrod
    bisection on [0, U] (doubled by symmetry), with U extended until the
    analytic tail bound falls below 1e-8 of the accumulated value.
    """
    if alpha >= 1.0:
        raise ValueError(f"k_integral diverges for alpha >= 1 (got {alpha})")

    def integrand(u):
        out = np.abs(psi_hat(u)) ** 2
        pos = u > 0.0
        with np.errstate(divide="ignore"):
            out[pos] *= u[pos] ** (-alpha)
        out[~pos] = 0.0
        return out

    upper = 512.0
    while True:
        edges = np.concatenate([[0.0], 2.0 ** np.arange(0, np.log2(upper) + 0.5)])
        value, _ = _adaptive_gk(integrand, edges, rel_tol=rel_tol)
        # tail:  int_U^inf C^2 u^{-8-alpha} du = C^2 U^{-7-alpha}/(7+alpha)
        tail = _TAIL_C**2 * upper ** (-7.0 - alpha) / (7.0 + alpha)
        if tail <= 1e-8 * value:
            return 2.0 * value
        if upper > 2**22:
            raise QuadratureError(f"tail bound not met by U={upper:g} for alpha={alpha}")
        upper *= 4.0


# ---------------------------------------------------------------------------
# covariance of log wavelet variances
# ---------------------------------------------------------------------------

#: the gamma integrands only ever see arguments r*lam <= _GAMMA_UPPER
_GAMMA_UPPER = 200.0


@functools.lru_cache(maxsize=1)
def _power_spectrum_spline() -> CubicSpline:
    """Cached cubic-spline table of |psi_hat(u)|^2 on [0, 201].

    Grid step 2e-3 reproduces the exact values to ~1e-6 relative; the
    tests compare spline and direct evaluation.  Contributions beyond
    u = 200 are below 1e-19 of the peak (u^{-8} decay squared).
    """
    grid = np.arange(0.0, _GAMMA_UPPER + 1.0, 0.002)
    return CubicSpline(grid, np.abs(psi_hat(grid)) ** 2)


@dataclass(frozen=True)
class CovarianceModel:
    """Asymptotic covariance of sqrt(N/a) (log T_N(r_i a) - center)_i.

    ``gamma`` is the ell x ell matrix for scale ratios ``ratios`` (fixed to
    1..ell), ``k_2d`` the weighted mass K_(psi,2d) entering its prefactor.
    """

    d: float
    ratios: tuple
    gamma: np.ndarray = field(repr=False)
    k_2d: float

    def __post_init__(self):
        g = self.gamma
        if g.shape != (len(self.ratios), len(self.ratios)):
            raise ValueError("gamma shape does not match ratios")
        if not np.allclose(g, g.T, rtol=0.0, atol=0.0):
            raise ValueError("gamma must be exactly symmetric")
        if np.any(np.diag(g) <= 0.0):
            raise ValueError("gamma diagonal must be strictly positive")

    @property
    def ell(self) -> int:
        return len(self.ratios)

    def submodel(self, indices) -> "CovarianceModel":
        """Restrict to a subset of the scale ratios (1-based ratio values)."""
        pos = [self.ratios.index(r) for r in indices]
        sub = self.gamma[np.ix_(pos, pos)]
        return CovarianceModel(self.d, tuple(indices), sub, self.k_2d)


def _pair_integral(i: int, j: int, d: float, spectrum, n_nodes: int) -> float:
    """Composite-Simpson value of int_0^L P(i lam) P(j lam) lam^{-4d} dlam."""
    L = _GAMMA_UPPER / max(i, j)
    lam = np.linspace(0.0, L, n_nodes + 1)
    with np.errstate(divide="ignore"):
        w = np.where(lam > 0.0, lam ** (-4.0 * d), 0.0)
    f = spectrum(i * lam) * spectrum(j * lam) * w
    f[0] = 0.0  # integrand vanishes like lam^{12-4d} at 0
    h = L / n_nodes
    return h / 3.0 * (f[0] + f[-1] + 4.0 * f[1::2].sum() + 2.0 * f[2:-1:2].sum())


def _block_integrals(m: int, d: float, spectrum, n_nodes: int) -> np.ndarray:
    """All pair integrals sharing max(i, j) == m, i = 1..m, in one sweep.

    Node-for-node identical to :func:`_pair_integral`.
    """
    L = _GAMMA_UPPER / m
    lam = np.linspace(0.0, L, n_nodes + 1)
    with np.errstate(divide="ignore"):
        w = np.where(lam > 0.0, lam ** (-4.0 * d), 0.0)
    f = spectrum(np.outer(np.arange(1, m + 1, dtype=float), lam))
    f *= (spectrum(m * lam) * w)[None, :]
    f[:, 0] = 0.0
    h = L / n_nodes
    return h / 3.0 * (f[:, 0] + f[:, -1] + 4.0 * f[:, 1::2].sum(axis=1) + 2.0 * f[:, 2:-1:2].sum(axis=1))


def gamma_matrix(
    d: float,
    ell: int,
    rel_tol: float = 1e-7,
    max_refine: int = 4,
) -> CovarianceModel:
    """Covariance matrix for scale ratios (1, ..., ell) at memory parameter d.

    Entry (i, j) is

        4 pi (i j)^{1-2d} K_(psi,2d)^{-2} int_R |psi_hat(i u)|^2 |psi_hat(j u)|^2 |u|^{-4d} du.

    Each pair integral runs composite Simpson at ~40 points per oscillation
    period of the faster factor on the tabulated power spectrum, doubling
    the resolution until successive values agree to ``rel_tol`` (failure
    raises QuadratureError naming the offending entry).  Pairs sharing the
    larger ratio are evaluated in one vectorized block.
    """
    if not d < 0.5:
        raise ValueError(f"gamma_matrix requires d < 1/2 (got {d})")
    if ell < 1:
        raise ValueError("ell must be >= 1")
    spectrum = _power_spectrum_spline()
    k2d = k_integral(2.0 * d)

    base = 1274  # ~40 nodes per period of the fastest oscillating factor
    raw = np.zeros((ell, ell))
    matrix_scale = 0.0
    for m in range(1, ell + 1):
        coarse = _block_integrals(m, d, spectrum, base)
        fine = _block_integrals(m, d, spectrum, 2 * base)
        matrix_scale = max(matrix_scale, np.abs(fine).max())
        # entries dwarfed by the matrix scale only need absolute accuracy
        scale = np.maximum(np.abs(fine), max(matrix_scale * 1e-10, 1e-300))
        bad = np.abs(fine - coarse) > rel_tol * scale
        for idx in np.nonzero(bad)[0]:
            i = int(idx) + 1
            n_nodes = 2 * base
            val = fine[idx]
            for _ in range(max_refine - 1):
                finer = _pair_integral(i, m, d, spectrum, 2 * n_nodes)
                if abs(finer - val) <= rel_tol * max(abs(finer), matrix_scale * 1e-10, 1e-300):
                    fine[idx] = finer
                    break
                val, n_nodes = finer, 2 * n_nodes
            else:
                raise QuadratureError(f"gamma entry ({i},{m}) did not converge")
        raw[: m, m - 1] = fine
        raw[m - 1, : m] = fine

    r = np.arange(1, ell + 1, dtype=float)
    gamma = 4.0 * np.pi * np.outer(r, r) ** (1.0 - 2.0 * d) / k2d**2 * 2.0 * raw
    gamma = 0.5 * (gamma + gamma.T)  # exact symmetry down to the last bit
    return CovarianceModel(d=float(d), ratios=tuple(range(1, ell + 1)), gamma=gamma, k_2d=k2d)


@functools.lru_cache(maxsize=256)
def _gamma_node(d_node: float, ell: int) -> CovarianceModel:
    return gamma_matrix(d_node, ell)


def interpolated_gamma(d: float, ell: int, step: float = 0.01) -> CovarianceModel:
    """Gamma at ``d`` by linear interpolation between cached grid nodes.

    The matrix varies smoothly (and little) in d, so a 0.01 grid keeps the
    interpolation error far below the statistical noise of the Monte-Carlo
    harness; single-estimate callers use :func:`gamma_matrix` directly.
    """
    lo = np.floor(d / step) * step
    hi = lo + step
    lo, hi = round(lo, 10), round(hi, 10)
    if abs(d - lo) < 1e-12:
        node = _gamma_node(lo, ell)
        return CovarianceModel(float(d), node.ratios, node.gamma, node.k_2d)
    g_lo, g_hi = _gamma_node(lo, ell), _gamma_node(hi, ell)
    w = (d - lo) / step
    gamma = (1.0 - w) * g_lo.gamma + w * g_hi.gamma
    k2d = (1.0 - w) * g_lo.k_2d + w * g_hi.k_2d
    return CovarianceModel(float(d), g_lo.ratios, gamma, k2d)


def regularized_inverse(gamma: np.ndarray, eig_floor: float = 1e-2) -> np.ndarray:
    """Inverse of ``gamma`` with eigenvalues floored at ``eig_floor * max``.

    The asymptotic covariance is numerically singular for more than a few
    dozen ratios (its spectrum decays geometrically, crossing float
    precision around ell ~ 30), and its tiniest eigendirections encode
    near-deterministic contrasts that finite samples cannot honor.  The
    floor keeps the weighted regression and the goodness-of-fit form
    stable; eig_floor=0 recovers the plain inverse.
    """
    mu, vectors = np.linalg.eigh(0.5 * (gamma + gamma.T))
    if eig_floor > 0.0:
        mu = np.maximum(mu, eig_floor * mu.max())
    if mu.min() <= 0.0:
        raise SingularCovarianceError("covariance not positive definite after flooring")
    return (vectors / mu) @ vectors.T


def sigma2_d(cov: CovarianceModel, eig_floor: float = 1e-6) -> float:
    """Asymptotic variance of the weighted slope estimate of d.

    Equals 1/4 times the (2,2) entry of (Z' Gamma^{-1} Z)^{-1} where Z has
    rows (1, log i) over the scale ratios.  The default floor only absorbs
    eigenvalues below the quadrature accuracy of the matrix entries (the
    idealized-variance regime, monotone decreasing in ell); the estimation
    pipeline passes its own, much larger floor so the reported interval
    matches the weighting actually used.
    """
    ginv = regularized_inverse(cov.gamma, eig_floor)
    z = np.column_stack([np.ones(cov.ell), np.log(np.asarray(cov.ratios, dtype=float))])
    normal = z.T @ ginv @ z
    try:
        inv = np.linalg.inv(normal)
    except np.linalg.LinAlgError as exc:  # pragma: no cover - needs >=2 distinct ratios
        raise SingularCovarianceError("normal equations singular") from exc
    return 0.25 * float(inv[1, 1])
