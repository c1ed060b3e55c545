"""Synthetic benchmark processes with reproducible seeding.

Gaussian processes (fGn and processes specified through a spectral
density) are drawn exactly by circulant embedding; FARIMA processes with
general innovations come from a truncated moving-average representation.
All generators are pure functions of (model, n, seed).
"""

from __future__ import annotations

import csv
import functools
import struct
from dataclasses import dataclass, replace

import numpy as np
from scipy.integrate import quad
from scipy.signal import fftconvolve, lfilter

from ._validation import EmbeddingError, check_series

__all__ = [
    "ProcessModel",
    "TimeSeries",
    "INNOVATIONS",
    "generate",
    "gen_fgn",
    "gen_farima",
    "gen_spectral",
    "gen_mfarima",
    "contaminate",
    "fgn_autocovariance",
    "spectral_autocovariance",
    "save_series_csv",
    "load_series_csv",
    "save_series_binary",
    "load_series_binary",
    "load_series",
]

INNOVATIONS = ("gaussian", "uniform", "burr", "cauchy")
SPECTRAL_DENSITIES = ("power_law", "shifted_singularity", "constant")

#: FARIMA moving-average truncation: the discarded weight tail has
#: sum_{j>M} a_j^2 = O(M^{2d-1}), under 1e-4 of the total variance at
#: d = 0.4 for M = 10^4.
MIN_TRUNCATION = 10_000


@dataclass(frozen=True)
class ProcessModel:
    """Tagged description of a synthetic process.

    ``kind`` is one of 'fgn', 'farima', 'spectral', 'mfarima';
    contamination flags add the deterministic trend / seasonal components.
    """

    kind: str
    hurst: float | None = None
    d: float | None = None
    dprime: float | None = None
    ar: tuple = ()
    ma: tuple = ()
    innovation: str = "gaussian"
    d_first: float | None = None
    d_second: float | None = None
    density: str | None = None
    trend: bool = False
    seasonal: bool = False

    def __post_init__(self):
        if self.kind == "fgn":
            if not (self.hurst is not None and 0.0 < self.hurst < 1.0):
                raise ValueError(f"fGn requires 0 < H < 1, got {self.hurst}")
        elif self.kind == "farima":
            if not (self.d is not None and abs(self.d) < 0.5):
                raise ValueError(f"FARIMA requires |d| < 0.5, got {self.d}")
            if self.innovation not in INNOVATIONS:
                raise ValueError(f"unknown innovation {self.innovation!r}")
            for name, poly in (("AR", self.ar), ("MA", self.ma)):
                if poly:
                    roots = np.roots([1.0] + [-c if name == "AR" else c for c in poly])
                    if roots.size and np.max(np.abs(roots)) >= 1.0:
                        raise ValueError(f"unstable {name} polynomial {poly}")
        elif self.kind == "spectral":
            if self.density not in SPECTRAL_DENSITIES:
                raise ValueError(f"unknown spectral density {self.density!r}")
            if self.density != "constant":
                if not (self.d is not None and 0.0 <= self.d < 0.5):
                    raise ValueError(f"spectral densities need 0 <= d < 1/2, got {self.d}")
            if self.density == "power_law" and not (self.dprime is not None and self.dprime > 0):
                raise ValueError("power_law density needs dprime > 0")
        elif self.kind == "mfarima":
            for v in (self.d_first, self.d_second):
                if not (v is not None and abs(v) < 0.5):
                    raise ValueError(f"mfarima requires |d| < 0.5 halves, got {v}")
        else:
            raise ValueError(f"unknown process kind {self.kind!r}")

    # -- convenience constructors ------------------------------------
    @classmethod
    def fgn(cls, hurst: float) -> "ProcessModel":
        return cls(kind="fgn", hurst=float(hurst))

    @classmethod
    def farima(cls, d: float, ar=(), ma=(), innovation: str = "gaussian") -> "ProcessModel":
        return cls(kind="farima", d=float(d), ar=tuple(ar), ma=tuple(ma), innovation=innovation)

    @classmethod
    def spectral(cls, density: str, d: float | None = None, dprime: float | None = None) -> "ProcessModel":
        return cls(kind="spectral", density=density, d=d, dprime=dprime)

    @classmethod
    def mfarima(cls, d_first: float, d_second: float) -> "ProcessModel":
        return cls(kind="mfarima", d_first=float(d_first), d_second=float(d_second))

    def contaminated(self, trend: bool = False, seasonal: bool = False) -> "ProcessModel":
        return replace(self, trend=trend, seasonal=seasonal)


@dataclass(frozen=True)
class TimeSeries:
    """A sampled path together with its generating model and seed."""

    values: np.ndarray
    model: ProcessModel
    seed: int

    def __post_init__(self):
        check_series(self.values)

    @property
    def n(self) -> int:
        return self.values.size


def _rng(seed) -> np.random.Generator:
    if isinstance(seed, np.random.Generator):
        return seed
    return np.random.default_rng(np.random.SeedSequence(seed))


# ---------------------------------------------------------------------------
# exact Gaussian synthesis by circulant embedding
# ---------------------------------------------------------------------------

def fgn_autocovariance(hurst: float, lags: int) -> np.ndarray:
    """gamma(k) = (|k+1|^2H - 2|k|^2H + |k-1|^2H)/2 for k = 0..lags."""
    k = np.arange(lags + 1, dtype=float)
    return 0.5 * (np.abs(k + 1) ** (2 * hurst) - 2 * k ** (2 * hurst) + np.abs(k - 1) ** (2 * hurst))


def _circulant_eigenvalues(acov: np.ndarray) -> np.ndarray:
    """Eigenvalues of the circulant extension of a Toeplitz covariance.

    ``acov`` holds lags 0..n; the embedding has size 2n.
    """
    first_row = np.concatenate([acov, acov[-2:0:-1]])
    return np.fft.fft(first_row).real


def _sample_circulant(eigenvalues: np.ndarray, n: int, rng: np.random.Generator) -> np.ndarray:
    m = eigenvalues.size  # = 2n
    z = np.empty(m, dtype=complex)
    z[0] = rng.standard_normal()
    z[n] = rng.standard_normal()
    v = rng.standard_normal((n - 1, 2))
    z[1:n] = (v[:, 0] + 1j * v[:, 1]) / np.sqrt(2.0)
    z[n + 1:] = np.conj(z[1:n][::-1])
    return np.sqrt(m) * np.fft.ifft(np.sqrt(eigenvalues) * z).real[:n]


@functools.lru_cache(maxsize=32)
def _fgn_eigenvalues(hurst: float, n: int) -> np.ndarray:
    lam = _circulant_eigenvalues(fgn_autocovariance(hurst, n))
    if lam.min() < -1e-9 * lam.max():
        # cannot happen for fGn covariances, kept as a hard guard
        raise EmbeddingError(f"fGn embedding eigenvalue {lam.min():.3e} < 0 at H={hurst}")
    return np.maximum(lam, 0.0)


def gen_fgn(hurst: float, n: int, seed) -> TimeSeries:
    """Exact fractional Gaussian noise (unit variance) of length n."""
    model = ProcessModel.fgn(hurst)
    rng = _rng(seed)
    values = _sample_circulant(_fgn_eigenvalues(float(hurst), n), n, rng)
    return TimeSeries(values, model, _seed_int(seed))


# ---------------------------------------------------------------------------
# FARIMA by truncated moving average
# ---------------------------------------------------------------------------

def frac_weights(d: float, m: int) -> np.ndarray:
    """Moving-average weights of (1-B)^{-d}: a_0 = 1, a_j = a_{j-1}(j-1+d)/j."""
    j = np.arange(1, m + 1, dtype=float)
    out = np.empty(m + 1)
    out[0] = 1.0
    out[1:] = np.cumprod((j - 1.0 + d) / j)
    return out


def burr_ppf(q):
    """Quantile function of the symmetric Burr(2,1) law: F(1) = 3/4, median 0."""
    q = np.clip(np.asarray(q, dtype=float), 1e-16, 1.0 - 1e-16)
    out = np.empty_like(q)
    hi = q >= 0.5
    out[hi] = np.sqrt(1.0 / (2.0 * (1.0 - q[hi])) - 1.0)
    out[~hi] = -np.sqrt(1.0 / (2.0 * q[~hi]) - 1.0)
    return out


def _draw_innovations(kind: str, size: int, rng: np.random.Generator) -> np.ndarray:
    if kind == "gaussian":
        return rng.standard_normal(size)
    if kind == "uniform":
        # U[-1,1] as-is (variance 1/3); d-estimation is scale invariant
        return rng.uniform(-1.0, 1.0, size)
    if kind == "burr":
        return burr_ppf(rng.random(size))
    if kind == "cauchy":
        return rng.standard_cauchy(size)
    raise ValueError(f"unknown innovation {kind!r}")


def _farima_values(model: ProcessModel, n: int, rng: np.random.Generator) -> np.ndarray:
    m = max(MIN_TRUNCATION, 10 * n)
    xi = _draw_innovations(model.innovation, m + n, rng)
    series = fftconvolve(xi, frac_weights(model.d, m))[: m + n]
    if model.ar or model.ma:
        series = lfilter([1.0, *model.ma], [1.0, *(-c for c in model.ar)], series)
    return series[m:]  # burn-in covers the MA ramp-up and the ARMA transient


def gen_farima(d: float, n: int, seed, ar=(), ma=(), innovation: str = "gaussian") -> TimeSeries:
    """FARIMA(p, d, q) path of length n from a truncated infinite sum."""
    model = ProcessModel.farima(d, ar=ar, ma=ma, innovation=innovation)
    values = _farima_values(model, n, _rng(seed))
    return TimeSeries(values, model, _seed_int(seed))


def gen_mfarima(d_first: float, d_second: float, n: int, seed) -> TimeSeries:
    """Two independent FARIMA(0,d,0) halves glued back to back."""
    model = ProcessModel.mfarima(d_first, d_second)
    rng = _rng(seed)
    half1 = _farima_values(ProcessModel.farima(d_first), n // 2, rng)
    half2 = _farima_values(ProcessModel.farima(d_second), n - n // 2, rng)
    return TimeSeries(np.concatenate([half1, half2]), model, _seed_int(seed))


# ---------------------------------------------------------------------------
# Gaussian processes from a spectral density
# ---------------------------------------------------------------------------

def _power_cos_small(k: float, beta: float, upper: float, tol: float = 1e-14) -> float:
    """int_0^upper x^{-beta} cos(kx) dx with k*upper <= 1, by the cosine series."""
    total, term_pow = 0.0, upper ** (1.0 - beta)
    m = 0
    while True:
        denom = 2 * m + 1 - beta
        term = (-1.0) ** m * term_pow / denom
        total += term
        if abs(term) < tol * max(abs(total), 1e-300) or m > 60:
            return total
        m += 1
        term_pow *= (k * upper) ** 2 / ((2 * m - 1) * (2 * m))


def _power_cos_integral(k: int, beta: float, upper: float) -> float:
    """S(k, beta) = int_0^upper x^{-beta} cos(kx) dx for beta < 1.

    Series on [0, min(upper, 1/k)] handles the power singularity; the
    oscillatory remainder goes to QUADPACK's cosine-weight rule.
    """
    if beta >= 1.0:
        raise ValueError("integral diverges for beta >= 1")
    if k == 0:
        return upper ** (1.0 - beta) / (1.0 - beta)
    cut = min(upper, 1.0 / k)
    value = _power_cos_small(k, beta, cut)
    if cut < upper:
        rest, _ = quad(
            lambda x: x ** (-beta), cut, upper, weight="cos", wvar=k,
            limit=200, epsabs=1e-13, epsrel=1e-11,
        )
        value += rest
    return value


def _power_cos_pi_asymptotic(k: np.ndarray, beta: float, terms: int = 4) -> np.ndarray:
    """Large-k expansion of int_0^pi x^{-beta} cos(kx) dx.

    Endpoint-0 contribution Gamma(1-beta) sin(pi beta/2) k^{beta-1} plus the
    alternating pi-endpoint series (sin(k pi) = 0 kills every other term);
    relative truncation error O((k pi)^{-2 terms}).
    """
    from scipy.special import gamma as gamma_fn

    k = np.asarray(k, dtype=float)
    lead = gamma_fn(1.0 - beta) * np.sin(np.pi * beta / 2.0) * k ** (beta - 1.0)
    tail = np.zeros_like(k)
    coef = beta
    for m in range(terms):
        tail += (-1.0) ** m * coef * np.pi ** (-beta - 1.0 - 2.0 * m) * k ** (-2.0 - 2.0 * m)
        coef *= (beta + 2.0 * m + 1.0) * (beta + 2.0 * m + 2.0)
    sign = np.where((np.round(k).astype(int) % 2) == 0, 1.0, -1.0)
    return lead - sign * tail


def _power_cos_pi_table(kmax: int, beta: float, switch: int = 64) -> np.ndarray:
    """S(k, beta) on [0, pi] for k = 0..kmax; quadrature below ``switch``,
    endpoint asymptotics above."""
    out = np.empty(kmax + 1)
    small = min(switch, kmax)
    for k in range(small + 1):
        out[k] = _power_cos_integral(k, beta, np.pi)
    if kmax > switch:
        ks = np.arange(switch + 1, kmax + 1, dtype=float)
        out[switch + 1:] = _power_cos_pi_asymptotic(ks, beta)
    return out


@functools.lru_cache(maxsize=16)
def spectral_autocovariance(density: str, d: float | None, dprime: float | None, lags: int) -> np.ndarray:
    """gamma(k) = int_{-pi}^{pi} f(lambda) cos(k lambda) dlambda, k = 0..lags."""
    if density == "constant":
        out = np.zeros(lags + 1)
        out[0] = 1.0  # f = 1/(2 pi): unit-variance white noise
        return out
    if density == "power_law":
        # f(lambda) = lambda^{-2d} (1 + lambda^{d'})
        s1 = _power_cos_pi_table(lags, 2.0 * d)
        s2 = _power_cos_pi_table(lags, 2.0 * d - dprime)
        return 2.0 * (s1 + s2)
    if density == "shifted_singularity":
        # f(lambda) = ||lambda| - pi/2|^{-2d}; odd lags vanish by symmetry
        # and gamma(2m) = 4 (-1)^m 2^{2d-1} S(m, 2d) on [0, pi]
        out = np.zeros(lags + 1)
        m_max = lags // 2
        s = _power_cos_pi_table(m_max, 2.0 * d)
        signs = np.where(np.arange(m_max + 1) % 2 == 0, 1.0, -1.0)
        out[0::2] = 4.0 * signs * 2.0 ** (2.0 * d - 1.0) * s
        return out
    raise ValueError(f"unknown spectral density {density!r}")


@functools.lru_cache(maxsize=16)
def _spectral_eigenvalues(density: str, d, dprime, n: int) -> np.ndarray:
    acov = spectral_autocovariance(density, d, dprime, n)
    lam = _circulant_eigenvalues(acov)
    negative = lam[lam < 0.0]
    if negative.size:
        # approximate densities may leak a little negative mass; clip it
        # when it is numerically irrelevant, fail loudly otherwise
        if -negative.sum() > 1e-6 * np.abs(lam).sum():
            raise EmbeddingError(
                f"negative eigenvalue mass {-negative.sum():.3e} exceeds budget "
                f"for density={density}, d={d}, d'={dprime}, n={n}"
            )
    return np.maximum(lam, 0.0)


def gen_spectral(density: str, n: int, seed, d: float | None = None, dprime: float | None = None) -> TimeSeries:
    """Gaussian series with the requested spectral density on [-pi, pi]."""
    model = ProcessModel.spectral(density, d=d, dprime=dprime)
    rng = _rng(seed)
    lam = _spectral_eigenvalues(density, model.d, model.dprime, n)
    values = _sample_circulant(lam, n, rng)
    return TimeSeries(values, model, _seed_int(seed))


# ---------------------------------------------------------------------------
# contamination and the generic entry point
# ---------------------------------------------------------------------------

def contaminate(ts: TimeSeries, trend: bool = False, seasonal: bool = False) -> TimeSeries:
    """Add the deterministic components 1 - 2t/n and sin(pi t / 6), t = 1..n."""
    if not trend and not seasonal:
        return ts
    t = np.arange(1, ts.n + 1, dtype=float)
    values = ts.values.copy()
    if trend:
        values += 1.0 - 2.0 * t / ts.n
    if seasonal:
        values += np.sin(np.pi * t / 6.0)  # period 12
    return TimeSeries(values, ts.model.contaminated(trend=trend, seasonal=seasonal), ts.seed)


def generate(model: ProcessModel, n: int, seed) -> TimeSeries:
    """Sample a path of length n from any ProcessModel."""
    rng = _rng(seed)
    if model.kind == "fgn":
        ts = TimeSeries(_sample_circulant(_fgn_eigenvalues(model.hurst, n), n, rng), model, _seed_int(seed))
    elif model.kind == "farima":
        ts = TimeSeries(_farima_values(model, n, rng), model, _seed_int(seed))
    elif model.kind == "spectral":
        lam = _spectral_eigenvalues(model.density, model.d, model.dprime, n)
        ts = TimeSeries(_sample_circulant(lam, n, rng), model, _seed_int(seed))
    elif model.kind == "mfarima":
        half1 = _farima_values(ProcessModel.farima(model.d_first), n // 2, rng)
        half2 = _farima_values(ProcessModel.farima(model.d_second), n - n // 2, rng)
        ts = TimeSeries(np.concatenate([half1, half2]), model, _seed_int(seed))
    else:  # pragma: no cover - guarded in ProcessModel
        raise ValueError(f"unknown kind {model.kind!r}")
    if model.trend or model.seasonal:
        base = TimeSeries(ts.values, replace(model, trend=False, seasonal=False), ts.seed)
        ts = contaminate(base, trend=model.trend, seasonal=model.seasonal)
    return ts


def _seed_int(seed) -> int:
    if isinstance(seed, np.random.Generator):
        return -1  # external generator: stream position unknown
    if isinstance(seed, (list, tuple)):
        return int(seed[0])
    return int(seed)


# ---------------------------------------------------------------------------
# series import/export
# ---------------------------------------------------------------------------

def save_series_csv(path, values) -> None:
    values = np.asarray(values, dtype=float)
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["value"])
        for v in values:
            writer.writerow([repr(float(v))])


def load_series_csv(path) -> np.ndarray:
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader)
        if header != ["value"]:
            raise ValueError(f"expected single-column CSV with header 'value', got {header}")
        return np.array([float(row[0]) for row in reader])


def save_series_binary(path, values) -> None:
    """Little-endian float64 payload behind an 8-byte length prefix."""
    values = np.asarray(values, dtype="<f8")
    with open(path, "wb") as fh:
        fh.write(struct.pack("<Q", values.size))
        fh.write(values.tobytes())


def load_series_binary(path) -> np.ndarray:
    with open(path, "rb") as fh:
        (count,) = struct.unpack("<Q", fh.read(8))
        data = np.frombuffer(fh.read(), dtype="<f8")
    if data.size != count:
        raise ValueError(f"binary series truncated: header says {count}, payload has {data.size}")
    return data.astype(float)


def load_series(path) -> np.ndarray:
    """Load a series from CSV or length-prefixed binary, sniffing the format."""
    with open(path, "rb") as fh:
        head = fh.read(8)
    if head[:5] == b"value":
        return load_series_csv(path)
    return load_series_binary(path)
