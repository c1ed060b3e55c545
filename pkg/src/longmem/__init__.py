"""Adaptive wavelet estimation of the long-memory parameter of a time series.

The package provides

* exact synthesis of benchmark long-memory processes (fGn, FARIMA with
  several innovation laws, Gaussian processes from a spectral density),
* the adaptive two-stage wavelet estimator of the memory parameter d with
  a pseudo-generalized least squares refinement, confidence interval and
  chi-square goodness-of-fit test,
* frequency-domain reference estimators (local Whittle, FEXP),
* a reproducible parallel Monte-Carlo harness for the benchmark tables,

plus a ``longmem`` command-line front end for all of it.
"""

from ._validation import (
    DegenerateSeriesError,
    EmbeddingError,
    LongmemError,
    QuadratureError,
    SingularCovarianceError,
)
from .estimation import (
    EstimateReport,
    ScaleSelection,
    Variogram,
    WaveletMemoryEstimator,
    chi2_quantile,
    gof_test,
    ols_fit,
    pgls_fit,
    select_scale,
    variogram,
    wavelet_coeffs,
)
from .montecarlo import (
    BENCHMARK_PROCESSES,
    McConfig,
    McSummary,
    emit_table,
    quick_profile,
    run_montecarlo,
)
from .spectral import (
    FexpEstimator,
    LocalWhittleEstimator,
    fexp_estimate,
    local_whittle,
    periodogram,
)
from .synthesis import (
    ProcessModel,
    TimeSeries,
    contaminate,
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
)
from .wavelet import (
    DEFAULT_WAVELET,
    CovarianceModel,
    WaveletSpec,
    gamma_matrix,
    interpolated_gamma,
    k_integral,
    psi_eval,
    psi_hat,
    sigma2_d,
)

__version__ = "0.1.0"

__all__ = [
    "BENCHMARK_PROCESSES",
    "CovarianceModel",
    "DEFAULT_WAVELET",
    "DegenerateSeriesError",
    "EmbeddingError",
    "EstimateReport",
    "FexpEstimator",
    "LocalWhittleEstimator",
    "LongmemError",
    "McConfig",
    "McSummary",
    "ProcessModel",
    "QuadratureError",
    "ScaleSelection",
    "SingularCovarianceError",
    "TimeSeries",
    "Variogram",
    "WaveletMemoryEstimator",
    "WaveletSpec",
    "chi2_quantile",
    "contaminate",
    "emit_table",
    "fexp_estimate",
    "gamma_matrix",
    "gen_farima",
    "gen_fgn",
    "gen_mfarima",
    "gen_spectral",
    "generate",
    "gof_test",
    "interpolated_gamma",
    "k_integral",
    "load_series",
    "load_series_binary",
    "load_series_csv",
    "local_whittle",
    "ols_fit",
    "periodogram",
    "pgls_fit",
    "psi_eval",
    "psi_hat",
    "quick_profile",
    "run_montecarlo",
    "save_series_binary",
    "save_series_csv",
    "select_scale",
    "sigma2_d",
    "variogram",
    "wavelet_coeffs",
]
