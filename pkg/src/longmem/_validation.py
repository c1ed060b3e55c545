"""Input validation helpers and the package exception hierarchy."""

from __future__ import annotations

import numpy as np


class LongmemError(Exception):
    """Base class for numeric failures raised by this package."""


class DegenerateSeriesError(LongmemError):
    """Series carries no usable signal (constant input, zero variogram, ...)."""


class QuadratureError(LongmemError):
    """A quadrature did not converge within its refinement budget."""


class EmbeddingError(LongmemError):
    """Circulant embedding produced inadmissible negative eigenvalues."""


class SingularCovarianceError(LongmemError):
    """Covariance matrix is singular even after regularization."""


def check_series(x, min_length: int = 16) -> np.ndarray:
    """Coerce ``x`` to a finite 1-d float array of length >= ``min_length``.

    Column vectors of shape (n, 1) are accepted and flattened, so the
    estimators compose with sklearn-style pipelines.
    """
    arr = np.asarray(x, dtype=float)
    if arr.ndim == 2 and arr.shape[1] == 1:
        arr = arr[:, 0]
    if arr.ndim != 1:
        raise ValueError(f"expected a 1-d series, got shape {arr.shape}")
    if arr.size < min_length:
        raise ValueError(f"series too short: {arr.size} < {min_length}")
    if not np.all(np.isfinite(arr)):
        raise ValueError("series contains non-finite values")
    return arr


def check_scales(scales, n: int) -> np.ndarray:
    """Validate a strictly increasing integer scale grid with 2 <= a <= n/2."""
    a = np.asarray(scales)
    if a.ndim != 1 or a.size == 0:
        raise ValueError("scales must be a non-empty 1-d sequence")
    if not np.issubdtype(a.dtype, np.integer):
        af = np.asarray(scales, dtype=float)
        if not np.allclose(af, np.round(af)):
            raise ValueError("scales must be integers")
        a = np.round(af).astype(int)
    if np.any(np.diff(a) <= 0):
        raise ValueError("scales must be strictly increasing")
    if a[0] < 2:
        raise ValueError("smallest scale must be >= 2")
    if a[-1] > n // 2:
        raise ValueError(f"largest scale {a[-1]} exceeds n/2 = {n // 2}")
    return a
