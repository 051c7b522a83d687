"""Numerical kernels for the audio pipeline: DCT-II, delta regression, statistics."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.fft import dct

from .exceptions import DepfusionError, EmptyInputError

STAT_NAMES = ("mean", "median", "std", "peak_to_rms")


def _as_series(series):
    x = np.asarray(series, dtype=np.float64)
    if x.ndim != 1:
        raise DepfusionError(f"expected a 1-d series, got shape {x.shape}")
    if x.size == 0:
        raise EmptyInputError("series is empty")
    return x


def dct2(series):
    """Orthonormal DCT-II of a 1-d series."""
    x = _as_series(series)
    n = x.size
    # unnormalized scipy DCT-II is 2 * sum(...); rescale so X_0 = sqrt(1/n) * sum(x)
    out = dct(x, type=2)
    out[0] *= np.sqrt(1.0 / (4 * n))
    out[1:] *= np.sqrt(1.0 / (2 * n))
    return out


def top_k_dct(series, k=10, selection="largest_magnitude"):
    """Select ``k`` DCT-II coefficients of ``series``.

    ``largest_magnitude`` keeps the k coefficients of largest absolute value
    (signed, ordered by descending magnitude, ties to the lower index);
    ``first_k`` keeps the k lowest-order coefficients. Short series are padded
    with trailing zeros to length k.
    """
    if k < 1:
        raise DepfusionError("k must be >= 1")
    coeffs = dct2(series)
    if selection == "largest_magnitude":
        order = np.argsort(-np.abs(coeffs), kind="stable")
        picked = coeffs[order[:k]]
    elif selection == "first_k":
        picked = coeffs[:k]
    else:
        raise DepfusionError(f"unknown DCT selection {selection!r}")
    out = np.zeros(k)
    out[: picked.size] = picked
    return out


def delta(series, window=2):
    """Regression delta with replicate edge padding.

    d_t = sum_n n * (x[t+n] - x[t-n]) / (2 * sum_n n^2), n = 1..window.
    """
    if window < 1:
        raise DepfusionError("delta window must be >= 1")
    x = _as_series(series)
    n = x.size
    padded = np.pad(x, window, mode="edge")
    num = np.zeros(n)
    for k in range(1, window + 1):
        num += k * (padded[window + k : window + k + n] - padded[window - k : window - k + n])
    return num / (2.0 * sum(k * k for k in range(1, window + 1)))


def delta_delta(series, window=2):
    return delta(delta(series, window), window)


@dataclass(frozen=True)
class StatSet:
    mean: float
    median: float
    std: float
    peak_to_rms: float

    def as_tuple(self):
        return (self.mean, self.median, self.std, self.peak_to_rms)


def stat_descriptors(series) -> StatSet:
    """Mean, median, population std and crest factor (max|x| / rms)."""
    x = _as_series(series)
    mean = float(np.mean(x))
    # constant series must give exactly zero spread
    std = 0.0 if np.ptp(x) == 0 else float(np.sqrt(np.mean((x - mean) ** 2)))
    peak = float(np.max(np.abs(x)))
    # normalize by the peak so x**2 cannot underflow or overflow
    peak_to_rms = 0.0 if peak == 0.0 else float(1.0 / np.sqrt(np.mean((x / peak) ** 2)))
    return StatSet(mean, float(np.median(x)), std, peak_to_rms)
