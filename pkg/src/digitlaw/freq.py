"""Chi-squared goodness of fit and the threshold dataset behind the rejection band.

The threshold dataset at N puts exactly N/10 counts in digits 0..7 and
splits the remaining 2N/10 between digits 8 and 9 so that the chi-squared
statistic lands on the critical value.  With the first eight summands zero
and both remaining deviations equal in size, the quadratic collapses to

    2 (n_8 - N/10)^2 / (N/10) = chi2_crit   =>   n_8 = N/10 + sqrt(chi2_crit N / 20)

Counts must be integers, so n_8 is rounded to the nearest integer; the
induced slack in the statistic is below 0.2 for N >= 1e4.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .bayes import N_DIGITS, DigitCounts, Prior, log_bf01
from .specfun import chisq_quantile

__all__ = [
    "ThresholdCounts",
    "chisq_stat",
    "critical_value",
    "threshold_counts",
    "threshold_matrix",
    "threshold_log_bf",
    "band_log_bf",
]


@dataclass(frozen=True)
class ThresholdCounts:
    counts: DigitCounts
    critical: float
    alpha: float
    df: int

    @property
    def statistic(self) -> float:
        return chisq_stat(self.counts)


def chisq_stat(counts):
    """Pearson statistic sum_j (n_j - N/K)^2 / (N/K) against equal frequencies.

    :class:`DigitCounts` inputs are evaluated in exact integer arithmetic;
    arrays (rows of counts) in float64 from exact integer deviations.
    """
    if isinstance(counts, DigitCounts):
        n = counts.total
        if n == 0:
            raise ValueError("chi-squared statistic undefined for N = 0")
        k = counts.k
        # sum (K n_j - N)^2 / (K N), numerator exact
        num = sum((k * c - n) ** 2 for c in counts.counts)
        return num / (k * n)
    arr = np.asarray(counts, dtype=np.int64)
    k = arr.shape[-1]
    n = arr.sum(axis=-1)
    if np.any(n == 0):
        raise ValueError("chi-squared statistic undefined for N = 0")
    dev = (k * arr - n[..., None]).astype(np.float64)
    return np.sum(dev * dev, axis=-1) / (k * n.astype(np.float64))


@lru_cache(maxsize=64)
def critical_value(alpha: float = 0.05, df: int = N_DIGITS - 1) -> float:
    """Upper-alpha critical value of chi-squared with ``df`` degrees of freedom."""
    if not 0.0 < alpha < 1.0:
        raise ValueError("alpha must lie in (0, 1)")
    return chisq_quantile(1.0 - alpha, df)


def _offset(n, crit):
    return np.rint(np.sqrt(crit * np.asarray(n, dtype=np.float64) / 20.0)).astype(np.int64)


def threshold_counts(n: int, alpha: float = 0.05, df: int = N_DIGITS - 1) -> ThresholdCounts:
    """Integer count vector whose chi-squared statistic sits at the critical value.

    Takes the positive root (n_8 above N/10); the mirror-image root gives the
    same statistic and the same symmetric-prior Bayes factor.
    """
    n = int(n)
    if n < N_DIGITS or n % N_DIGITS:
        raise ValueError(f"N must be a positive multiple of {N_DIGITS}, got {n}")
    crit = critical_value(alpha, df)
    base = n // N_DIGITS
    n8 = base + int(_offset(n, crit))
    n9 = 2 * base - n8
    if n9 < 0:
        raise ValueError(
            f"no threshold dataset at N = {n}: the critical value {crit:.4g} "
            "cannot be reached with nonnegative counts"
        )
    counts = DigitCounts((base,) * 8 + (n8, n9))
    return ThresholdCounts(counts=counts, critical=crit, alpha=alpha, df=df)


def threshold_matrix(ns, alpha: float = 0.05, df: int = N_DIGITS - 1) -> np.ndarray:
    """Threshold count rows for many N at once; rows are NaN where N is not a
    multiple of 10 or no nonnegative threshold dataset exists."""
    ns = np.asarray(ns, dtype=np.int64)
    crit = critical_value(alpha, df)
    base = ns // N_DIGITS
    n8 = base + _offset(ns, crit)
    n9 = 2 * base - n8
    out = np.repeat(base[..., None].astype(np.float64), N_DIGITS, axis=-1)
    out[..., 8] = n8
    out[..., 9] = n9
    bad = (ns % N_DIGITS != 0) | (ns < N_DIGITS) | (n9 < 0)
    out[bad] = np.nan
    return out


def threshold_log_bf(n: int, prior: Prior, alpha: float = 0.05, df: int = N_DIGITS - 1) -> float:
    """log BF01 of the threshold dataset: lower edge of the non-rejection band."""
    return log_bf01(threshold_counts(n, alpha, df).counts, prior)


def band_log_bf(ns, prior: Prior, alpha: float = 0.05, df: int = N_DIGITS - 1) -> np.ndarray:
    """Vectorized :func:`threshold_log_bf`; NaN where the threshold is undefined."""
    rows = threshold_matrix(ns, alpha, df)
    out = np.full(rows.shape[:-1], np.nan)
    ok = ~np.isnan(rows[..., 0])
    if np.any(ok):
        out[ok] = log_bf01(rows[ok], prior)
    return out

