"""Forecast accuracy metrics and the zero-forecast scaling scheme.

Raw scores are scale-dependent, so published numbers are divided by
max(b, tau0): b is the zero forecast's score on the same series/cutoff
instance and tau0 is the 10th percentile of the strictly positive zero scores
in the same (subdataset, frequency, metric) cell. This keeps near-dead series
from dominating through division by almost-zero.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .timegrid import Freq

__all__ = [
    "DEFAULT_SEASONAL_PERIODS",
    "MetricRecord",
    "ScalingFloor",
    "pinball",
    "crps",
    "mase",
    "compute_floor",
    "scale",
]

#: Seasonal lag m per frequency, used by the MASE denominator and the
#: seasonal-naive baseline alike.
DEFAULT_SEASONAL_PERIODS: dict[Freq, int] = {
    Freq.HOURLY: 24,
    Freq.DAILY: 7,
    Freq.WEEKLY: 52,
    Freq.MONTHLY: 12,
}


@dataclass(frozen=True)
class MetricRecord:
    """One scored (model, series, cutoff) instance. None marks undefined."""

    model: str
    repo: str
    kind: str
    freq: str
    cutoff: str
    n_scored_steps: int
    mase_raw: float | None
    crps_raw: float
    mase_scaled: float | None = None
    crps_scaled: float | None = None


@dataclass(frozen=True)
class ScalingFloor:
    """Positive-score percentile floor for one (subdataset, freq, metric) cell."""

    subdataset: str
    freq: str
    metric: str
    tau0: float | None
    n_positive: int


def pinball(actual: float, predicted: float, tau: float) -> float:
    """Quantile loss: u * (tau - 1[u < 0]) with u = actual - predicted."""
    u = actual - predicted
    return u * (tau - (1.0 if u < 0 else 0.0))


def crps(actual, quantile_matrix, levels) -> float:
    """Quantile-averaged pinball loss, averaged over the scored steps.

    quantile_matrix has one row per scored step and one column per level in
    ``levels``; the 2/len(levels) weight makes this the standard discrete
    CRPS approximation.
    """
    y = np.asarray(actual, dtype=float)
    q = np.asarray(quantile_matrix, dtype=float)
    taus = np.asarray(levels, dtype=float)
    if q.shape != (y.shape[0], taus.shape[0]):
        raise ValueError(f"quantile matrix shape {q.shape} does not match "
                         f"{y.shape[0]} steps x {taus.shape[0]} levels")
    if y.shape[0] == 0:
        raise ValueError("crps needs at least one scored step")
    u = y[:, None] - q
    loss = u * (taus[None, :] - (u < 0).astype(float))
    return float(np.mean(np.sum(loss, axis=1) * (2.0 / taus.shape[0])))


def mase(actual, point, train, m: int) -> float | None:
    """Mean absolute error scaled by the in-sample seasonal-naive error.

    The denominator is mean(|train[t] - train[t-m]|) over t = m..len(train)-1.
    Returns None (undefined) when the training window is too short (T <= m)
    or the series is exactly m-periodic in-sample (zero denominator).
    """
    y = np.asarray(actual, dtype=float)
    p = np.asarray(point, dtype=float)
    tr = np.asarray(train, dtype=float)
    if y.shape != p.shape or y.ndim != 1:
        raise ValueError("actual and point must be 1-d arrays of equal length")
    if y.shape[0] == 0:
        raise ValueError("mase needs at least one scored step")
    t = tr.shape[0]
    if t <= m:
        return None
    denom = float(np.mean(np.abs(tr[m:] - tr[:-m])))
    if denom == 0.0:
        return None
    return float(np.mean(np.abs(y - p)) / denom)


def compute_floor(b_values) -> float | None:
    """10th percentile (linear interpolation) of the strictly positive scores.

    Returns None when no score is positive, leaving the cell's scaled values
    undefined rather than dividing by zero.
    """
    arr = np.asarray(list(b_values), dtype=float)
    positive = arr[arr > 0.0]
    if positive.size == 0:
        return None
    return float(np.percentile(positive, 10.0))


def scale(value: float | None, b: float | None, tau0: float | None) -> float | None:
    """value / max(b, tau0); None whenever any ingredient is undefined."""
    if value is None or b is None or tau0 is None:
        return None
    denom = max(b, tau0)
    if denom <= 0.0 or not math.isfinite(denom):
        return None
    return value / denom
