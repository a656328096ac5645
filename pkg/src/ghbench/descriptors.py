"""Shape descriptors for count series: spectral and ordinal-pattern summaries.

The spectrum is taken over the raw series (no detrending or mean removal, by
design: the DC bin carries level information that the centroid and entropy
weight like any other bin). Frequencies are in cycles per period, so 0.5 is
the Nyquist bin. Descriptors that would divide by zero on degenerate input
return None; callers flag those rows instead of publishing silent zeros.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass

import numpy as np

from .panel import SeriesKey

__all__ = [
    "Spectrum",
    "power_spectrum",
    "spectral_centroid",
    "spectral_entropy",
    "bandpower_ratio",
    "permutation_entropy",
    "SeriesDescriptors",
    "describe_series",
    "describe_panel",
    "render_rows",
]


@dataclass(frozen=True)
class Spectrum:
    freqs: np.ndarray       # f_k = k/n, k = 0..floor(n/2)
    amplitude: np.ndarray   # |X_k|
    power: np.ndarray       # |X_k|^2


def power_spectrum(series) -> Spectrum:
    """Half spectrum of the real DFT X_k = sum_t y_t exp(-2*pi*i*k*t/n)."""
    y = np.asarray(series, dtype=float)
    if y.ndim != 1 or y.shape[0] < 2:
        raise ValueError("need a 1-d series with at least 2 points")
    x = np.fft.rfft(y)
    amp = np.abs(x)
    freqs = np.arange(x.shape[0], dtype=float) / y.shape[0]
    return Spectrum(freqs=freqs, amplitude=amp, power=amp * amp)


def spectral_centroid(series) -> float | None:
    """Amplitude-weighted mean frequency, sum(f*|X|)/sum(|X|).

    Weights are magnitudes, not powers; the normalized-power weighting is
    reserved for the entropy. None on an all-zero series.
    """
    spec = power_spectrum(series)
    total = float(np.sum(spec.amplitude))
    if total == 0.0:
        return None
    return float(np.sum(spec.freqs * spec.amplitude) / total)


def spectral_entropy(series) -> float | None:
    """Entropy of the normalized power distribution, scaled to [0, 1] by log K."""
    spec = power_spectrum(series)
    total = float(np.sum(spec.power))
    if total == 0.0:
        return None
    p = spec.power / total
    nonzero = p[p > 0.0]
    h = -float(np.sum(nonzero * np.log(nonzero)))
    k = spec.freqs.shape[0]
    if k < 2:
        return None
    return h / math.log(k)


def bandpower_ratio(series, split: float = 0.125) -> float | None:
    """log(low/high) band power with the DC bin excluded from the low band.

    Low band is 0 < f <= split, high band f > split. None when either band
    is empty or carries zero power.
    """
    spec = power_spectrum(series)
    low_mask = (spec.freqs > 0.0) & (spec.freqs <= split)
    high_mask = spec.freqs > split
    low = float(np.sum(spec.power[low_mask]))
    high = float(np.sum(spec.power[high_mask]))
    if low <= 0.0 or high <= 0.0:
        return None
    return math.log(low / high)


def permutation_entropy(series, order: int = 3, delay: int = 1) -> float:
    """Normalized entropy of ordinal patterns of the given order and delay.

    Equal values rank by position (earlier index first). Result is in [0, 1]:
    0 for any monotone or constant series, 1 when all order! patterns are
    equally frequent.
    """
    y = np.asarray(series, dtype=float)
    span = (order - 1) * delay
    if y.ndim != 1 or y.shape[0] < span + 1:
        raise ValueError(f"need at least {span + 1} points for order={order} delay={delay}")
    n_windows = y.shape[0] - span
    idx = np.arange(n_windows)[:, None] + np.arange(order)[None, :] * delay
    windows = y[idx]
    # stable argsort implements the positional tie rule
    patterns = np.argsort(windows, axis=1, kind="stable")
    _, counts = np.unique(patterns, axis=0, return_counts=True)
    p = counts / n_windows
    h = -float(np.sum(p * np.log(p)))
    return h / math.log(math.factorial(order))


# -- panel-wide report --

@dataclass(frozen=True)
class SeriesDescriptors:
    """Shape summary of one series, None where a statistic is undefined."""

    repo: str
    kind: str
    freq: str
    n_periods: int
    spectral_centroid: float | None
    spectral_entropy: float | None
    log_bandpower_ratio: float | None
    permutation_entropy: float | None


def describe_series(values, *, bandpower_split: float = 0.125,
                    permutation_order: int = 3,
                    permutation_delay: int = 1) -> dict[str, float | None]:
    """All four descriptors for one value sequence, None when undefined.

    Spectral statistics need at least two points; the ordinal entropy needs
    enough points for one window. Short series degrade to None rather than
    raising, since a panel sweep has no use for partial failures.
    """
    n = len(values)
    out: dict[str, float | None] = {
        "spectral_centroid": None,
        "spectral_entropy": None,
        "log_bandpower_ratio": None,
        "permutation_entropy": None,
    }
    if n >= 2:
        out["spectral_centroid"] = spectral_centroid(values)
        out["spectral_entropy"] = spectral_entropy(values)
        out["log_bandpower_ratio"] = bandpower_ratio(values, split=bandpower_split)
    try:
        out["permutation_entropy"] = permutation_entropy(
            values, order=permutation_order, delay=permutation_delay)
    except ValueError:
        pass
    return out


def describe_panel(store, repos, kinds, freqs, params) -> list[SeriesDescriptors]:
    """Describe every (repo, kind, freq) series using complete periods only."""
    rows = []
    for freq in freqs:
        for kind in kinds:
            for repo in repos:
                try:
                    series = store.read_series(SeriesKey(repo, kind, freq))
                except KeyError:
                    continue
                values = [float(p.value) for p in series.points if p.complete]
                stats = describe_series(
                    values,
                    bandpower_split=params.bandpower_split,
                    permutation_order=params.permutation_order,
                    permutation_delay=params.permutation_delay)
                rows.append(SeriesDescriptors(
                    repo=repo, kind=kind, freq=str(freq), n_periods=len(values),
                    **stats))
    return rows


DESCRIPTOR_HEADER = ("repo", "kind", "freq", "n_periods", "spectral_centroid",
                     "spectral_entropy", "log_bandpower_ratio", "permutation_entropy")


def render_rows(rows) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(DESCRIPTOR_HEADER)
    for row in rows:
        writer.writerow([
            "" if (value := getattr(row, column)) is None
            else (repr(value) if isinstance(value, float) else str(value))
            for column in DESCRIPTOR_HEADER])
    return buf.getvalue()
