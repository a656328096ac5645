"""Straight-from-the-definition reference implementations.

Everything here is deliberately plain-loop Python: these are the independent
oracles the fast numpy paths are checked against, so they must not share code
(or vectorization bugs) with the package under test.
"""

from __future__ import annotations

import math


def pinball_oracle(actual: float, predicted: float, tau: float) -> float:
    u = actual - predicted
    if u < 0:
        return u * (tau - 1.0)
    return u * tau


def crps_oracle(actual, quantile_rows, levels) -> float:
    total = 0.0
    for y, row in zip(actual, quantile_rows, strict=True):
        step = 0.0
        for tau, q in zip(levels, row, strict=True):
            step += pinball_oracle(y, q, tau)
        total += step * 2.0 / len(levels)
    return total / len(actual)


def mase_oracle(actual, point, train, m: int):
    t = len(train)
    if t <= m:
        return None
    denom = 0.0
    for i in range(m, t):
        denom += abs(train[i] - train[i - m])
    denom /= t - m
    if denom == 0.0:
        return None
    num = 0.0
    for y, p in zip(actual, point, strict=True):
        num += abs(y - p)
    num /= len(actual)
    return num / denom


def quantile_oracle(values, tau: float) -> float:
    """Order statistic at position 1 + (n-1)*tau with linear interpolation."""
    srt = sorted(values)
    pos = 1.0 + (len(srt) - 1) * tau
    lo = int(math.floor(pos))
    hi = min(lo + 1, len(srt))
    frac = pos - lo
    return srt[lo - 1] + frac * (srt[hi - 1] - srt[lo - 1])


def floor_oracle(b_values):
    positive = [b for b in b_values if b > 0.0]
    if not positive:
        return None
    return quantile_oracle(positive, 0.10)


def median_oracle(values) -> float:
    srt = sorted(values)
    n = len(srt)
    if n % 2 == 1:
        return float(srt[n // 2])
    return (srt[n // 2 - 1] + srt[n // 2]) / 2.0


def fractional_ranks_oracle(values) -> list[float]:
    """Ascending ranks, ties averaged over the positions they occupy."""
    order = sorted(range(len(values)), key=lambda i: values[i])
    ranks = [0.0] * len(values)
    i = 0
    while i < len(order):
        j = i
        while j + 1 < len(order) and values[order[j + 1]] == values[order[i]]:
            j += 1
        mean_pos = (i + j) / 2.0 + 1.0
        for k in range(i, j + 1):
            ranks[order[k]] = mean_pos
        i = j + 1
    return ranks


_FREQ_POS = {"hourly": 0, "daily": 1, "weekly": 2, "monthly": 3}


def hierarchical_rank_oracle(instances) -> dict[str, float]:
    """Exhaustive three-level mean rank over (model, subdataset, freq,
    cutoff, value) tuples, reducing in the documented sorted-key order."""
    groups: dict[tuple[str, str, str], dict[str, list[float]]] = {}
    for model, sd, fq, co, v in instances:
        groups.setdefault((sd, fq, co), {}).setdefault(model, []).append(v)

    group_ranks: dict[tuple[str, str, str], dict[str, float]] = {}
    for key in sorted(groups):
        models = sorted(groups[key])
        medians = [median_oracle(groups[key][m]) for m in models]
        group_ranks[key] = dict(zip(models, fractional_ranks_oracle(medians)))

    cells: dict[tuple[str, str], dict[str, list[float]]] = {}
    for sd, fq, co in sorted(group_ranks):
        for model, rank in group_ranks[(sd, fq, co)].items():
            cells.setdefault((sd, fq), {}).setdefault(model, []).append(rank)
    cell_means = {key: {m: sum(r) / len(r) for m, r in sorted(per.items())}
                  for key, per in sorted(cells.items())}

    per_freq: dict[str, dict[str, list[float]]] = {}
    for (sd, fq), per in sorted(cell_means.items()):
        for model, rank in per.items():
            per_freq.setdefault(fq, {}).setdefault(model, []).append(rank)
    finals: dict[str, list[float]] = {}
    for fq in sorted(per_freq, key=lambda f: _FREQ_POS[f]):
        for model in sorted(per_freq[fq]):
            vals = per_freq[fq][model]
            finals.setdefault(model, []).append(sum(vals) / len(vals))
    return {m: sum(v) / len(v) for m, v in finals.items()}


def dft_oracle(series) -> list[complex]:
    """O(n^2) DFT, half spectrum: X_k = sum_t y_t exp(-2*pi*i*k*t/n)."""
    n = len(series)
    out = []
    for k in range(n // 2 + 1):
        acc = 0.0 + 0.0j
        for t, y in enumerate(series):
            ang = -2.0 * math.pi * k * t / n
            acc += y * complex(math.cos(ang), math.sin(ang))
        out.append(acc)
    return out


def permutation_entropy_oracle(series, order: int = 3, delay: int = 1):
    span = (order - 1) * delay
    n = len(series)
    if n < span + 1:
        return None
    counts: dict[tuple[int, ...], int] = {}
    for start in range(n - span):
        window = [series[start + k * delay] for k in range(order)]
        # ties rank by position: stable sort on (value, index)
        pattern = tuple(sorted(range(order), key=lambda k: (window[k], k)))
        counts[pattern] = counts.get(pattern, 0) + 1
    total = sum(counts.values())
    h = 0.0
    for c in counts.values():
        p = c / total
        h -= p * math.log(p)
    denom = math.log(math.factorial(order))
    return h / denom
