"""Leaderboard aggregation: medians and hierarchical mean ranks.

Scores enter as per-instance scaled metrics (one instance = one model on one
series at one cutoff). Aggregation runs in three levels: models are ranked
within each (subdataset, frequency, cutoff) group on their group median, the
ranks are averaged over cutoffs within (subdataset, frequency), then over
subdatasets, then over frequencies. Ties share the mean of the positions they
occupy; a model absent from a group simply does not appear in that group's
ranking and the upper levels average over what exists.

All reductions iterate in a fixed documented order so runs are reproducible
bit for bit: cutoffs and subdatasets sort by their string keys, frequencies
follow the canonical hourly, daily, weekly, monthly order, and sums are
accumulated left to right over those sorted keys.
"""

from __future__ import annotations

import csv
import io
import json
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .metrics import MetricRecord
from .timegrid import FREQ_ORDER

MASE = "mase"
CRPS = "crps"
METRICS = (MASE, CRPS)

_FREQ_POSITION = {str(f): i for i, f in enumerate(FREQ_ORDER)}


@dataclass(frozen=True)
class ScoredInstance:
    """One defined scaled score for one model on one series-cutoff."""

    model: str
    subdataset: str
    freq: str
    cutoff: str
    value: float


@dataclass(frozen=True)
class LeaderboardRow:
    model: str
    median_mase_scaled: float | None
    median_crps_scaled: float | None
    mean_rank_mase: float | None
    mean_rank_crps: float | None
    sort_key: float | None
    n_mase: int
    n_crps: int


def median_values(instances: Iterable[ScoredInstance]) -> dict[str, float]:
    """Per-model median over every defined instance, pooled across groups."""
    pooled: dict[str, list[float]] = {}
    for inst in instances:
        pooled.setdefault(inst.model, []).append(inst.value)
    return {model: float(np.median(vals)) for model, vals in sorted(pooled.items())}


def fractional_ranks(scores: dict[str, float]) -> dict[str, float]:
    """Ascending ranks, ties sharing the mean of their positions."""
    ordered = sorted(scores.items(), key=lambda kv: (kv[1], kv[0]))
    ranks: dict[str, float] = {}
    i = 0
    while i < len(ordered):
        j = i
        while j + 1 < len(ordered) and ordered[j + 1][1] == ordered[i][1]:
            j += 1
        mean_pos = (i + j) / 2.0 + 1.0
        for k in range(i, j + 1):
            ranks[ordered[k][0]] = mean_pos
        i = j + 1
    return ranks


def hierarchical_mean_rank(instances: Iterable[ScoredInstance]) -> dict[str, float]:
    """Three-level mean rank per model; models with no instances are absent."""
    # group medians at (subdataset, freq, cutoff)
    groups: dict[tuple[str, str, str], dict[str, list[float]]] = {}
    for inst in instances:
        key = (inst.subdataset, inst.freq, inst.cutoff)
        groups.setdefault(key, {}).setdefault(inst.model, []).append(inst.value)

    # level 1: rank within each group
    group_ranks: dict[tuple[str, str, str], dict[str, float]] = {}
    for key in sorted(groups):
        medians = {model: float(np.median(vals))
                   for model, vals in sorted(groups[key].items())}
        group_ranks[key] = fractional_ranks(medians)

    # level 2: mean over cutoffs within (subdataset, freq)
    cell_ranks: dict[tuple[str, str], dict[str, float]] = {}
    cells: dict[tuple[str, str], list[str]] = {}
    for (subdataset, freq, cutoff) in sorted(group_ranks):
        cells.setdefault((subdataset, freq), []).append(cutoff)
    for (subdataset, freq), cutoffs in sorted(cells.items()):
        per_model: dict[str, list[float]] = {}
        for cutoff in sorted(cutoffs):
            for model, rank in group_ranks[(subdataset, freq, cutoff)].items():
                per_model.setdefault(model, []).append(rank)
        cell_ranks[(subdataset, freq)] = {
            model: _mean(ranks) for model, ranks in sorted(per_model.items())}

    # level 3: mean over subdatasets within each freq, then over freqs
    freq_accum: dict[str, dict[str, list[float]]] = {}
    for (subdataset, freq), per_model in sorted(cell_ranks.items()):
        for model, rank in per_model.items():
            freq_accum.setdefault(freq, {}).setdefault(model, []).append(rank)
    final_lists: dict[str, list[float]] = {}
    for freq in sorted(freq_accum, key=lambda f: _FREQ_POSITION.get(f, 99)):
        for model in sorted(freq_accum[freq]):
            final_lists.setdefault(model, []).append(_mean(freq_accum[freq][model]))
    return {model: _mean(vals) for model, vals in sorted(final_lists.items())}


def _mean(values: Sequence[float]) -> float:
    total = 0.0
    for v in values:  # fixed left-to-right accumulation
        total += v
    return total / len(values)


def instances_from_records(records: Iterable[MetricRecord],
                           strata: dict[tuple[str, str], str],
                           metric: str) -> tuple[list[ScoredInstance], int]:
    """Convert metric records to defined instances; returns (kept, excluded).

    Excluded counts instances whose scaled value for this metric is
    undefined (short context for MASE, or an undefined scaling floor).
    """
    kept: list[ScoredInstance] = []
    excluded = 0
    for rec in records:
        value = rec.mase_scaled if metric == MASE else rec.crps_scaled
        if value is None:
            excluded += 1
            continue
        stratum = strata.get((rec.repo, rec.kind))
        if stratum is None:
            raise KeyError(f"no stratum for series ({rec.repo}, {rec.kind})")
        kept.append(ScoredInstance(
            model=rec.model,
            subdataset=f"{rec.kind}/{stratum}",
            freq=rec.freq,
            cutoff=rec.cutoff,
            value=value,
        ))
    return kept, excluded


def build_leaderboard(records: Iterable[MetricRecord],
                      strata: dict[tuple[str, str], str],
                      worst_first: bool = False) -> tuple[list[LeaderboardRow], dict[str, int]]:
    """Aggregate records into sorted rows plus the per-metric exclusion tally.

    Rows sort by the mean of the two rank columns, best first; ties fall back
    to the scaled CRPS median and then the model name. ``worst_first``
    reverses the final order. A model with no defined instances for a metric
    gets None in that column; its sort key averages the columns that exist,
    and a model with neither column sorts last.
    """
    records = list(records)
    by_metric: dict[str, list[ScoredInstance]] = {}
    exclusions: dict[str, int] = {}
    for metric in METRICS:
        by_metric[metric], exclusions[metric] = instances_from_records(
            records, strata, metric)
    medians = {m: median_values(by_metric[m]) for m in METRICS}
    mean_ranks = {m: hierarchical_mean_rank(by_metric[m]) for m in METRICS}

    models = sorted({rec.model for rec in records})
    rows = []
    for model in models:
        rank_mase = mean_ranks[MASE].get(model)
        rank_crps = mean_ranks[CRPS].get(model)
        defined = [r for r in (rank_mase, rank_crps) if r is not None]
        sort_key = _mean(defined) if defined else None
        rows.append(LeaderboardRow(
            model=model,
            median_mase_scaled=medians[MASE].get(model),
            median_crps_scaled=medians[CRPS].get(model),
            mean_rank_mase=rank_mase,
            mean_rank_crps=rank_crps,
            sort_key=sort_key,
            n_mase=sum(1 for i in by_metric[MASE] if i.model == model),
            n_crps=sum(1 for i in by_metric[CRPS] if i.model == model),
        ))

    def order(row: LeaderboardRow):
        missing = row.sort_key is None
        key = 0.0 if row.sort_key is None else row.sort_key
        crps_median = row.median_crps_scaled if row.median_crps_scaled is not None else 0.0
        return (missing, key, crps_median, row.model)

    rows.sort(key=order)
    if worst_first:
        rows.reverse()
    return rows, exclusions


# -- report files --

CSV_HEADER = ("model", "median_mase_scaled", "median_crps_scaled",
              "mean_rank_mase", "mean_rank_crps", "sort_key", "n_mase", "n_crps")


def _cell(value) -> str:
    if value is None:
        return ""
    return repr(value) if isinstance(value, float) else str(value)


def render_csv(rows: Sequence[LeaderboardRow]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(CSV_HEADER)
    for row in rows:
        writer.writerow([_cell(getattr(row, column)) for column in CSV_HEADER])
    return buf.getvalue()


def render_json(rows: Sequence[LeaderboardRow], exclusions: dict[str, int], *,
                as_of: str | None, worst_first: bool, data_version: str,
                cutoffs: dict[str, list[str]]) -> str:
    body = {
        "data_version": data_version,
        "as_of": as_of,
        "worst_first": worst_first,
        "cutoffs": cutoffs,
        "excluded_unscaled": exclusions,
        "rows": [{column: getattr(row, column) for column in CSV_HEADER}
                 for row in rows],
    }
    return json.dumps(body, indent=2, sort_keys=True) + "\n"
