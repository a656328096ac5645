"""Scoring runs: turn validated forecasts plus panel truth into metric records.

A record is one (model, series, cutoff) evaluation. Horizon steps whose
ground-truth period is incomplete or missing are excluded from scoring; a
record is only emitted when at least one step could be scored. Raw scores are
kept alongside scaled ones so the scaling step stays auditable.
"""

from __future__ import annotations

import json
from typing import Iterable, Sequence

import numpy as np

from . import metrics
from .metrics import MetricRecord, ScalingFloor
from .panel import PanelStore, SeriesKey
from .protocol import MEDIAN_COLUMN, ForecastJob, QuantileForecast, horizon_starts
from .timegrid import Freq, format_ts, parse_ts

MASE = "mase"
CRPS = "crps"


def actuals_for_job(store: PanelStore, job: ForecastJob) -> list[float | None]:
    """Ground truth per horizon step; None where the period is unusable."""
    series = store.read_series(SeriesKey(job.repo, job.kind, job.freq))
    by_start = {p.start: p for p in series.points}
    out: list[float | None] = []
    for start in horizon_starts(job.cutoff, job.freq, job.horizon):
        point = by_start.get(start)
        out.append(float(point.value) if point is not None and point.complete else None)
    return out


def score_forecast(job: ForecastJob, forecast: QuantileForecast,
                   actuals: Sequence[float | None],
                   seasonal_period: int) -> MetricRecord | None:
    """Raw-score one forecast; None when no horizon step was scorable."""
    scored = [i for i, a in enumerate(actuals) if a is not None]
    if not scored:
        return None
    actual = np.asarray([actuals[i] for i in scored], dtype=float)
    matrix = np.asarray(forecast.values, dtype=float)[scored, :]
    point = matrix[:, MEDIAN_COLUMN]
    return MetricRecord(
        model=forecast.model,
        repo=job.repo,
        kind=job.kind,
        freq=job.freq,
        cutoff=job.cutoff,
        n_scored_steps=len(scored),
        mase_raw=metrics.mase(actual, point, np.asarray(job.context, dtype=float),
                              seasonal_period),
        crps_raw=metrics.crps(actual, matrix, job.quantile_levels),
    )


# -- scaling floors --

def floor_cell(subdataset: str, freq: Freq, metric: str) -> str:
    return f"{subdataset}|{freq}|{metric}"


def compute_floors(zero_records: Iterable[MetricRecord],
                   strata: dict[tuple[str, str], str]) -> dict[str, ScalingFloor]:
    """Pool reference scores per (subdataset, freq, metric) cell.

    The pool spans every cutoff of the frequency: the floor is a property of
    the cell, not of a single evaluation round. Cells whose reference scores
    are all zero get a floor of None, and instances in them stay unscaled.
    """
    pools: dict[tuple[str, Freq, str], list[float]] = {}
    for rec in zero_records:
        subdataset = f"{rec.kind}/{strata[(rec.repo, rec.kind)]}"
        for metric, value in ((MASE, rec.mase_raw), (CRPS, rec.crps_raw)):
            if value is not None:
                pools.setdefault((subdataset, rec.freq, metric), []).append(value)
    out: dict[str, ScalingFloor] = {}
    for (subdataset, freq, metric), values in sorted(
            pools.items(), key=lambda kv: (kv[0][0], str(kv[0][1]), kv[0][2])):
        out[floor_cell(subdataset, freq, metric)] = ScalingFloor(
            subdataset=subdataset,
            freq=freq,
            metric=metric,
            tau0=metrics.compute_floor(values),
            n_positive=sum(1 for v in values if v > 0.0),
        )
    return out


def render_floors(floors: dict[str, ScalingFloor]) -> str:
    cells = {
        key: {"tau0": f.tau0, "n_positive": f.n_positive}
        for key, f in sorted(floors.items())
    }
    return json.dumps({"cells": cells}, indent=2, sort_keys=True) + "\n"


def parse_floors(text: str) -> dict[str, float | None]:
    """Floor values by cell key; None marks an undefined (all-zero) cell."""
    cells = json.loads(text)["cells"]
    return {key: entry["tau0"] for key, entry in cells.items()}


def scale_record(record: MetricRecord,
                 reference: MetricRecord | None,
                 floors: dict[str, float | None],
                 strata: dict[tuple[str, str], str]) -> MetricRecord:
    """Attach scaled scores using the reference model's raw score as divisor."""
    subdataset = f"{record.kind}/{strata[(record.repo, record.kind)]}"

    def _scaled(metric: str, raw: float | None, ref_raw: float | None) -> float | None:
        if raw is None or ref_raw is None:
            return None
        tau0 = floors.get(floor_cell(subdataset, record.freq, metric))
        if tau0 is None:
            return None
        return metrics.scale(raw, ref_raw, tau0)

    ref_mase = reference.mase_raw if reference else None
    ref_crps = reference.crps_raw if reference else None
    return MetricRecord(
        model=record.model, repo=record.repo, kind=record.kind,
        freq=record.freq, cutoff=record.cutoff,
        n_scored_steps=record.n_scored_steps,
        mase_raw=record.mase_raw, crps_raw=record.crps_raw,
        mase_scaled=_scaled(MASE, record.mase_raw, ref_mase),
        crps_scaled=_scaled(CRPS, record.crps_raw, ref_crps),
    )


# -- record files --

def record_to_line(rec: MetricRecord) -> str:
    return json.dumps({
        "model": rec.model,
        "repo": rec.repo,
        "kind": rec.kind,
        "freq": str(rec.freq),
        "cutoff": format_ts(rec.cutoff),
        "n_scored_steps": rec.n_scored_steps,
        "mase_raw": rec.mase_raw,
        "crps_raw": rec.crps_raw,
        "mase_scaled": rec.mase_scaled,
        "crps_scaled": rec.crps_scaled,
    }, separators=(", ", ": "))


def record_from_line(line: str) -> MetricRecord:
    obj = json.loads(line)
    return MetricRecord(
        model=obj["model"],
        repo=obj["repo"],
        kind=obj["kind"],
        freq=Freq(obj["freq"]),
        cutoff=parse_ts(obj["cutoff"]),
        n_scored_steps=int(obj["n_scored_steps"]),
        mase_raw=obj["mase_raw"],
        crps_raw=obj["crps_raw"],
        mase_scaled=obj["mase_scaled"],
        crps_scaled=obj["crps_scaled"],
    )


def render_records(records: Iterable[MetricRecord]) -> str:
    ordered = sorted(records, key=lambda r: (r.repo, r.kind))
    return "".join(record_to_line(r) + "\n" for r in ordered)


def read_records(path) -> list[MetricRecord]:
    out = []
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            try:
                out.append(record_from_line(line))
            except (json.JSONDecodeError, KeyError, ValueError) as exc:
                raise ValueError(f"{path}:{lineno}: malformed metric record") from exc
    return out
