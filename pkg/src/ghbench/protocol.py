"""Rolling-origin forecast protocol: cutoff schedules, jobs, and validation.

A cutoff is a timestamp at which a forecast is made. The context is the most
recent run of complete periods that have fully elapsed by the cutoff; the
target is the next ``horizon`` periods starting at or after it. Cutoffs are
spaced exactly one horizon apart and the newest qualifying cutoff is dropped,
so ground truth for everything emitted is already settled.

Jobs and forecasts travel as NDJSON, one object per line, numbers as plain
decimal text (ints for counts, shortest round-trip form for floats):

* job line: ``{"job_id", "repo", "kind", "freq", "cutoff", "horizon",
  "quantile_levels", "context"}`` with cutoff in RFC 3339 UTC.
* forecast line: ``{"job_id", "model", "values"}`` where values is a
  horizon x 9 row-major matrix, one row per step, columns in level order.
"""

from __future__ import annotations

import datetime as dt
import hashlib
import json
import logging
import math
from dataclasses import dataclass, field

from .timegrid import Freq, add_periods, floor_period, format_ts, parse_ts, period_end

log = logging.getLogger(__name__)

#: The nine quantile levels every job requests and every forecast must carry.
QUANTILE_LEVELS: tuple[float, ...] = tuple(round(0.1 * k, 1) for k in range(1, 10))

#: Column index of the median, used as the point forecast.
MEDIAN_COLUMN = QUANTILE_LEVELS.index(0.5)


@dataclass(frozen=True)
class CutoffSpec:
    """Per-frequency protocol parameters. Step equals ``horizon`` periods."""

    freq: Freq
    horizon: int
    max_context: int
    first_cutoff: dt.datetime

    def __post_init__(self) -> None:
        if self.horizon < 1 or self.max_context < 1:
            raise ValueError("horizon and max_context must be positive")


def default_specs() -> dict[Freq, CutoffSpec]:
    return {
        Freq.HOURLY: CutoffSpec(Freq.HOURLY, 24, 1024, parse_ts("2026-02-08T00:00:00Z")),
        Freq.DAILY: CutoffSpec(Freq.DAILY, 7, 512, parse_ts("2026-01-04T00:00:00Z")),
        Freq.WEEKLY: CutoffSpec(Freq.WEEKLY, 1, 114, parse_ts("2026-01-04T00:00:00Z")),
        Freq.MONTHLY: CutoffSpec(Freq.MONTHLY, 1, 24, parse_ts("2025-10-01T00:00:00Z")),
    }


@dataclass(frozen=True)
class ForecastJob:
    job_id: str
    repo: str
    kind: str
    freq: Freq
    cutoff: dt.datetime
    horizon: int
    quantile_levels: tuple[float, ...]
    context: tuple[float, ...]
    #: period starts backing ``context``; kept for leak audits, not serialized
    context_periods: tuple[dt.datetime, ...] = field(default=(), compare=False)


@dataclass(frozen=True)
class QuantileForecast:
    job_id: str
    model: str
    values: tuple[tuple[float, ...], ...]  # horizon rows x 9 level columns


def job_id(repo: str, kind: str, freq: Freq, cutoff: dt.datetime) -> str:
    """64-bit-wide stable id: sha256 over 'repo\\nkind\\nfreq\\ncutoff'."""
    canon = "\n".join([repo, kind, str(freq), format_ts(cutoff)])
    return hashlib.sha256(canon.encode("utf-8")).hexdigest()[:16]


def horizon_starts(cutoff: dt.datetime, freq: Freq, horizon: int) -> list[dt.datetime]:
    """The ``horizon`` period starts forecast from ``cutoff``.

    The first target period is the earliest aligned period starting at or
    after the cutoff; an unaligned cutoff therefore skips the period it falls
    inside, which can be neither context nor target.
    """
    first = floor_period(cutoff, freq)
    if first < cutoff:
        first = add_periods(first, freq, 1)
    return [add_periods(first, freq, i) for i in range(horizon)]


def generate_cutoffs(spec: CutoffSpec, data_end: dt.datetime) -> list[dt.datetime]:
    """Cutoffs from first_cutoff, one horizon apart, newest one removed.

    A cutoff qualifies when its entire target window ends by ``data_end``
    (the exclusive end of ingested data), so only fully settled windows are
    ever scored. Returns [] when fewer than two cutoffs qualify.
    """
    out: list[dt.datetime] = []
    cutoff = spec.first_cutoff
    while True:
        last_start = horizon_starts(cutoff, spec.freq, spec.horizon)[-1]
        if period_end(last_start, spec.freq) > data_end:
            break
        out.append(cutoff)
        cutoff = add_periods(cutoff, spec.freq, spec.horizon)
    return out[:-1]


def build_job(key, cutoff: dt.datetime, spec: CutoffSpec, panel) -> ForecastJob | None:
    """Assemble the job for one series at one cutoff.

    ``panel`` supplies read_window(key, end, max_len); a series with no
    usable history at the cutoff yields None and is skipped (logged), never
    an empty-context job.
    """
    window = panel.read_window(key, cutoff, spec.max_context)
    if not window:
        log.info("skipping %s/%s %s @ %s: no usable context",
                 key.repo, key.kind, spec.freq, format_ts(cutoff))
        return None
    periods = tuple(p for p, _ in window)
    values = tuple(float(v) for _, v in window)
    if period_end(periods[-1], spec.freq) > cutoff:
        raise AssertionError("context window leaks past the cutoff")
    return ForecastJob(
        job_id=job_id(key.repo, key.kind, spec.freq, cutoff),
        repo=key.repo,
        kind=key.kind,
        freq=spec.freq,
        cutoff=cutoff,
        horizon=spec.horizon,
        quantile_levels=QUANTILE_LEVELS,
        context=values,
        context_periods=periods,
    )


def validate_forecast(forecast: QuantileForecast, job: ForecastJob) -> list[str]:
    """Check a forecast against its job; returns violations (empty = valid).

    Violations: job_id mismatch, wrong shape, non-finite entries, and
    quantile crossing within any step. Invalid forecasts are rejected as-is;
    repair is the submitter's problem.
    """
    violations: list[str] = []
    if forecast.job_id != job.job_id:
        violations.append(f"job_id mismatch: {forecast.job_id} != {job.job_id}")
        return violations
    rows = forecast.values
    n_levels = len(job.quantile_levels)
    if len(rows) != job.horizon or any(len(r) != n_levels for r in rows):
        got = f"{len(rows)}x{len(rows[0]) if rows else 0}"
        violations.append(f"shape {got} != {job.horizon}x{n_levels}")
        return violations
    for i, row in enumerate(rows):
        for j, v in enumerate(row):
            if not math.isfinite(v):
                violations.append(f"non-finite value at step {i + 1} level {job.quantile_levels[j]}")
        for j in range(n_levels - 1):
            if row[j] > row[j + 1]:
                violations.append(
                    f"quantile crossing at step {i + 1}: "
                    f"q{job.quantile_levels[j]}={row[j]!r} > q{job.quantile_levels[j + 1]}={row[j + 1]!r}")
    return violations


# -- NDJSON round trips --

def job_to_line(job: ForecastJob) -> str:
    payload = {
        "job_id": job.job_id,
        "repo": job.repo,
        "kind": job.kind,
        "freq": str(job.freq),
        "cutoff": format_ts(job.cutoff),
        "horizon": job.horizon,
        "quantile_levels": list(job.quantile_levels),
        "context": [int(v) if float(v).is_integer() else float(v) for v in job.context],
    }
    return json.dumps(payload, separators=(", ", ": "))


def job_from_line(line: str) -> ForecastJob:
    obj = json.loads(line)
    return ForecastJob(
        job_id=obj["job_id"],
        repo=obj["repo"],
        kind=obj["kind"],
        freq=Freq(obj["freq"]),
        cutoff=parse_ts(obj["cutoff"]),
        horizon=int(obj["horizon"]),
        quantile_levels=tuple(float(q) for q in obj["quantile_levels"]),
        context=tuple(float(v) for v in obj["context"]),
    )


def forecast_to_line(forecast: QuantileForecast) -> str:
    payload = {
        "job_id": forecast.job_id,
        "model": forecast.model,
        "values": [list(row) for row in forecast.values],
    }
    return json.dumps(payload, separators=(", ", ": "))


def forecast_from_line(line: str) -> QuantileForecast:
    obj = json.loads(line)
    return QuantileForecast(
        job_id=obj["job_id"],
        model=obj["model"],
        values=tuple(tuple(float(v) for v in row) for row in obj["values"]),
    )


def read_jobs(path) -> list[ForecastJob]:
    """Load a job file; any malformed line aborts with ValueError."""
    jobs = []
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            try:
                jobs.append(job_from_line(line))
            except (json.JSONDecodeError, KeyError, TypeError, ValueError) as exc:
                raise ValueError(f"{path}:{lineno}: malformed job line: {exc}") from exc
    return jobs


def read_forecasts(path) -> list[QuantileForecast]:
    """Load a forecast file; any malformed line aborts with ValueError."""
    out = []
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            try:
                out.append(forecast_from_line(line))
            except (json.JSONDecodeError, KeyError, TypeError, ValueError) as exc:
                raise ValueError(f"{path}:{lineno}: malformed forecast line: {exc}") from exc
    return out
