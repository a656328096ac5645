"""Built-in reference forecasters.

Three deliberately simple models anchor the leaderboard: the zero forecast
(whose scores also define the scaling floors), the historic average (context
quantiles, flat over the horizon), and the seasonal naive (last seasonal
cycle replayed). Every output satisfies the forecast validator by
construction; there is no repair step to hide behind.
"""

from __future__ import annotations

import numpy as np

from .metrics import DEFAULT_SEASONAL_PERIODS
from .protocol import ForecastJob, QuantileForecast
from .timegrid import Freq

ZERO_MODEL = "ZeroModel"
HISTORIC_AVERAGE = "HistoricAverage"
SEASONAL_NAIVE = "SeasonalNaive"

#: Roster order is presentation order, nothing more.
BUILTIN_MODELS: tuple[str, ...] = (ZERO_MODEL, HISTORIC_AVERAGE, SEASONAL_NAIVE)


def _flat(job: ForecastJob, model: str, row: list[float]) -> QuantileForecast:
    rows = tuple(tuple(float(v) for v in row) for _ in range(job.horizon))
    return QuantileForecast(job.job_id, model, rows)


def zero_forecast(job: ForecastJob) -> QuantileForecast:
    """All zeros at every step and level."""
    return _flat(job, ZERO_MODEL, [0.0] * len(job.quantile_levels))


def historic_average(job: ForecastJob) -> QuantileForecast:
    """Empirical context quantiles at the requested levels, same every step.

    Quantiles interpolate linearly between order statistics (position
    1 + (n-1)*tau), so they are nondecreasing in tau by construction.
    """
    ctx = np.asarray(job.context, dtype=float)
    row = np.quantile(ctx, np.asarray(job.quantile_levels)).tolist()
    return _flat(job, HISTORIC_AVERAGE, row)


def seasonal_naive(job: ForecastJob, m: int | None = None) -> QuantileForecast:
    """Replay the last seasonal cycle; fall back to the last value when the
    context is shorter than one cycle. The path fills all nine columns: the
    model is deterministic, so its quantiles collapse onto the point path.
    """
    if m is None:
        m = DEFAULT_SEASONAL_PERIODS[Freq(job.freq)]
    ctx = job.context
    n = len(ctx)
    if n >= m:
        path = [ctx[n - m + ((i - 1) % m)] for i in range(1, job.horizon + 1)]
    else:
        path = [ctx[-1]] * job.horizon
    values = tuple(tuple(float(v) for _ in job.quantile_levels) for v in path)
    return QuantileForecast(job.job_id, SEASONAL_NAIVE, values)


def run_baseline(name: str, job: ForecastJob,
                 seasonal_periods: dict[Freq, int] | None = None) -> QuantileForecast:
    if name == ZERO_MODEL:
        return zero_forecast(job)
    if name == HISTORIC_AVERAGE:
        return historic_average(job)
    if name == SEASONAL_NAIVE:
        table = seasonal_periods or DEFAULT_SEASONAL_PERIODS
        return seasonal_naive(job, table[Freq(job.freq)])
    raise ValueError(f"unknown baseline {name!r}")
