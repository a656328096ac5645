"""UTC time grid: the four aggregation frequencies and their period arithmetic.

Periods are half-open intervals [start, end) identified by their start
timestamp. Weekly periods are ISO weeks (Monday 00:00 UTC); monthly periods
are calendar months. All timestamps are timezone-aware UTC datetimes and are
serialized as RFC 3339 with a trailing ``Z``.
"""

from __future__ import annotations

import datetime as dt
from enum import Enum

UTC = dt.timezone.utc

HOUR = dt.timedelta(hours=1)


class Freq(str, Enum):
    HOURLY = "hourly"
    DAILY = "daily"
    WEEKLY = "weekly"
    MONTHLY = "monthly"

    def __str__(self) -> str:  # argparse/log friendliness
        return self.value


#: Canonical iteration order for reductions over frequencies.
FREQ_ORDER = (Freq.HOURLY, Freq.DAILY, Freq.WEEKLY, Freq.MONTHLY)


def parse_ts(text: str) -> dt.datetime:
    """Parse an RFC 3339 timestamp; naive input is taken as UTC."""
    ts = dt.datetime.fromisoformat(text.replace("Z", "+00:00"))
    if ts.tzinfo is None:
        ts = ts.replace(tzinfo=UTC)
    return ts.astimezone(UTC)


def format_ts(ts: dt.datetime) -> str:
    """Render as RFC 3339 UTC with second precision and a Z suffix."""
    return ts.astimezone(UTC).strftime("%Y-%m-%dT%H:%M:%SZ")


def add_months(ts: dt.datetime, n: int) -> dt.datetime:
    month_index = ts.year * 12 + (ts.month - 1) + n
    year, month = divmod(month_index, 12)
    return ts.replace(year=year, month=month + 1)


def floor_period(ts: dt.datetime, freq: Freq) -> dt.datetime:
    """Start of the period containing ts."""
    ts = ts.astimezone(UTC)
    if freq is Freq.HOURLY:
        return ts.replace(minute=0, second=0, microsecond=0)
    day = ts.replace(hour=0, minute=0, second=0, microsecond=0)
    if freq is Freq.DAILY:
        return day
    if freq is Freq.WEEKLY:
        return day - dt.timedelta(days=day.weekday())
    return day.replace(day=1)


def add_periods(start: dt.datetime, freq: Freq, n: int) -> dt.datetime:
    """Advance a period start by n periods (n may be negative)."""
    if freq is Freq.HOURLY:
        return start + dt.timedelta(hours=n)
    if freq is Freq.DAILY:
        return start + dt.timedelta(days=n)
    if freq is Freq.WEEKLY:
        return start + dt.timedelta(weeks=n)
    return add_months(start, n)


def period_end(start: dt.datetime, freq: Freq) -> dt.datetime:
    return add_periods(start, freq, 1)


def period_range(first: dt.datetime, last_exclusive: dt.datetime, freq: Freq) -> list[dt.datetime]:
    """Aligned period starts in [first, last_exclusive)."""
    out = []
    cur = floor_period(first, freq)
    if cur < first:
        cur = add_periods(cur, freq, 1)
    while cur < last_exclusive:
        out.append(cur)
        cur = add_periods(cur, freq, 1)
    return out


def hours_in_period(start: dt.datetime, freq: Freq) -> int:
    """Number of hour slots a period spans (varies only for monthly)."""
    span = period_end(start, freq) - start
    return int(span.total_seconds() // 3600)


def hour_range(first: dt.datetime, last_exclusive: dt.datetime) -> list[dt.datetime]:
    return period_range(first, last_exclusive, Freq.HOURLY)
