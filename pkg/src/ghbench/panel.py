"""Multi-frequency count panel: rollup, completeness, strata, and storage.

The panel is the modeling view of the ingested hours. Each series is the
count of one event kind for one repository at one frequency; every period
carries a completeness flag derived from how many of its constituent hours
were actually present at ingestion time. Downstream code treats incomplete
periods as unusable for both context and ground truth.

On disk the panel is one delimited file per (kind, frequency) partition with
columns (repo, period_start, value, complete), rows sorted by repo then
period, plus a manifest recording row counts, content hashes, and the
exclusive data end per frequency.
"""

from __future__ import annotations

import csv
import datetime as dt
import io
import json
import logging
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, NamedTuple

from . import ingest
from .fsutil import atomic_write_text, sha256_bytes
from .timegrid import (
    Freq,
    FREQ_ORDER,
    HOUR,
    format_ts,
    hours_in_period,
    parse_ts,
    period_end,
    period_range,
)

log = logging.getLogger(__name__)

#: Minimum fraction of present hours for a period to count as complete.
#: Hourly periods are complete exactly when their single hour is present.
COMPLETENESS_THRESHOLDS: dict[Freq, float] = {
    Freq.HOURLY: 1.0,
    Freq.DAILY: 0.90,
    Freq.WEEKLY: 0.95,
    Freq.MONTHLY: 0.99,
}

STRATUM_LABELS: tuple[str, ...] = ("high", "mid", "low")


class SeriesKey(NamedTuple):
    repo: str
    kind: str
    freq: Freq


class Point(NamedTuple):
    start: dt.datetime
    value: int
    complete: bool


@dataclass(frozen=True)
class TimeSeries:
    key: SeriesKey
    points: tuple[Point, ...]  # ascending period starts, no duplicates


class Subdataset(NamedTuple):
    """Leaderboard grouping cell: one event kind within one activity stratum."""

    kind: str
    stratum: str

    def __str__(self) -> str:
        return f"{self.kind}/{self.stratum}"


def period_completeness(present_hours: int, total_hours: int, freq: Freq,
                        thresholds: dict[Freq, float] | None = None) -> bool:
    """Apply the per-frequency present-fraction rule for one period."""
    rule = (thresholds or COMPLETENESS_THRESHOLDS)[freq]
    if freq is Freq.HOURLY:
        return present_hours >= total_hours
    return present_hours / total_hours >= rule


def rollup(counts: Iterable[ingest.HourlyCount],
           presence: dict[dt.datetime, str],
           freq: Freq,
           pairs: Iterable[tuple[str, str]],
           thresholds: dict[Freq, float] | None = None) -> dict[SeriesKey, TimeSeries]:
    """Aggregate hourly counts into one frequency's panel partition.

    Only periods whose hours are fully covered by the presence ledger are
    emitted; ragged edges are trimmed rather than published incomplete. A
    present hour with no rows contributes zero, which is how quiet series
    stay distinguishable from data gaps. Every (repo, kind) pair in ``pairs``
    gets a series, including all-zero ones.
    """
    if not presence:
        return {}
    hours = sorted(presence)
    span_start, span_end = hours[0], hours[-1] + HOUR
    starts = [p for p in period_range(span_start, span_end, freq)
              if period_end(p, freq) <= span_end]

    per_pair: dict[tuple[str, str], dict[dt.datetime, int]] = {}
    for row in counts:
        per_pair.setdefault((row.repo, row.kind), {})[row.hour] = row.count

    # presence per period is pair-independent; compute once
    period_meta: list[tuple[dt.datetime, list[dt.datetime], bool]] = []
    for start in starts:
        total = hours_in_period(start, freq)
        slot = start
        present_slots = []
        for _ in range(total):
            if presence.get(slot) == ingest.PRESENT:
                present_slots.append(slot)
            slot += HOUR
        complete = period_completeness(len(present_slots), total, freq, thresholds)
        period_meta.append((start, present_slots, complete))

    out: dict[SeriesKey, TimeSeries] = {}
    for repo, kind in sorted(pairs):
        key = SeriesKey(repo, kind, freq)
        by_hour = per_pair.get((repo, kind), {})
        points = tuple(
            Point(start, sum(by_hour.get(h, 0) for h in present_slots), complete)
            for start, present_slots, complete in period_meta)
        out[key] = TimeSeries(key, points)
    return out


def stratify(totals: dict[tuple[str, str], int],
             n_strata: int = 3) -> dict[tuple[str, str], str]:
    """Split (repo, kind) pairs into activity strata by total volume.

    Pairs are sorted by descending total with name as the tiebreak, then cut
    at boundaries floor(j*n/k + 0.5). With two pairs and three strata that
    puts the larger in "high" and the smaller in "low", leaving "mid" empty.
    The assignment is frozen at panel-build time.
    """
    if n_strata == 3:
        labels = STRATUM_LABELS
    else:
        labels = tuple(f"s{j}" for j in range(1, n_strata + 1))
    ranked = sorted(totals, key=lambda pair: (-totals[pair], pair))
    n = len(ranked)
    bounds = [int(j * n / n_strata + 0.5) for j in range(n_strata + 1)]
    bounds[0], bounds[-1] = 0, n
    out: dict[tuple[str, str], str] = {}
    for j, label in enumerate(labels):
        for pair in ranked[bounds[j]:bounds[j + 1]]:
            out[pair] = label
    return out


# -- On-disk store --

PARTITION_HEADER = ("repo", "period_start", "value", "complete")


def partition_name(kind: str, freq: Freq) -> str:
    return f"{kind}__{freq}.csv"


def render_partition(series: Iterable[TimeSeries]) -> str:
    """Render one (kind, freq) partition to delimited text, stable order."""
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(PARTITION_HEADER)
    for ts in sorted(series, key=lambda s: s.key.repo):
        for point in ts.points:
            writer.writerow([ts.key.repo, format_ts(point.start), point.value,
                             "true" if point.complete else "false"])
    return buf.getvalue()


class PanelStore:
    """Directory-backed panel with the manifest as its table of contents.

    Parameters
    ----------
    root:
        Directory holding the partition files, ``strata.csv`` and
        ``manifest.json``.
    """

    def __init__(self, root: Path):
        self.root = Path(root)
        self._cache: dict[tuple[str, Freq], dict[str, TimeSeries]] = {}

    # - writing -

    def write(self, partitions: dict[tuple[str, Freq], dict[SeriesKey, TimeSeries]],
              strata: dict[tuple[str, str], str],
              source_fingerprint: str) -> dict:
        """Write all partitions, the strata table, and the manifest."""
        files = render_panel_files(partitions, strata, source_fingerprint)
        for name, text in files.items():
            atomic_write_text(self.root / name, text)
        return json.loads(files["manifest.json"])

    # - reading -

    def manifest(self) -> dict:
        return json.loads((self.root / "manifest.json").read_text(encoding="utf-8"))

    def data_end(self, freq: Freq) -> dt.datetime | None:
        raw = self.manifest()["data_end"].get(str(freq))
        return parse_ts(raw) if raw else None

    def strata(self) -> dict[tuple[str, str], str]:
        out = {}
        with open(self.root / "strata.csv", newline="", encoding="utf-8") as fh:
            for row in csv.DictReader(fh):
                out[(row["repo"], row["kind"])] = row["stratum"]
        return out

    def _load_partition(self, kind: str, freq: Freq) -> dict[str, TimeSeries]:
        cache_key = (kind, freq)
        if cache_key not in self._cache:
            path = self.root / partition_name(kind, freq)
            if not path.exists():
                raise KeyError(f"panel has no partition {partition_name(kind, freq)}")
            rows: dict[str, list[Point]] = {}
            with open(path, newline="", encoding="utf-8") as fh:
                for row in csv.DictReader(fh):
                    rows.setdefault(row["repo"], []).append(
                        Point(parse_ts(row["period_start"]), int(row["value"]),
                              row["complete"] == "true"))
            self._cache[cache_key] = {
                repo: TimeSeries(SeriesKey(repo, kind, freq), tuple(points))
                for repo, points in rows.items()}
        return self._cache[cache_key]

    def read_series(self, key: SeriesKey) -> TimeSeries:
        partition = self._load_partition(key.kind, key.freq)
        if key.repo not in partition:
            raise KeyError(f"unknown series {key}")
        return partition[key.repo]

    def read_window(self, key: SeriesKey, end: dt.datetime,
                    max_len: int) -> list[tuple[dt.datetime, int]]:
        """Most recent complete periods that fully elapsed before ``end``.

        Incomplete periods are dropped first, then the tail of length
        ``max_len`` is taken, so gaps shorten the usable history rather than
        shifting the window. "Elapsed" means period end <= end; a period that
        merely starts before ``end`` still overlaps it and would leak.
        """
        series = self.read_series(key)
        usable = [(p.start, p.value) for p in series.points
                  if p.complete and period_end(p.start, key.freq) <= end]
        return usable[-max_len:] if max_len else usable


def render_strata(strata: dict[tuple[str, str], str]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(("repo", "kind", "stratum"))
    for (repo, kind), label in sorted(strata.items()):
        writer.writerow((repo, kind, label))
    return buf.getvalue()


def render_panel_files(partitions: dict[tuple[str, Freq], dict[SeriesKey, TimeSeries]],
                       strata: dict[tuple[str, str], str],
                       source_fingerprint: str) -> dict[str, str]:
    """Render the whole panel as {relative name: file text}, manifest included.

    Pure content generation with no filesystem side effects, so callers can
    hash or stage the files however they like. The manifest's data_end per
    frequency is the exclusive end of the newest period in that frequency's
    partitions, which is what cutoff scheduling keys on.
    """
    files: dict[str, str] = {}
    entries: dict[str, dict] = {}
    newest: dict[Freq, dt.datetime] = {}
    for (kind, freq), series_map in sorted(partitions.items(),
                                           key=lambda kv: (kv[0][0], str(kv[0][1]))):
        name = partition_name(kind, freq)
        text = render_partition(series_map.values())
        files[name] = text
        entries[name] = {
            "kind": kind,
            "freq": str(freq),
            "rows": text.count("\n") - 1,
            "sha256": sha256_bytes(text.encode("utf-8")),
        }
        for ts in series_map.values():
            if ts.points:
                last = period_end(ts.points[-1].start, freq)
                if freq not in newest or last > newest[freq]:
                    newest[freq] = last
    strata_text = render_strata(strata)
    files["strata.csv"] = strata_text
    manifest = {
        "partitions": entries,
        "strata_sha256": sha256_bytes(strata_text.encode("utf-8")),
        "data_end": {str(freq): format_ts(newest[freq]) if freq in newest else None
                     for freq in FREQ_ORDER},
        "source_fingerprint": source_fingerprint,
    }
    files["manifest.json"] = json.dumps(manifest, indent=2, sort_keys=True) + "\n"
    return files
