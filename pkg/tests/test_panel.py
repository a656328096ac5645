from __future__ import annotations

import datetime as dt

import pytest

from ghbench import ingest, panel
from ghbench.timegrid import Freq, HOUR, UTC, hour_range, parse_ts

D = lambda s: parse_ts(s)


def build_presence(start: str, n_hours: int, missing: set[int] = frozenset(),
                   malformed: set[int] = frozenset()) -> dict:
    first = D(start)
    out = {}
    for i in range(n_hours):
        status = ingest.PRESENT
        if i in missing:
            status = ingest.MISSING
        elif i in malformed:
            status = ingest.MALFORMED
        out[first + i * HOUR] = status
    return out


# -- completeness thresholds --

def test_daily_completeness_boundary():
    assert panel.period_completeness(22, 24, Freq.DAILY) is True
    assert panel.period_completeness(21, 24, Freq.DAILY) is False


def test_weekly_completeness_boundary():
    assert panel.period_completeness(160, 168, Freq.WEEKLY) is True
    assert panel.period_completeness(159, 168, Freq.WEEKLY) is False


def test_monthly_completeness_boundary():
    # 30-day month: 712.8 hours is the 99% line
    assert panel.period_completeness(713, 720, Freq.MONTHLY) is True
    assert panel.period_completeness(712, 720, Freq.MONTHLY) is False
    # 31-day month
    assert panel.period_completeness(737, 744, Freq.MONTHLY) is True
    assert panel.period_completeness(736, 744, Freq.MONTHLY) is False


def test_hourly_completeness_is_presence():
    assert panel.period_completeness(1, 1, Freq.HOURLY) is True
    assert panel.period_completeness(0, 1, Freq.HOURLY) is False


# -- rollup --

def make_counts(repo: str, kind: str, start: str, per_hour: list[int]):
    first = D(start)
    return [ingest.HourlyCount(repo, kind, first + i * HOUR, n)
            for i, n in enumerate(per_hour) if n]


def test_rollup_daily_sums_and_gap_distinction():
    presence = build_presence("2026-01-05T00:00:00Z", 48, missing={30, 31, 32, 33})
    counts = make_counts("a/one", "pushes", "2026-01-05T00:00:00Z", [1] * 48)
    out = panel.rollup(counts, presence, Freq.DAILY,
                       pairs=[("a/one", "pushes"), ("b/two", "pushes")])
    series = out[panel.SeriesKey("a/one", "pushes", Freq.DAILY)]
    assert [p.value for p in series.points] == [24, 20]
    assert [p.complete for p in series.points] == [True, False]  # 20/24 < 0.90
    # a pair with no events still gets a series of zeros, marked by presence
    quiet = out[panel.SeriesKey("b/two", "pushes", Freq.DAILY)]
    assert [p.value for p in quiet.points] == [0, 0]
    assert [p.complete for p in quiet.points] == [True, False]


def test_rollup_malformed_hours_are_gaps():
    presence = build_presence("2026-01-05T00:00:00Z", 24, malformed={5})
    counts = make_counts("a/one", "stars", "2026-01-05T00:00:00Z", [2] * 24)
    out = panel.rollup(counts, presence, Freq.DAILY, pairs=[("a/one", "stars")])
    point = out[panel.SeriesKey("a/one", "stars", Freq.DAILY)].points[0]
    # the malformed hour's rows are not summed even if counts exist for it
    assert point.value == 46
    assert point.complete is True  # 23/24 >= 0.90


def test_rollup_trims_ragged_edges():
    presence = build_presence("2026-01-05T00:00:00Z", 25)  # one hour past a day
    counts = make_counts("a/one", "pushes", "2026-01-05T00:00:00Z", [1] * 25)
    out = panel.rollup(counts, presence, Freq.DAILY, pairs=[("a/one", "pushes")])
    points = out[panel.SeriesKey("a/one", "pushes", Freq.DAILY)].points
    assert len(points) == 1  # the 25th hour's day is not fully covered


def test_rollup_additivity_hourly_to_daily():
    presence = build_presence("2026-01-05T00:00:00Z", 24)
    values = [i % 5 for i in range(24)]
    counts = make_counts("a/one", "prs_opened", "2026-01-05T00:00:00Z", values)
    hourly = panel.rollup(counts, presence, Freq.HOURLY, pairs=[("a/one", "prs_opened")])
    daily = panel.rollup(counts, presence, Freq.DAILY, pairs=[("a/one", "prs_opened")])
    hsum = sum(p.value for p in hourly[panel.SeriesKey("a/one", "prs_opened", Freq.HOURLY)].points)
    dval = daily[panel.SeriesKey("a/one", "prs_opened", Freq.DAILY)].points[0].value
    assert hsum == dval == sum(values)


def test_rollup_weekly_monday_aligned():
    # 2026-01-01 is a Thursday; first full ISO week starts Monday the 5th
    presence = build_presence("2026-01-01T00:00:00Z", 24 * 18)
    counts = make_counts("a/one", "pushes", "2026-01-01T00:00:00Z", [1] * (24 * 18))
    out = panel.rollup(counts, presence, Freq.WEEKLY, pairs=[("a/one", "pushes")])
    points = out[panel.SeriesKey("a/one", "pushes", Freq.WEEKLY)].points
    assert [p.start for p in points] == [D("2026-01-05T00:00:00Z"), D("2026-01-12T00:00:00Z")]
    assert all(p.value == 168 for p in points)


def test_rollup_idempotent():
    presence = build_presence("2026-01-05T00:00:00Z", 48)
    counts = make_counts("a/one", "stars", "2026-01-05T00:00:00Z", [3] * 48)
    first = panel.rollup(counts, presence, Freq.DAILY, pairs=[("a/one", "stars")])
    second = panel.rollup(counts, presence, Freq.DAILY, pairs=[("a/one", "stars")])
    assert first == second


# -- stratification --

def test_stratify_six_pairs():
    totals = {("r1", "k"): 60, ("r2", "k"): 50, ("r3", "k"): 40,
              ("r4", "k"): 30, ("r5", "k"): 20, ("r6", "k"): 10}
    strata = panel.stratify(totals)
    assert strata == {("r1", "k"): "high", ("r2", "k"): "high",
                      ("r3", "k"): "mid", ("r4", "k"): "mid",
                      ("r5", "k"): "low", ("r6", "k"): "low"}


def test_stratify_two_pairs():
    strata = panel.stratify({("big", "k"): 9, ("small", "k"): 1})
    assert strata == {("big", "k"): "high", ("small", "k"): "low"}


def test_stratify_ties_order_by_name():
    totals = {("b", "k"): 5, ("a", "k"): 5, ("c", "k"): 5}
    strata = panel.stratify(totals)
    assert strata == {("a", "k"): "high", ("b", "k"): "mid", ("c", "k"): "low"}


def test_stratify_partitions_every_size():
    for n in range(1, 40):
        totals = {(f"r{i:02d}", "k"): 1000 - i for i in range(n)}
        strata = panel.stratify(totals)
        assert len(strata) == n
        # descending activity maps to the label order high, mid, low
        by_label = {}
        for pair, label in strata.items():
            by_label.setdefault(label, []).append(totals[pair])
        lows = by_label.get("low", [])
        highs = by_label.get("high", [])
        if highs and lows:
            assert min(highs) > max(lows)


# -- store --

def build_store(tmp_path) -> panel.PanelStore:
    # three holes in day 9 (Jan 14) push it to 21/24, under the 0.90 line
    presence = build_presence("2026-01-05T00:00:00Z", 24 * 14,
                              missing={24 * 9 + 3, 24 * 9 + 4, 24 * 9 + 5})
    counts = (make_counts("a/one", "pushes", "2026-01-05T00:00:00Z",
                          [1] * (24 * 14))
              + make_counts("b/two", "pushes", "2026-01-05T00:00:00Z",
                            [2] * (24 * 14)))
    pairs = [("a/one", "pushes"), ("b/two", "pushes")]
    partitions = {}
    for freq in (Freq.HOURLY, Freq.DAILY, Freq.WEEKLY):
        partitions[("pushes", freq)] = panel.rollup(counts, presence, freq, pairs)
    store = panel.PanelStore(tmp_path)
    store.write(partitions, panel.stratify({p: 1 for p in pairs}), "fingerprint")
    return store


def test_store_round_trip(tmp_path):
    store = build_store(tmp_path)
    series = store.read_series(panel.SeriesKey("a/one", "pushes", Freq.DAILY))
    assert len(series.points) == 14
    assert series.points[0].start == D("2026-01-05T00:00:00Z")
    fresh = panel.PanelStore(tmp_path)
    assert fresh.read_series(series.key) == series


def test_store_unknown_key(tmp_path):
    store = build_store(tmp_path)
    with pytest.raises(KeyError):
        store.read_series(panel.SeriesKey("nope/nope", "pushes", Freq.DAILY))
    with pytest.raises(KeyError):
        store.read_series(panel.SeriesKey("a/one", "stars", Freq.DAILY))


def test_store_read_window_truncates(tmp_path):
    store = build_store(tmp_path)
    key = panel.SeriesKey("a/one", "pushes", Freq.DAILY)
    window = store.read_window(key, D("2026-01-12T00:00:00Z"), 3)
    assert [p for p, _ in window] == [D(f"2026-01-{d:02d}T00:00:00Z") for d in (9, 10, 11)]


def test_store_read_window_drops_incomplete_before_truncation(tmp_path):
    store = build_store(tmp_path)
    key = panel.SeriesKey("a/one", "pushes", Freq.DAILY)
    window = store.read_window(key, D("2026-01-19T00:00:00Z"), 400)
    starts = [p for p, _ in window]
    assert D("2026-01-14T00:00:00Z") not in starts
    assert len(starts) == 13


def test_store_read_window_strictly_elapsed(tmp_path):
    store = build_store(tmp_path)
    key = panel.SeriesKey("a/one", "pushes", Freq.WEEKLY)
    # Sunday end: the week that started the prior Monday has not elapsed
    window = store.read_window(key, D("2026-01-11T00:00:00Z"), 10)
    assert window == []
    window = store.read_window(key, D("2026-01-12T00:00:00Z"), 10)
    assert [p for p, _ in window] == [D("2026-01-05T00:00:00Z")]


def test_store_data_end_and_strata(tmp_path):
    store = build_store(tmp_path)
    assert store.data_end(Freq.DAILY) == D("2026-01-19T00:00:00Z")
    assert store.data_end(Freq.WEEKLY) == D("2026-01-19T00:00:00Z")
    assert store.data_end(Freq.MONTHLY) is None
    assert store.strata()[("a/one", "pushes")] in ("high", "mid", "low")


def test_partition_bytes_deterministic(tmp_path):
    a = build_store(tmp_path / "a")
    b = build_store(tmp_path / "b")
    for name in ("pushes__daily.csv", "strata.csv", "manifest.json"):
        assert (a.root / name).read_bytes() == (b.root / name).read_bytes()
