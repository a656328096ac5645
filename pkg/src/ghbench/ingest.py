"""Hourly event-archive ingestion.

Each archive hour is a gzipped NDJSON stream of public GitHub events. We keep
four event kinds, attribute them to repositories in the tracked universe, and
record an hour-level presence status so downstream completeness rules can
tell "no data arrived" from "nothing happened": a present hour with no
matching events legitimately contributes zeros, a missing or malformed hour
is a gap.

Renamed repositories are tracked under the new name as a new series; no
identity stitching is attempted. Bot actors are kept by default (automation
is activity), with an opt-in exclusion hook.
"""

from __future__ import annotations

import csv
import datetime as dt
import gzip
import io
import json
import logging
import urllib.error
import urllib.request
import zlib
from collections import Counter
from dataclasses import dataclass
from pathlib import Path
from typing import NamedTuple

from .timegrid import UTC, format_ts, parse_ts

log = logging.getLogger(__name__)

#: Event kinds, in canonical order.
KINDS: tuple[str, ...] = ("issues_opened", "prs_opened", "pushes", "stars")

PRESENT = "present"
MISSING = "missing"
MALFORMED = "malformed"

#: (event type, required action) -> kind; action None means "any".
EVENT_RULES: dict[str, tuple[str | None, str]] = {
    "IssuesEvent": ("opened", "issues_opened"),
    "PullRequestEvent": ("opened", "prs_opened"),
    "PushEvent": (None, "pushes"),
    "WatchEvent": ("started", "stars"),
}


class HourlyCount(NamedTuple):
    repo: str
    kind: str
    hour: dt.datetime
    count: int


class HourPresence(NamedTuple):
    hour: dt.datetime
    status: str


@dataclass(frozen=True)
class HourParse:
    """Result of parsing one archive hour."""

    counts: tuple[HourlyCount, ...]
    presence: HourPresence
    skipped_records: int


@dataclass(frozen=True)
class RepoUniverse:
    """Frozen set of tracked repositories and how it was chosen."""

    repos: tuple[str, ...]
    selected_at: str
    criterion: str

    def __post_init__(self) -> None:
        object.__setattr__(self, "_members", frozenset(self.repos))

    def __contains__(self, repo: str) -> bool:
        return repo in self._members


def archive_basename(hour: dt.datetime) -> str:
    """GH Archive naming: date plus unpadded hour, e.g. 2026-01-04-7.json.gz."""
    return f"{hour:%Y-%m-%d}-{hour.hour}.json.gz"


def classify_event(record: dict) -> str | None:
    """Map a raw event to a kind, or None when it does not match the filter.

    The filter is total: anything unmatched maps to None, so new upstream
    event types can never fail ingestion.
    """
    rule = EVENT_RULES.get(record.get("type"))
    if rule is None:
        return None
    required_action, kind = rule
    if required_action is None:
        return kind
    payload = record.get("payload")
    action = payload.get("action") if isinstance(payload, dict) else None
    if action is None:
        action = record.get("action")
    return kind if action == required_action else None


def _event_repo(record: dict) -> str | None:
    repo = record.get("repo")
    if isinstance(repo, dict):
        name = repo.get("name")
        return name if isinstance(name, str) else None
    if isinstance(repo, str):
        return repo
    return None


def _is_bot(record: dict) -> bool:
    actor = record.get("actor")
    login = actor.get("login") if isinstance(actor, dict) else actor
    return isinstance(login, str) and login.endswith("[bot]")


def parse_archive_hour(raw: bytes | None, hour: dt.datetime, universe: RepoUniverse,
                       exclude_bots: bool = False) -> HourParse:
    """Count matching events per (repo, kind) for one archive hour.

    ``raw`` is the gzipped archive body, or None when the hour's file is
    absent (presence "missing"). Single undecodable lines are skipped and
    tallied; a stream-level decode failure marks the hour "malformed" and
    discards its counts entirely, so a malformed hour never contributes
    partial data.
    """
    if raw is None:
        return HourParse((), HourPresence(hour, MISSING), 0)
    counter: Counter[tuple[str, str]] = Counter()
    skipped = 0
    try:
        with gzip.open(io.BytesIO(raw), "rt", encoding="utf-8", errors="replace") as fh:
            for line in fh:
                if not line.strip():
                    continue
                try:
                    record = json.loads(line)
                except ValueError:
                    skipped += 1
                    continue
                if not isinstance(record, dict):
                    skipped += 1
                    continue
                kind = classify_event(record)
                if kind is None:
                    continue
                repo = _event_repo(record)
                if repo is None:
                    skipped += 1
                    continue
                if exclude_bots and _is_bot(record):
                    continue
                if repo not in universe:
                    continue
                counter[(repo, kind)] += 1
    except (OSError, EOFError, zlib.error) as exc:
        log.warning("hour %s: stream decode failed (%s); marking malformed",
                    format_ts(hour), exc)
        return HourParse((), HourPresence(hour, MALFORMED), 0)
    counts = tuple(HourlyCount(repo, kind, hour, n)
                   for (repo, kind), n in sorted(counter.items()))
    return HourParse(counts, HourPresence(hour, PRESENT), skipped)


def fetch_hour(source: str, hour: dt.datetime) -> bytes | None:
    """Raw gzip bytes for an hour from a local mirror dir or an http base URL.

    Returns None when the hour's file does not exist at the source.
    """
    name = archive_basename(hour)
    if source.startswith("http://") or source.startswith("https://"):
        url = source.rstrip("/") + "/" + name
        try:
            with urllib.request.urlopen(url) as resp:
                return resp.read()
        except urllib.error.HTTPError as exc:
            if exc.code == 404:
                return None
            raise
    path = Path(source) / name
    try:
        return path.read_bytes()
    except FileNotFoundError:
        return None


def load_universe(path: Path, n: int, selected_at: dt.datetime) -> RepoUniverse:
    """Top-n repositories by star count from a 'repo,stars' delimited file.

    Ties break lexicographically by name. Fewer than n rows is a hard error:
    a short universe would silently shrink every downstream key space.
    """
    rows: list[tuple[str, int]] = []
    with open(path, "r", encoding="utf-8") as fh:
        header = fh.readline()
        if header.strip().lower().replace(" ", "") not in ("repo,stars", "name,stars"):
            raise ValueError(f"{path}: expected a 'repo,stars' header, got {header.strip()!r}")
        for lineno, line in enumerate(fh, start=2):
            line = line.strip()
            if not line:
                continue
            try:
                repo, stars = line.rsplit(",", 1)
                rows.append((repo.strip(), int(stars)))
            except ValueError as exc:
                raise ValueError(f"{path}:{lineno}: bad universe row {line!r}") from exc
    if len(rows) < n:
        raise ValueError(f"universe deficit: need {n}, have {len(rows)}")
    rows.sort(key=lambda r: (-r[1], r[0]))
    return RepoUniverse(
        repos=tuple(name for name, _ in rows[:n]),
        selected_at=format_ts(selected_at.astimezone(UTC)),
        criterion=f"top {n} by stars",
    )


# -- on-disk shapes for one ingested hour --

COUNTS_HEADER = ("repo", "kind", "hour", "count")


def render_counts(counts: tuple[HourlyCount, ...]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(COUNTS_HEADER)
    for row in counts:
        writer.writerow([row.repo, row.kind, format_ts(row.hour), row.count])
    return buf.getvalue()


def read_counts(text: str) -> list[HourlyCount]:
    out = []
    for row in csv.DictReader(io.StringIO(text)):
        out.append(HourlyCount(row["repo"], row["kind"], parse_ts(row["hour"]),
                               int(row["count"])))
    return out


def render_presence(presence: HourPresence, skipped_records: int) -> str:
    return json.dumps({
        "hour": format_ts(presence.hour),
        "status": presence.status,
        "skipped_records": skipped_records,
    }, sort_keys=True) + "\n"


def read_presence(text: str) -> tuple[HourPresence, int]:
    obj = json.loads(text)
    return HourPresence(parse_ts(obj["hour"]), obj["status"]), obj["skipped_records"]


def render_universe(universe: RepoUniverse) -> str:
    return json.dumps({
        "criterion": universe.criterion,
        "selected_at": universe.selected_at,
        "repos": list(universe.repos),
    }, indent=2, sort_keys=True) + "\n"


def read_universe_file(text: str) -> RepoUniverse:
    obj = json.loads(text)
    return RepoUniverse(repos=tuple(obj["repos"]), selected_at=obj["selected_at"],
                        criterion=obj["criterion"])
