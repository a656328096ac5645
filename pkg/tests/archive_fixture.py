"""Deterministic synthetic event-archive trees for pipeline tests.

Generates a local mirror of gzipped hourly NDJSON files with controllable
anomalies (missing hours, a malformed stream, unparseable lines, bot actors,
out-of-universe repositories) plus a matching universe CSV and a run config.
Same seed, same bytes: gzip mtime is pinned to zero.
"""

from __future__ import annotations

import datetime as dt
import gzip
import json
from pathlib import Path

import numpy as np
import yaml

from ghbench.ingest import archive_basename
from ghbench.timegrid import HOUR, UTC

KINDS_EVENTS = {
    "issues_opened": ("IssuesEvent", "opened"),
    "prs_opened": ("PullRequestEvent", "opened"),
    "pushes": ("PushEvent", None),
    "stars": ("WatchEvent", "started"),
}

# hour-of-day activity shape, peaking mid-UTC-day
_HOD = np.concatenate([np.linspace(0.3, 1.5, 12), np.linspace(1.5, 0.3, 12)])
# weekday multiplier: quieter weekends
_DOW = np.array([1.2, 1.2, 1.1, 1.1, 1.0, 0.45, 0.4])


def _profiles(n_repos: int, rng: np.random.Generator) -> list[dict]:
    profiles = []
    for i in range(n_repos):
        tier = "high" if i < n_repos // 4 else ("mid" if i < 3 * n_repos // 4 else "low")
        scale = {"high": 2.5, "mid": 0.35, "low": 0.04}[tier]
        base = {
            "pushes": scale * rng.uniform(0.8, 1.6),
            "stars": scale * rng.uniform(0.4, 1.0),
            "issues_opened": scale * rng.uniform(0.15, 0.5),
            "prs_opened": scale * rng.uniform(0.1, 0.4),
        }
        profiles.append({"tier": tier, "base": base,
                         "seasonal": bool(rng.uniform() < 0.7)})
    return profiles


def _event(repo: str, kind: str, when: dt.datetime, actor: str = "alice") -> str:
    type_, action = KINDS_EVENTS[kind]
    record = {
        "id": "0",
        "type": type_,
        "actor": {"login": actor},
        "repo": {"name": repo},
        "payload": {} if action is None else {"action": action},
        "created_at": when.strftime("%Y-%m-%dT%H:%M:%SZ"),
    }
    return json.dumps(record, separators=(",", ":"))


def _decoy(repo: str, when: dt.datetime) -> str:
    return json.dumps({
        "id": "0",
        "type": "IssuesEvent",
        "actor": {"login": "bob"},
        "repo": {"name": repo},
        "payload": {"action": "closed"},
        "created_at": when.strftime("%Y-%m-%dT%H:%M:%SZ"),
    }, separators=(",",":"))


def build_archive(archive_dir: Path, *, start: dt.datetime, hours: int,
                  repos: list[str], seed: int = 20260101,
                  missing_hours: set[dt.datetime] = frozenset(),
                  malformed_hours: set[dt.datetime] = frozenset(),
                  outsider: str = "stranger/keep-out") -> None:
    """Write one gz file per hour, honoring the requested anomalies."""
    archive_dir.mkdir(parents=True, exist_ok=True)
    rng = np.random.default_rng(seed)
    profiles = dict(zip(repos, _profiles(len(repos), rng)))
    hour = start
    for index in range(hours):
        if hour in missing_hours:
            hour += HOUR
            continue
        path = archive_dir / archive_basename(hour)
        if hour in malformed_hours:
            path.write_bytes(b"\x1f\x8b\x08\x00ghbench-truncated")
            hour += HOUR
            continue
        lines: list[str] = []
        for repo in repos:
            prof = profiles[repo]
            for kind, base in prof["base"].items():
                lam = base
                if prof["seasonal"]:
                    lam *= _HOD[hour.hour] * _DOW[hour.weekday()]
                for _ in range(int(rng.poisson(lam))):
                    actor = "ci[bot]" if rng.uniform() < 0.05 else "alice"
                    lines.append(_event(repo, kind, hour, actor))
        # noise the parser must ignore: wrong actions, foreign repos, junk
        if rng.uniform() < 0.5:
            lines.append(_decoy(repos[int(rng.integers(len(repos)))], hour))
        if rng.uniform() < 0.3:
            lines.append(_event(outsider, "pushes", hour))
        if index % 97 == 0:
            lines.append("{this line is not json")
        body = ("\n".join(lines) + "\n") if lines else ""
        path.write_bytes(gzip.compress(body.encode("utf-8"), mtime=0))
        hour += HOUR


def write_universe(path: Path, repos: list[str], extras: list[str] = ()) -> None:
    """Universe CSV where listed order encodes descending stars."""
    rows = ["repo,stars"]
    names = list(repos) + list(extras)
    for i, name in enumerate(names):
        rows.append(f"{name},{9000 - 137 * i}")
    path.write_text("\n".join(rows) + "\n", encoding="utf-8")


def write_config(path: Path, *, source: Path, universe_file: Path, size: int,
                 start: dt.datetime, end: dt.datetime, data_root: Path,
                 cutoffs: dict | None = None, models: list[str] | None = None,
                 workers: int = 2, extra: dict | None = None) -> Path:
    body = {
        "source": str(source),
        "start": start.strftime("%Y-%m-%dT%H:%M:%SZ"),
        "end": end.strftime("%Y-%m-%dT%H:%M:%SZ"),
        "universe": {"file": str(universe_file), "size": size},
        "data_root": str(data_root),
        "workers": workers,
    }
    if cutoffs:
        body["cutoffs"] = cutoffs
    if models:
        body["models"] = models
    body.update(extra or {})
    path.write_text(yaml.safe_dump(body, sort_keys=True), encoding="utf-8")
    return path


def tiny_tree(base: Path, **config_overrides) -> Path:
    """Three repos, three days, six-hour hourly horizon: fast full cycles.

    Returns the config path; the archive, universe and data root all live
    under ``base``.
    """
    start = dt.datetime(2026, 1, 1, tzinfo=UTC)
    end = dt.datetime(2026, 1, 4, tzinfo=UTC)
    repos = ["alpha/one", "beta/two", "gamma/three"]
    build_archive(base / "archive", start=start, hours=72, repos=repos, seed=7)
    write_universe(base / "universe.csv", repos, extras=["stranger/keep-out"])
    config = {
        "source": base / "archive",
        "universe_file": base / "universe.csv",
        "size": 3,
        "start": start,
        "end": end,
        "data_root": base / "bench",
        "cutoffs": {
            "hourly": {"horizon": 6, "max_context": 48, "first": "2026-01-02T00:00:00Z"},
            "daily": {"horizon": 1, "max_context": 8, "first": "2026-01-02T00:00:00Z"},
        },
    }
    config.update(config_overrides)
    return write_config(base / "ghbench.yaml", **config)
