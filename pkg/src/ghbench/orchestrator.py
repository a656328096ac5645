"""Stage orchestration: idempotent, resumable builds of the artifact tree.

Every stage is a list of tasks; a task owns one unit of work and the files it
emits. Stage manifests under ``manifests/`` record, per task, two input
hashes (configuration parameters and upstream data) plus the hash of each
output file. On a re-run each task is classified independently:

* not recorded                               -> build
* recorded, parameters changed               -> error demanding ``force``
* recorded, data changed, frozen artifact    -> error demanding ``force``
* recorded, data changed, derived view       -> rebuild silently (refresh)
* recorded, unchanged, outputs intact        -> skip
* recorded, unchanged, outputs missing/bad   -> rebuild (restore)

Frozen artifacts are the per-cutoff benchmark results (jobs, forecasts,
metric records): once recorded they never silently change, because the
protocol's whole value is that a published evaluation stays published.
Derived views (the panel, validation reports, scaling floors, leaderboard,
descriptors) track growing upstream data and refresh without ceremony, while
configuration knob changes stay loud everywhere.

A run where every task skips leaves the stage manifest untouched, so fully
up-to-date trees are never rewritten. Files that stop being tracked (say, a
model leaves the roster) are dropped from the manifest but left on disk;
nothing is ever deleted.
"""

from __future__ import annotations

import datetime as dt
import json
import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable

from . import baselines, descriptors, evaluation, ingest, leaderboard, panel, protocol
from .config import RunConfig
from .fsutil import atomic_write_bytes, hash_inputs, sha256_bytes, sha256_file
from .timegrid import FREQ_ORDER, Freq, format_ts, hour_range

log = logging.getLogger(__name__)

STAGE_ORDER: tuple[str, ...] = (
    "ingest", "rollup", "jobs", "baselines", "collect", "evaluate",
    "leaderboard", "describe",
)

#: Stages that must be complete (manifest present, outputs intact) beforehand.
STAGE_DEPS: dict[str, tuple[str, ...]] = {
    "ingest": (),
    "rollup": ("ingest",),
    "jobs": ("rollup",),
    "baselines": ("jobs",),
    "collect": ("jobs",),
    "evaluate": ("collect", "rollup"),
    "leaderboard": ("evaluate",),
    "describe": ("rollup",),
}


class UpstreamIncompleteError(RuntimeError):
    """A required upstream stage has not completed; maps to exit code 2."""


class StaleArtifactsError(RuntimeError):
    """Recorded artifacts were built from different inputs; maps to exit 1."""

    def __init__(self, stage: str, tasks: list[str]):
        self.stage = stage
        self.tasks = tasks
        listed = ", ".join(tasks[:5]) + (" ..." if len(tasks) > 5 else "")
        super().__init__(
            f"stage {stage}: inputs changed for {len(tasks)} recorded task(s) "
            f"({listed}); pass force to overwrite")


@dataclass(frozen=True)
class Task:
    """One unit of buildable work.

    ``params_hash`` covers configuration; ``data_hash`` covers upstream
    content. ``frozen`` marks artifacts that must never silently change once
    recorded.
    """

    name: str
    params_hash: str
    data_hash: str
    build: Callable[[], dict[str, bytes]]  # relative path -> file content
    frozen: bool = False


@dataclass
class StageResult:
    stage: str
    built: list[str] = field(default_factory=list)
    refreshed: list[str] = field(default_factory=list)
    restored: list[str] = field(default_factory=list)
    skipped: list[str] = field(default_factory=list)

    @property
    def wrote_anything(self) -> bool:
        return bool(self.built or self.refreshed or self.restored)


# -- manifest bookkeeping --

def manifest_path(root: Path, stage: str) -> Path:
    return root / "manifests" / f"{stage}.json"


def load_manifest(root: Path, stage: str) -> dict | None:
    path = manifest_path(root, stage)
    if not path.exists():
        return None
    return json.loads(path.read_text(encoding="utf-8"))


def _outputs_intact(root: Path, record: dict) -> bool:
    return all(sha256_file(root / rel) == sha for rel, sha in record["outputs"].items())


def stage_complete(root: Path, stage: str) -> bool:
    manifest = load_manifest(root, stage)
    if manifest is None:
        return False
    return all(_outputs_intact(root, rec) for rec in manifest["tasks"].values())


def _write_manifest(root: Path, stage: str, records: dict[str, dict]) -> None:
    body = {
        "stage": stage,
        "completed_at": format_ts(dt.datetime.now(dt.timezone.utc)),
        "tasks": dict(sorted(records.items())),
    }
    atomic_write_bytes(manifest_path(root, stage),
                       (json.dumps(body, indent=2, sort_keys=True) + "\n").encode("utf-8"))


def run_tasks(root: Path, stage: str, tasks: list[Task], *, force: bool = False,
              workers: int = 1, keep_unlisted: bool = False) -> StageResult:
    """Classify and execute a stage's tasks under the rules above.

    ``keep_unlisted`` preserves manifest records for tasks absent from this
    call; it exists for stages that run in batches against one manifest.
    """
    previous = load_manifest(root, stage)
    prev_tasks: dict[str, dict] = previous["tasks"] if previous else {}

    result = StageResult(stage)
    plan: list[tuple[Task, str]] = []  # (task, disposition)
    stale: list[str] = []
    for task in tasks:
        record = prev_tasks.get(task.name)
        if record is None:
            plan.append((task, "built"))
        elif record["params_hash"] != task.params_hash or (
                task.frozen and record["data_hash"] != task.data_hash):
            if force:
                plan.append((task, "built"))
            else:
                stale.append(task.name)
        elif record["data_hash"] != task.data_hash:
            plan.append((task, "refreshed"))
        elif _outputs_intact(root, record):
            result.skipped.append(task.name)
        else:
            plan.append((task, "restored"))
    if stale:
        raise StaleArtifactsError(stage, stale)

    if plan:
        if workers > 1 and len(plan) > 1:
            with ThreadPoolExecutor(max_workers=workers) as pool:
                contents = list(pool.map(lambda pair: pair[0].build(), plan))
        else:
            contents = [task.build() for task, _ in plan]
        for (task, disposition), files in zip(plan, contents):
            for rel, data in sorted(files.items()):
                atomic_write_bytes(root / rel, data)
            getattr(result, disposition).append(task.name)
            prev_tasks[task.name] = {
                "params_hash": task.params_hash,
                "data_hash": task.data_hash,
                "outputs": {rel: sha256_bytes(data) for rel, data in sorted(files.items())},
            }

    if keep_unlisted:
        records, dropped = prev_tasks, []
    else:
        current_names = {t.name for t in tasks}
        dropped = [name for name in prev_tasks if name not in current_names]
        records = {name: rec for name, rec in prev_tasks.items() if name in current_names}
    if result.wrote_anything or dropped or previous is None:
        _write_manifest(root, stage, records)
    return result


# -- artifact tree layout --

def cutoff_stamp(cutoff: dt.datetime) -> str:
    return cutoff.strftime("%Y%m%dT%H%M%SZ")


def parse_cutoff_stamp(stamp: str) -> dt.datetime:
    return dt.datetime.strptime(stamp, "%Y%m%dT%H%M%SZ").replace(tzinfo=dt.timezone.utc)


def hour_stamp(hour: dt.datetime) -> str:
    return hour.strftime("%Y-%m-%d-%H")


def counts_rel(hour: dt.datetime) -> str:
    return f"data/hourly/counts/{hour_stamp(hour)}.csv"


def presence_rel(hour: dt.datetime) -> str:
    return f"data/hourly/presence/{hour_stamp(hour)}.json"


UNIVERSE_REL = "data/universe.json"
PANEL_DIR = "data/panel"
FLOORS_REL = "metrics/floors.json"


def jobs_rel(freq: Freq, stamp: str) -> str:
    return f"jobs/{freq}/{stamp}/jobs.ndjson"


def forecast_rel(model: str, freq: Freq, stamp: str) -> str:
    return f"forecasts/{model}/{freq}/{stamp}.ndjson"


def report_rel(model: str, freq: Freq, stamp: str) -> str:
    return f"reports/validation/{model}__{freq}__{stamp}.json"


def metrics_rel(model: str, freq: Freq, stamp: str) -> str:
    return f"metrics/{model}/{freq}/{stamp}.ndjson"


class Pipeline:
    """Binds a RunConfig to the artifact tree and builds stage task lists."""

    def __init__(self, cfg: RunConfig):
        self.cfg = cfg
        self.root = Path(cfg.data_root)

    # - generic plumbing -

    def _require(self, *stages: str) -> None:
        for stage in stages:
            if not stage_complete(self.root, stage):
                raise UpstreamIncompleteError(
                    f"stage {stage!r} is incomplete; run it first")

    def _tasks_of(self, stage: str) -> dict[str, dict]:
        manifest = load_manifest(self.root, stage)
        return manifest["tasks"] if manifest else {}

    def _read(self, rel: str) -> str:
        return (self.root / rel).read_text(encoding="utf-8")

    def run(self, stage: str, *, force: bool = False,
            extra: dict | None = None) -> StageResult:
        if stage == "evaluate":
            return self._run_evaluate(force=force)
        self._require(*STAGE_DEPS[stage])
        builder = getattr(self, f"_{stage}_tasks")
        tasks = builder(**(extra or {}))
        workers = self.cfg.workers if stage in ("ingest", "baselines") else 1
        result = run_tasks(self.root, stage, tasks, force=force, workers=workers)
        log.info("stage %s: %d built, %d refreshed, %d restored, %d skipped",
                 stage, len(result.built), len(result.refreshed),
                 len(result.restored), len(result.skipped))
        return result

    def run_cycle(self, *, force: bool = False) -> list[StageResult]:
        return [self.run(stage, force=force) for stage in STAGE_ORDER]

    # - ingest -

    def _universe(self) -> ingest.RepoUniverse:
        return ingest.load_universe(self.cfg.universe_file, self.cfg.universe_size,
                                    selected_at=self.cfg.end)

    def _ingest_tasks(self) -> list[Task]:
        cfg = self.cfg
        universe = self._universe()
        universe_fp = hash_inputs({"repos": list(universe.repos),
                                   "criterion": universe.criterion,
                                   "selected_at": universe.selected_at})
        hour_params = hash_inputs({"universe": universe_fp,
                                   "exclude_bots": cfg.exclude_bots})
        tasks = [Task(
            name="universe",
            params_hash=hash_inputs({}),
            data_hash=universe_fp,
            build=lambda: {UNIVERSE_REL: ingest.render_universe(universe).encode("utf-8")},
        )]
        for hour in hour_range(cfg.start, cfg.end):
            def build(hour: dt.datetime = hour) -> dict[str, bytes]:
                raw = ingest.fetch_hour(cfg.source, hour)
                parsed = ingest.parse_archive_hour(raw, hour, universe,
                                                   exclude_bots=cfg.exclude_bots)
                return {
                    counts_rel(hour): ingest.render_counts(parsed.counts).encode("utf-8"),
                    presence_rel(hour): ingest.render_presence(
                        parsed.presence, parsed.skipped_records).encode("utf-8"),
                }
            tasks.append(Task(
                name=f"hour:{hour_stamp(hour)}",
                params_hash=hour_params,
                data_hash=hash_inputs({"source": cfg.source, "hour": format_ts(hour)}),
                build=build,
            ))
        return tasks

    # - rollup -

    def _rollup_tasks(self) -> list[Task]:
        cfg = self.cfg

        def build() -> dict[str, bytes]:
            universe = ingest.read_universe_file(self._read(UNIVERSE_REL))
            counts: list[ingest.HourlyCount] = []
            presence: dict[dt.datetime, str] = {}
            for hour in hour_range(cfg.start, cfg.end):
                mark, _ = ingest.read_presence(self._read(presence_rel(hour)))
                presence[mark.hour] = mark.status
                counts.extend(ingest.read_counts(self._read(counts_rel(hour))))
            pairs = [(repo, kind) for repo in universe.repos for kind in ingest.KINDS]
            partitions: dict[tuple[str, Freq], dict[panel.SeriesKey, panel.TimeSeries]] = {}
            for freq in FREQ_ORDER:
                rolled = panel.rollup(counts, presence, freq, pairs,
                                      thresholds=cfg.completeness)
                for key, series in rolled.items():
                    partitions.setdefault((key.kind, freq), {})[key] = series
            totals = {pair: 0 for pair in pairs}
            for row in counts:
                if (row.repo, row.kind) in totals:
                    totals[(row.repo, row.kind)] += row.count
            strata = panel.stratify(totals, cfg.strata_count)
            fingerprint = hash_inputs({"hourly": self._tasks_of("ingest")})
            files = panel.render_panel_files(partitions, strata,
                                             source_fingerprint=fingerprint)
            return {f"{PANEL_DIR}/{name}": text.encode("utf-8")
                    for name, text in files.items()}

        return [Task(
            name="panel",
            params_hash=hash_inputs({
                "thresholds": {str(f): v for f, v in sorted(cfg.completeness.items(),
                                                            key=lambda kv: str(kv[0]))},
                "strata_count": cfg.strata_count,
            }),
            data_hash=hash_inputs({"hourly": self._tasks_of("ingest")}),
            build=build,
        )]

    def _panel_store(self) -> panel.PanelStore:
        return panel.PanelStore(self.root / PANEL_DIR)

    def _panel_shas(self, freq: Freq | None = None) -> dict[str, str]:
        outputs = self._tasks_of("rollup")["panel"]["outputs"]
        if freq is None:
            return dict(sorted(outputs.items()))
        suffix = f"__{freq}.csv"
        return {rel: sha for rel, sha in sorted(outputs.items()) if rel.endswith(suffix)}

    def _strata_sha(self) -> str:
        return self._tasks_of("rollup")["panel"]["outputs"][f"{PANEL_DIR}/strata.csv"]

    # - jobs -

    def _schedule(self, store: panel.PanelStore) -> list[tuple[Freq, dt.datetime]]:
        out = []
        for freq in FREQ_ORDER:
            data_end = store.data_end(freq)
            if data_end is None:
                continue
            for cutoff in protocol.generate_cutoffs(self.cfg.cutoffs[freq], data_end):
                out.append((freq, cutoff))
        return out

    def _jobs_tasks(self) -> list[Task]:
        """One frozen task per (freq, cutoff), hashed by its own content.

        The windows a jobs file serializes are stable once their periods have
        elapsed, so content-hashing keeps old cutoffs skippable while any
        rewrite of already-published history shows up as a frozen violation.
        """
        cfg = self.cfg
        store = self._panel_store()
        universe = ingest.read_universe_file(self._read(UNIVERSE_REL))
        pairs = sorted((repo, kind) for repo in universe.repos for kind in ingest.KINDS)
        tasks = []
        for freq, cutoff in self._schedule(store):
            spec = cfg.cutoffs[freq]
            stamp = cutoff_stamp(cutoff)
            lines = []
            for repo, kind in pairs:
                job = protocol.build_job(panel.SeriesKey(repo, kind, freq),
                                         cutoff, spec, store)
                if job is not None:
                    lines.append(protocol.job_to_line(job) + "\n")
            content = "".join(lines).encode("utf-8")
            tasks.append(Task(
                name=f"jobs:{freq}:{stamp}",
                params_hash=hash_inputs({
                    "spec": [spec.horizon, spec.max_context, format_ts(spec.first_cutoff)],
                    "levels": list(cfg.quantile_levels),
                }),
                data_hash=sha256_bytes(content),
                build=lambda rel=jobs_rel(freq, stamp), data=content: {rel: data},
                frozen=True,
            ))
        return tasks

    def _job_files(self) -> list[tuple[Freq, str, str]]:
        """(freq, cutoff stamp, jobs file sha) for every emitted jobs file."""
        out = []
        for name, record in self._tasks_of("jobs").items():
            _, freq_name, stamp = name.split(":")
            freq = Freq(freq_name)
            out.append((freq, stamp, record["outputs"][jobs_rel(freq, stamp)]))
        out.sort(key=lambda row: (FREQ_ORDER.index(row[0]), row[1]))
        return out

    # - baselines -

    def _baselines_tasks(self) -> list[Task]:
        cfg = self.cfg
        tasks = []
        roster = [m for m in cfg.models if m in baselines.BUILTIN_MODELS]
        for model in roster:
            for freq, stamp, jobs_sha in self._job_files():
                def build(model: str = model, freq: Freq = freq,
                          stamp: str = stamp) -> dict[str, bytes]:
                    jobs = protocol.read_jobs(self.root / jobs_rel(freq, stamp))
                    lines = [protocol.forecast_to_line(
                        baselines.run_baseline(model, job,
                                               seasonal_periods=cfg.seasonal_periods)) + "\n"
                             for job in jobs]
                    return {forecast_rel(model, freq, stamp): "".join(lines).encode("utf-8")}

                params: dict = {"model": model}
                if model == baselines.SEASONAL_NAIVE:
                    params["seasonal"] = cfg.seasonal_periods[freq]
                tasks.append(Task(
                    name=f"baseline:{model}:{freq}:{stamp}",
                    params_hash=hash_inputs(params),
                    data_hash=hash_inputs({"jobs": jobs_sha}),
                    build=build,
                    frozen=True,
                ))
        return tasks

    # - collect -

    def _submitted(self) -> list[tuple[str, Freq, str, str, str]]:
        """(model, freq, stamp, forecast sha, jobs sha) for submitted files."""
        out = []
        for model in self.cfg.models:
            for freq, stamp, jobs_sha in self._job_files():
                sha = sha256_file(self.root / forecast_rel(model, freq, stamp))
                if sha is not None:
                    out.append((model, freq, stamp, sha, jobs_sha))
        return out

    def _collect_tasks(self) -> list[Task]:
        tasks = []
        for model, freq, stamp, forecast_sha, jobs_sha in self._submitted():
            def build(model: str = model, freq: Freq = freq,
                      stamp: str = stamp) -> dict[str, bytes]:
                jobs = {job.job_id: job
                        for job in protocol.read_jobs(self.root / jobs_rel(freq, stamp))}
                forecasts = protocol.read_forecasts(
                    self.root / forecast_rel(model, freq, stamp))
                rejected: dict[str, list[str]] = {}
                seen: set[str] = set()
                n_accepted = 0
                for forecast in forecasts:
                    if forecast.job_id in seen:
                        rejected[forecast.job_id] = ["duplicate forecast for job"]
                        continue
                    seen.add(forecast.job_id)
                    job = jobs.get(forecast.job_id)
                    if job is None:
                        rejected[forecast.job_id] = ["unknown job id"]
                        continue
                    violations = protocol.validate_forecast(forecast, job)
                    if violations:
                        rejected[forecast.job_id] = violations
                    else:
                        n_accepted += 1
                report = {
                    "model": model,
                    "freq": str(freq),
                    "cutoff": format_ts(parse_cutoff_stamp(stamp)),
                    "n_jobs": len(jobs),
                    "n_forecasts": len(forecasts),
                    "n_accepted": n_accepted,
                    "rejected": dict(sorted(rejected.items())),
                    "missing_jobs": sorted(set(jobs) - seen),
                }
                body = json.dumps(report, indent=2, sort_keys=True) + "\n"
                return {report_rel(model, freq, stamp): body.encode("utf-8")}

            tasks.append(Task(
                name=f"collect:{model}:{freq}:{stamp}",
                params_hash=hash_inputs({}),
                data_hash=hash_inputs({"forecast": forecast_sha, "jobs": jobs_sha}),
                build=build,
            ))
        return tasks

    # - evaluate -

    def _accepted_forecasts(self, model: str, freq: Freq,
                            stamp: str) -> list[protocol.QuantileForecast]:
        report = json.loads(self._read(report_rel(model, freq, stamp)))
        bad = set(report["rejected"])
        forecasts = protocol.read_forecasts(self.root / forecast_rel(model, freq, stamp))
        accepted = []
        seen: set[str] = set()
        for forecast in forecasts:
            if forecast.job_id in bad or forecast.job_id in seen:
                continue
            seen.add(forecast.job_id)
            accepted.append(forecast)
        return accepted

    def _raw_records(self, store: panel.PanelStore, model: str, freq: Freq,
                     stamp: str) -> dict[tuple[str, str], evaluation.MetricRecord]:
        jobs = {job.job_id: job
                for job in protocol.read_jobs(self.root / jobs_rel(freq, stamp))}
        out = {}
        for forecast in self._accepted_forecasts(model, freq, stamp):
            job = jobs[forecast.job_id]
            record = evaluation.score_forecast(
                job, forecast, evaluation.actuals_for_job(store, job),
                self.cfg.seasonal_periods[freq])
            if record is not None:
                out[(job.repo, job.kind)] = record
        return out

    def _floors_task(self, store: panel.PanelStore,
                     zero_records: Callable) -> Task:
        cfg = self.cfg
        collect_tasks = self._tasks_of("collect")
        zero_cells = {}
        for freq, stamp, jobs_sha in self._job_files():
            name = f"collect:{baselines.ZERO_MODEL}:{freq}:{stamp}"
            if name not in collect_tasks:
                raise UpstreamIncompleteError(
                    f"no validated {baselines.ZERO_MODEL} forecasts for {freq} {stamp}; "
                    "scaling needs the reference model everywhere")
            zero_cells[f"{freq}:{stamp}"] = {
                "jobs": jobs_sha,
                "forecast": sha256_file(self.root / forecast_rel(
                    baselines.ZERO_MODEL, freq, stamp)),
            }

        def build() -> dict[str, bytes]:
            strata = store.strata()
            pooled = []
            for freq, stamp, _ in self._job_files():
                pooled.extend(zero_records(freq, stamp).values())
            floors = evaluation.compute_floors(pooled, strata)
            return {FLOORS_REL: evaluation.render_floors(floors).encode("utf-8")}

        return Task(
            name="floors",
            params_hash=hash_inputs({
                "seasonal": {str(f): m for f, m in sorted(cfg.seasonal_periods.items(),
                                                          key=lambda kv: str(kv[0]))},
            }),
            data_hash=hash_inputs({
                "cells": zero_cells,
                "strata": self._strata_sha(),
                "panel": self._panel_shas(),
            }),
            build=build,
        )

    def _metric_tasks(self, store: panel.PanelStore,
                      zero_records: Callable) -> list[Task]:
        """Frozen per-(model, freq, cutoff) scoring tasks, content-hashed.

        Scores are recomputed to decide skips, which keeps the skip rule
        honest: a metric file is up to date exactly when re-scoring yields
        the same bytes. Actual scoring is cheap next to ingestion.
        """
        cfg = self.cfg
        floors = evaluation.parse_floors(self._read(FLOORS_REL))
        strata = store.strata()
        collect_tasks = self._tasks_of("collect")
        tasks = []
        for model, freq, stamp, _, _ in self._submitted():
            if f"collect:{model}:{freq}:{stamp}" not in collect_tasks:
                continue  # submitted after collect ran; next cycle picks it up
            references = zero_records(freq, stamp)
            records = [
                evaluation.scale_record(record, references.get(series), floors, strata)
                for series, record in self._raw_records(store, model, freq, stamp).items()
            ]
            content = evaluation.render_records(records).encode("utf-8")
            tasks.append(Task(
                name=f"metrics:{model}:{freq}:{stamp}",
                params_hash=hash_inputs({
                    "seasonal": cfg.seasonal_periods[freq],
                    "levels": list(cfg.quantile_levels),
                }),
                data_hash=sha256_bytes(content),
                build=lambda rel=metrics_rel(model, freq, stamp), data=content: {rel: data},
                frozen=True,
            ))
        return tasks

    def _run_evaluate(self, *, force: bool = False) -> StageResult:
        """Floors first, then per-model scoring; one manifest for the stage.

        The floors file is an input to every metric task, so the stage runs
        as two batches against the same manifest.
        """
        self._require(*STAGE_DEPS["evaluate"])
        store = self._panel_store()
        cache: dict[tuple[Freq, str], dict] = {}

        def zero_records(freq: Freq, stamp: str) -> dict:
            key = (freq, stamp)
            if key not in cache:
                cache[key] = self._raw_records(store, baselines.ZERO_MODEL, freq, stamp)
            return cache[key]

        floors_task = self._floors_task(store, zero_records)
        first = run_tasks(self.root, "evaluate", [floors_task], force=force,
                          keep_unlisted=True)
        metric_tasks = self._metric_tasks(store, zero_records)
        second = run_tasks(self.root, "evaluate", [floors_task] + metric_tasks,
                           force=force)
        touched = set(first.built + first.refreshed + first.restored)
        merged = StageResult(
            "evaluate",
            built=first.built + second.built,
            refreshed=first.refreshed + second.refreshed,
            restored=first.restored + second.restored,
            skipped=[n for n in second.skipped if n not in touched])
        log.info("stage evaluate: %d built, %d refreshed, %d restored, %d skipped",
                 len(merged.built), len(merged.refreshed), len(merged.restored),
                 len(merged.skipped))
        return merged

    # - leaderboard -

    def _metric_files(self) -> dict[str, str]:
        out = {}
        for name, record in self._tasks_of("evaluate").items():
            if name.startswith("metrics:"):
                out.update(record["outputs"])
        return dict(sorted(out.items()))

    def _leaderboard_tasks(self, as_of: dt.datetime | None = None,
                           worst_first: bool = False) -> list[Task]:
        metric_files = self._metric_files()

        def build() -> dict[str, bytes]:
            store = self._panel_store()
            strata = store.strata()
            records = []
            for rel in metric_files:
                records.extend(evaluation.read_records(self.root / rel))
            if as_of is not None:
                records = [r for r in records if r.cutoff <= as_of]
            rows, exclusions = leaderboard.build_leaderboard(records, strata,
                                                             worst_first=worst_first)
            cutoffs: dict[str, list[str]] = {}
            for record in records:
                stamps = cutoffs.setdefault(str(record.freq), [])
                stamp = format_ts(record.cutoff)
                if stamp not in stamps:
                    stamps.append(stamp)
            for stamps in cutoffs.values():
                stamps.sort()
            panel_manifest_sha = self._tasks_of("rollup")["panel"]["outputs"][
                f"{PANEL_DIR}/manifest.json"]
            return {
                "reports/leaderboard.csv": leaderboard.render_csv(rows).encode("utf-8"),
                "reports/leaderboard.json": leaderboard.render_json(
                    rows, exclusions,
                    as_of=format_ts(as_of) if as_of else None,
                    worst_first=worst_first,
                    data_version=panel_manifest_sha,
                    cutoffs=cutoffs,
                ).encode("utf-8"),
            }

        return [Task(
            name="leaderboard",
            params_hash=hash_inputs({}),
            data_hash=hash_inputs({
                "metrics": metric_files,
                "strata": self._strata_sha(),
                "as_of": format_ts(as_of) if as_of else None,
                "worst_first": worst_first,
            }),
            build=build,
        )]

    # - describe -

    def _describe_tasks(self) -> list[Task]:
        params = self.cfg.descriptors

        def build() -> dict[str, bytes]:
            store = self._panel_store()
            universe = ingest.read_universe_file(self._read(UNIVERSE_REL))
            rows = descriptors.describe_panel(
                store, sorted(universe.repos), ingest.KINDS, FREQ_ORDER, params)
            meta = {
                "bandpower_split": params.bandpower_split,
                "permutation_order": params.permutation_order,
                "permutation_delay": params.permutation_delay,
                "n_series": len(rows),
            }
            return {
                "reports/descriptors.csv": descriptors.render_rows(rows).encode("utf-8"),
                "reports/descriptors_meta.json":
                    (json.dumps(meta, indent=2, sort_keys=True) + "\n").encode("utf-8"),
            }

        return [Task(
            name="descriptors",
            params_hash=hash_inputs({
                "params": [params.bandpower_split, params.permutation_order,
                           params.permutation_delay],
            }),
            data_hash=hash_inputs({"panel": self._panel_shas()}),
            build=build,
        )]

    # - status -

    def status(self) -> dict:
        stages = {}
        for stage in STAGE_ORDER:
            manifest = load_manifest(self.root, stage)
            if manifest is None:
                stages[stage] = {"state": "missing", "tasks": 0}
                continue
            intact = all(_outputs_intact(self.root, rec)
                         for rec in manifest["tasks"].values())
            stages[stage] = {
                "state": "complete" if intact else "damaged",
                "tasks": len(manifest["tasks"]),
                "completed_at": manifest["completed_at"],
            }
        pending = []
        if stages["jobs"]["state"] == "complete":
            for model in self.cfg.models:
                for freq, stamp, _ in self._job_files():
                    if not (self.root / forecast_rel(model, freq, stamp)).exists():
                        pending.append({"model": model, "freq": str(freq),
                                        "cutoff": format_ts(parse_cutoff_stamp(stamp))})
        return {"stages": stages, "pending_forecasts": pending}
