"""Command-line front end for the benchmark pipeline.

Exit codes: 0 success, 1 configuration or validation problems (including
recorded artifacts whose inputs changed, which need --force), 2 incomplete
upstream stages, 3 filesystem or network failures.
"""

from __future__ import annotations

import argparse
import dataclasses
import logging
import sys
from pathlib import Path

from . import protocol
from .config import ConfigError, load_config
from .orchestrator import (
    Pipeline,
    StaleArtifactsError,
    UpstreamIncompleteError,
    cutoff_stamp,
    forecast_rel,
    jobs_rel,
)
from .timegrid import Freq, format_ts, parse_ts

log = logging.getLogger(__name__)

#: CLI verb -> orchestrator stage.
STAGE_VERBS = {
    "ingest": "ingest",
    "rollup": "rollup",
    "emit-jobs": "jobs",
    "run-baselines": "baselines",
    "collect": "collect",
    "evaluate": "evaluate",
    "leaderboard": "leaderboard",
    "describe": "describe",
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="ghbench",
        description="GitHub activity forecasting benchmark pipeline")
    parser.add_argument("--config", "-c", default="ghbench.yaml",
                        help="run configuration file (default: %(default)s)")
    parser.add_argument("--force", action="store_true",
                        help="overwrite artifacts whose recorded inputs changed")
    parser.add_argument("--workers", type=int, default=None,
                        help="override the configured worker count")
    parser.add_argument("--verbose", "-v", action="store_true",
                        help="log per-stage progress")
    sub = parser.add_subparsers(dest="command", required=True)

    for verb in STAGE_VERBS:
        if verb == "leaderboard":
            continue
        sub.add_parser(verb, help=f"run the {STAGE_VERBS[verb]} stage")

    board = sub.add_parser("leaderboard", help="aggregate metrics into the ranking report")
    board.add_argument("--as-of", default=None, metavar="TIMESTAMP",
                       help="only use cutoffs at or before this time")
    board.add_argument("--worst-first", action="store_true",
                       help="reverse the report order")

    sub.add_parser("run-cycle", help="run every stage in order")
    sub.add_parser("status", help="show stage states and pending forecasts")

    check = sub.add_parser("validate",
                           help="validate one submitted forecast file against its jobs")
    check.add_argument("--model", required=True)
    check.add_argument("--freq", required=True, choices=[str(f) for f in Freq])
    check.add_argument("--cutoff", required=True,
                       help="cutoff timestamp (RFC 3339 or compact form)")
    return parser


def _parse_cutoff(text: str):
    try:
        return parse_ts(text)
    except ValueError:
        from .orchestrator import parse_cutoff_stamp
        return parse_cutoff_stamp(text)


def _cmd_validate(pipeline: Pipeline, args: argparse.Namespace) -> int:
    freq = Freq(args.freq)
    cutoff = _parse_cutoff(args.cutoff)
    stamp = cutoff_stamp(cutoff)
    jobs_path = pipeline.root / jobs_rel(freq, stamp)
    forecast_path = pipeline.root / forecast_rel(args.model, freq, stamp)
    if not jobs_path.exists():
        print(f"no jobs file at {jobs_path}", file=sys.stderr)
        return 2
    if not forecast_path.exists():
        print(f"no forecast file at {forecast_path}", file=sys.stderr)
        return 2
    jobs = {job.job_id: job for job in protocol.read_jobs(jobs_path)}
    n_bad = 0
    n_ok = 0
    seen: set[str] = set()
    for forecast in protocol.read_forecasts(forecast_path):
        if forecast.job_id in seen:
            print(f"{forecast.job_id}: duplicate forecast for job")
            n_bad += 1
            continue
        seen.add(forecast.job_id)
        job = jobs.get(forecast.job_id)
        violations = (["unknown job id"] if job is None
                      else protocol.validate_forecast(forecast, job))
        if violations:
            n_bad += 1
            for violation in violations:
                print(f"{forecast.job_id}: {violation}")
        else:
            n_ok += 1
    missing = len(jobs) - len(seen & set(jobs))
    print(f"{n_ok} valid, {n_bad} rejected, {missing} jobs without a forecast")
    return 1 if n_bad else 0


def _cmd_status(pipeline: Pipeline) -> int:
    status = pipeline.status()
    for stage, info in status["stages"].items():
        line = f"{stage:12s} {info['state']}"
        if info.get("tasks"):
            line += f" ({info['tasks']} tasks)"
        print(line)
    pending = status["pending_forecasts"]
    if pending:
        print(f"pending forecasts: {len(pending)}")
        for item in pending:
            print(f"  {item['model']} {item['freq']} {item['cutoff']}")
    return 0


def _print_result(result) -> None:
    print(f"{result.stage}: {len(result.built)} built, "
          f"{len(result.restored)} restored, {len(result.skipped)} skipped")


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(
        level=logging.INFO if args.verbose else logging.WARNING,
        format="%(levelname)s %(name)s: %(message)s")
    try:
        cfg = load_config(Path(args.config))
        if args.workers:
            cfg = dataclasses.replace(cfg, workers=args.workers)
        pipeline = Pipeline(cfg)

        if args.command == "status":
            return _cmd_status(pipeline)
        if args.command == "validate":
            return _cmd_validate(pipeline, args)
        if args.command == "run-cycle":
            for result in pipeline.run_cycle(force=args.force):
                _print_result(result)
            return 0
        extra = None
        if args.command == "leaderboard":
            extra = {
                "as_of": _parse_cutoff(args.as_of) if args.as_of else None,
                "worst_first": args.worst_first,
            }
        result = pipeline.run(STAGE_VERBS[args.command], force=args.force, extra=extra)
        _print_result(result)
        return 0
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 1
    except StaleArtifactsError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except UpstreamIncompleteError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"i/o error: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
