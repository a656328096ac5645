"""Command-line entry point: adapter --jobs PATH --plugin NAME --out PATH."""

from __future__ import annotations

import argparse
import sys

from .core import load_plugin, run_adapter


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="adapter",
        description="Forecast a job file with a plugin and write the forecast file.")
    parser.add_argument("--jobs", required=True, help="job NDJSON file to forecast")
    parser.add_argument("--plugin", required=True,
                        help="plugin reference, e.g. forecast_adapter.plugins:zero")
    parser.add_argument("--out", required=True, help="forecast NDJSON file to write")
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        plugin = load_plugin(args.plugin)
        result = run_adapter(args.jobs, plugin, args.out)
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"io error: {exc}", file=sys.stderr)
        return 3
    line = f"wrote {result.written} forecasts to {result.out_path}"
    if result.skipped:
        line += f" ({len(result.skipped)} skipped, errors in {result.sidecar_path})"
    print(line)
    return 0


if __name__ == "__main__":
    sys.exit(main())
