"""Run one forecaster over one job file and emit a protocol forecast file.

The adapter owns the tolerant half of the contract: the engine rejects any
forecast whose quantiles cross and never repairs, so rows are sorted ascending
here before they are written. A plugin that raises (or returns garbage) for a
job costs only that job; the failure lands in an error sidecar next to the
output file instead of aborting the batch. A malformed job file, by contrast,
is an upstream defect and aborts immediately.
"""

from __future__ import annotations

import importlib
import json
import math
import os
import tempfile
from dataclasses import dataclass
from pathlib import Path
from typing import Callable, Sequence


@dataclass(frozen=True)
class ForecasterPlugin:
    """A named forecaster: predict(context, horizon, levels) -> matrix.

    The matrix must be ``horizon`` rows of ``len(levels)`` finite numbers,
    one row per step, columns in level order. Rows may arrive unsorted; the
    adapter enforces monotonicity, not the plugin.
    """

    name: str
    predict: Callable[[Sequence[float], int, Sequence[float]], Sequence[Sequence[float]]]

    def __post_init__(self) -> None:
        if not self.name:
            raise ValueError("plugin name must be non-empty")


@dataclass(frozen=True)
class ParsedJob:
    job_id: str
    horizon: int
    quantile_levels: tuple[float, ...]
    context: tuple[float, ...]


@dataclass(frozen=True)
class AdapterResult:
    out_path: Path
    written: int
    skipped: tuple[tuple[str, str], ...]  # (job_id, reason) in input order
    sidecar_path: Path | None


def parse_job_line(line: str) -> ParsedJob:
    """Extract the fields a forecaster consumes; unknown keys pass through."""
    obj = json.loads(line)
    return ParsedJob(
        job_id=str(obj["job_id"]),
        horizon=int(obj["horizon"]),
        quantile_levels=tuple(float(q) for q in obj["quantile_levels"]),
        context=tuple(float(v) for v in obj["context"]),
    )


def read_job_file(path: Path | str) -> list[ParsedJob]:
    """Load a job file; any malformed line aborts with ValueError."""
    jobs = []
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            try:
                jobs.append(parse_job_line(line))
            except (json.JSONDecodeError, KeyError, TypeError, ValueError) as exc:
                raise ValueError(f"{path}:{lineno}: malformed job line: {exc}") from exc
    return jobs


def forecast_line(job_id: str, model: str, rows: list[list[float]]) -> str:
    # key order and separators match the engine's own serializer byte for byte
    payload = {"job_id": job_id, "model": model, "values": rows}
    return json.dumps(payload, separators=(", ", ": "))


def _conform(matrix, horizon: int, n_levels: int) -> list[list[float]]:
    """Coerce plugin output to sorted float rows; ValueError when unusable."""
    rows = [list(row) for row in matrix]
    if len(rows) != horizon or any(len(row) != n_levels for row in rows):
        got = f"{len(rows)}x{len(rows[0]) if rows else 0}"
        raise ValueError(f"plugin returned shape {got}, expected {horizon}x{n_levels}")
    out = []
    for i, row in enumerate(rows):
        values = [float(v) for v in row]
        if not all(math.isfinite(v) for v in values):
            raise ValueError(f"plugin returned non-finite value at step {i + 1}")
        out.append(sorted(values))
    return out


def _atomic_write(path: Path, text: str) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.")
    try:
        with os.fdopen(fd, "w", encoding="utf-8") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        os.unlink(tmp)
        raise


def sidecar_path(out_path: Path | str) -> Path:
    return Path(f"{out_path}.errors.ndjson")


def run_adapter(job_file: Path | str, plugin: ForecasterPlugin,
                out_path: Path | str) -> AdapterResult:
    """Forecast every job in ``job_file`` and write the forecast file.

    Output preserves the input's job order with each job_id echoed verbatim.
    Jobs whose plugin call fails are skipped and recorded, one NDJSON line
    ``{"job_id", "error"}`` each, in a sidecar next to the output; a stale
    sidecar from an earlier run is removed when this run has no failures.
    """
    jobs = read_job_file(job_file)
    out_path = Path(out_path)
    lines: list[str] = []
    skipped: list[tuple[str, str]] = []
    for job in jobs:
        try:
            raw = plugin.predict(job.context, job.horizon, job.quantile_levels)
            rows = _conform(raw, job.horizon, len(job.quantile_levels))
        except Exception as exc:
            skipped.append((job.job_id, f"{type(exc).__name__}: {exc}"))
            continue
        lines.append(forecast_line(job.job_id, plugin.name, rows) + "\n")

    _atomic_write(out_path, "".join(lines))
    sidecar = sidecar_path(out_path)
    if skipped:
        _atomic_write(sidecar, "".join(
            json.dumps({"job_id": job_id, "error": reason}) + "\n"
            for job_id, reason in skipped))
    else:
        sidecar.unlink(missing_ok=True)
        sidecar = None
    return AdapterResult(out_path=out_path, written=len(lines),
                         skipped=tuple(skipped), sidecar_path=sidecar)


def load_plugin(ref: str) -> ForecasterPlugin:
    """Resolve 'package.module:attr' (or dotted-only) to a plugin.

    The attribute may be a ForecasterPlugin or a zero-argument callable
    returning one, so modules can expose lazily constructed wrappers.
    """
    module_name, sep, attr = ref.partition(":")
    if not sep:
        module_name, sep, attr = ref.rpartition(".")
        if not sep:
            raise ValueError(f"plugin reference {ref!r} needs 'module:attr' form")
    try:
        module = importlib.import_module(module_name)
        target = getattr(module, attr)
    except (ImportError, AttributeError) as exc:
        raise ValueError(f"cannot load plugin {ref!r}: {exc}") from exc
    if callable(target) and not isinstance(target, ForecasterPlugin):
        try:
            target = target()
        except TypeError as exc:
            raise ValueError(f"plugin {ref!r} is not a ForecasterPlugin "
                             f"or a zero-argument factory: {exc}") from exc
    if not isinstance(target, ForecasterPlugin):
        raise ValueError(f"plugin {ref!r} is not a ForecasterPlugin")
    return target
