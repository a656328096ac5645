"""Adapter tests, validated against the engine's own protocol code.

The engine (ghbench) is a test-only dependency here: the adapter under test
speaks NDJSON, and these tests check its output with the validator that will
actually judge submissions.
"""

import datetime as dt
import json
import time

import numpy as np
import pytest

from ghbench import protocol
from ghbench.baselines import zero_forecast
from ghbench.timegrid import FREQ_ORDER

from forecast_adapter import ForecasterPlugin, load_plugin, run_adapter
from forecast_adapter.cli import main
from forecast_adapter.core import sidecar_path
from forecast_adapter.plugins import last_value, zero

UTC = dt.timezone.utc


def make_jobs(n: int, seed: int = 13) -> list[protocol.ForecastJob]:
    rng = np.random.default_rng(seed)
    jobs = []
    for i in range(n):
        freq = FREQ_ORDER[i % 4]
        repo, kind = f"org/repo{i:03d}", "stars"
        cutoff = dt.datetime(2026, 2, 8, tzinfo=UTC)
        jobs.append(protocol.ForecastJob(
            job_id=protocol.job_id(repo, kind, freq, cutoff),
            repo=repo, kind=kind, freq=freq, cutoff=cutoff,
            horizon=int(rng.integers(1, 25)),
            quantile_levels=protocol.QUANTILE_LEVELS,
            context=tuple(float(x) for x in rng.integers(0, 40,
                                                         size=int(rng.integers(1, 51)))),
        ))
    return jobs


def write_job_file(path, jobs) -> None:
    path.write_text("".join(protocol.job_to_line(j) + "\n" for j in jobs),
                    encoding="utf-8")


def crossing_plugin(seed: int = 29) -> ForecasterPlugin:
    """Emits quantiles in deliberately shuffled (often descending) order."""
    rng = np.random.default_rng(seed)

    def predict(context, horizon, levels):
        base = float(np.mean(context))
        rows = []
        for _ in range(horizon):
            row = [base + k * 0.5 for k in range(len(levels))]
            rng.shuffle(row)
            rows.append(row)
        return rows

    return ForecasterPlugin(name="Shuffler", predict=predict)


# -- the published secondary criterion --

def test_round_trip_validates_clean_on_100_jobs(tmp_path):
    started = time.monotonic()
    jobs = make_jobs(100)
    job_file = tmp_path / "jobs.ndjson"
    write_job_file(job_file, jobs)
    out = tmp_path / "out.ndjson"

    result = run_adapter(job_file, crossing_plugin(), out)
    assert result.written == 100 and not result.skipped

    forecasts = protocol.read_forecasts(out)
    assert [f.job_id for f in forecasts] == [j.job_id for j in jobs]
    by_id = {j.job_id: j for j in jobs}
    for forecast in forecasts:
        assert protocol.validate_forecast(forecast, by_id[forecast.job_id]) == []
    elapsed = time.monotonic() - started
    assert elapsed < 10.0, f"budget exceeded: {elapsed:.1f}s >= 10s"


def test_zero_plugin_output_matches_engine_zero_model(tmp_path):
    jobs = make_jobs(12)
    job_file = tmp_path / "jobs.ndjson"
    write_job_file(job_file, jobs)
    out = tmp_path / "out.ndjson"
    run_adapter(job_file, zero, out)
    engine_text = "".join(
        protocol.forecast_to_line(zero_forecast(j)) + "\n" for j in jobs)
    assert out.read_text(encoding="utf-8") == engine_text


def test_plugin_exception_skips_only_that_job(tmp_path):
    jobs = make_jobs(10)
    job_file = tmp_path / "jobs.ndjson"
    write_job_file(job_file, jobs)
    poison = jobs[3].context

    def predict(context, horizon, levels):
        if context == poison:
            raise RuntimeError("model fell over")
        return [[1.0] * len(levels) for _ in range(horizon)]

    out = tmp_path / "out.ndjson"
    result = run_adapter(job_file, ForecasterPlugin("Flaky", predict), out)
    assert result.written == 9
    assert result.skipped == ((jobs[3].job_id, "RuntimeError: model fell over"),)
    sidecar = json.loads(result.sidecar_path.read_text().strip())
    assert sidecar == {"job_id": jobs[3].job_id, "error": "RuntimeError: model fell over"}
    assert [f.job_id for f in protocol.read_forecasts(out)] == [
        j.job_id for j in jobs if j.job_id != jobs[3].job_id]

    # a clean rerun clears the stale sidecar
    result = run_adapter(job_file, last_value, out)
    assert result.written == 10 and result.sidecar_path is None
    assert not sidecar_path(out).exists()


def test_unusable_plugin_output_is_skipped_not_written(tmp_path):
    jobs = make_jobs(6)
    job_file = tmp_path / "jobs.ndjson"
    write_job_file(job_file, jobs)
    bad_id = jobs[0].job_id

    def predict(context, horizon, levels):
        if len(context) == len(jobs[0].context):
            return [[float("nan")] * len(levels) for _ in range(horizon)]
        return [[2.0] * len(levels) for _ in range(horizon)]

    out = tmp_path / "out.ndjson"
    result = run_adapter(job_file, ForecasterPlugin("NaNer", predict), out)
    assert any(job_id == bad_id and "non-finite" in reason
               for job_id, reason in result.skipped)
    by_id = {j.job_id: j for j in jobs}
    for forecast in protocol.read_forecasts(out):
        assert protocol.validate_forecast(forecast, by_id[forecast.job_id]) == []

    def short(context, horizon, levels):
        return [[0.0] * len(levels)]  # always one row, wrong for horizon > 1

    result = run_adapter(job_file, ForecasterPlugin("Stumpy", short), out)
    assert all("shape" in reason for _, reason in result.skipped)
    assert result.written + len(result.skipped) == 6


def test_malformed_job_file_aborts(tmp_path):
    job_file = tmp_path / "jobs.ndjson"
    good = protocol.job_to_line(make_jobs(1)[0])
    job_file.write_text(good + "\n{\"job_id\": \"oops\"\n", encoding="utf-8")
    with pytest.raises(ValueError, match="malformed job line"):
        run_adapter(job_file, zero, tmp_path / "out.ndjson")
    assert not (tmp_path / "out.ndjson").exists()


def test_load_plugin_reference_forms():
    assert load_plugin("forecast_adapter.plugins:zero") is zero
    assert load_plugin("forecast_adapter.plugins.last_value") is last_value
    loaded = load_plugin(f"{__name__}:crossing_plugin")  # factory callable
    assert loaded.name == "Shuffler"
    with pytest.raises(ValueError, match="cannot load plugin"):
        load_plugin("forecast_adapter.plugins:missing")
    with pytest.raises(ValueError, match="cannot load plugin"):
        load_plugin("no_such_module:thing")
    with pytest.raises(ValueError, match="not a ForecasterPlugin"):
        load_plugin("forecast_adapter.plugins:_zero_predict")


def test_cli_round_trip(tmp_path, capsys):
    jobs = make_jobs(5)
    job_file = tmp_path / "jobs.ndjson"
    write_job_file(job_file, jobs)
    out = tmp_path / "fc.ndjson"
    code = main(["--jobs", str(job_file),
                 "--plugin", "forecast_adapter.plugins:zero",
                 "--out", str(out)])
    assert code == 0
    assert "wrote 5 forecasts" in capsys.readouterr().out
    assert len(protocol.read_forecasts(out)) == 5

    assert main(["--jobs", str(job_file), "--plugin", "nope:nope",
                 "--out", str(out)]) == 1
    assert main(["--jobs", str(tmp_path / "absent.ndjson"),
                 "--plugin", "forecast_adapter.plugins:zero",
                 "--out", str(out)]) == 3
