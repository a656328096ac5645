"""Run configuration: one YAML document drives every stage.

Every tunable the protocol defines is present here with its default, so a
minimal config only names the archive source, the ingest range, and the
universe file. Relative paths resolve against the config file's directory,
which keeps fixture trees relocatable.
"""

from __future__ import annotations

import datetime as dt
from dataclasses import dataclass, field
from pathlib import Path

import yaml

from .baselines import BUILTIN_MODELS, ZERO_MODEL
from .metrics import DEFAULT_SEASONAL_PERIODS
from .panel import COMPLETENESS_THRESHOLDS
from .protocol import QUANTILE_LEVELS, CutoffSpec, default_specs
from .timegrid import Freq, format_ts, parse_ts


class ConfigError(ValueError):
    """Invalid or missing configuration; maps to exit code 1."""


@dataclass(frozen=True)
class DescriptorParams:
    bandpower_split: float = 0.125
    permutation_order: int = 3
    permutation_delay: int = 1


@dataclass(frozen=True)
class RunConfig:
    source: str
    start: dt.datetime
    end: dt.datetime
    universe_file: Path
    universe_size: int
    data_root: Path
    models: tuple[str, ...] = BUILTIN_MODELS
    workers: int = 4
    exclude_bots: bool = False
    completeness: dict[Freq, float] = field(default_factory=lambda: dict(COMPLETENESS_THRESHOLDS))
    quantile_levels: tuple[float, ...] = QUANTILE_LEVELS
    seasonal_periods: dict[Freq, int] = field(default_factory=lambda: dict(DEFAULT_SEASONAL_PERIODS))
    strata_count: int = 3
    descriptors: DescriptorParams = DescriptorParams()
    cutoffs: dict[Freq, CutoffSpec] = field(default_factory=default_specs)

    def validate(self) -> None:
        if self.end <= self.start:
            raise ConfigError("end must be after start")
        if ZERO_MODEL not in self.models:
            raise ConfigError("models must include the zero reference model; "
                              "scaled scores divide by its error")
        if self.universe_size < 1:
            raise ConfigError("universe size must be positive")
        if self.workers < 1:
            raise ConfigError("workers must be positive")
        if self.strata_count < 1:
            raise ConfigError("strata count must be positive")
        levels = self.quantile_levels
        if len(levels) != 9 or list(levels) != sorted(levels) or not all(
                0.0 < q < 1.0 for q in levels):
            raise ConfigError("quantile_levels must be nine ascending values in (0, 1)")
        if 0.5 not in levels:
            raise ConfigError("quantile_levels must include the median")
        for freq, rule in self.completeness.items():
            if not 0.0 < rule <= 1.0:
                raise ConfigError(f"completeness threshold for {freq} must be in (0, 1]")
        for freq, m in self.seasonal_periods.items():
            if m < 1:
                raise ConfigError(f"seasonal period for {freq} must be positive")
        for freq, spec in self.cutoffs.items():
            if spec.freq is not freq:
                raise ConfigError(f"cutoff spec under {freq} declares freq {spec.freq}")

    def fingerprint(self) -> dict:
        """Canonical JSON-safe view of everything that affects artifacts."""
        return {
            "source": str(self.source),
            "start": format_ts(self.start),
            "end": format_ts(self.end),
            "universe_size": self.universe_size,
            "exclude_bots": self.exclude_bots,
            "completeness": {str(f): v for f, v in sorted(self.completeness.items(),
                                                          key=lambda kv: str(kv[0]))},
            "quantile_levels": list(self.quantile_levels),
            "seasonal_periods": {str(f): v for f, v in sorted(self.seasonal_periods.items(),
                                                              key=lambda kv: str(kv[0]))},
            "strata_count": self.strata_count,
            "descriptors": [self.descriptors.bandpower_split,
                            self.descriptors.permutation_order,
                            self.descriptors.permutation_delay],
            "cutoffs": {str(f): [s.horizon, s.max_context, format_ts(s.first_cutoff)]
                        for f, s in sorted(self.cutoffs.items(), key=lambda kv: str(kv[0]))},
        }


_KNOWN_KEYS = {
    "source", "start", "end", "universe", "data_root", "models", "workers",
    "exclude_bots", "completeness", "quantile_levels", "seasonal_periods",
    "strata", "descriptors", "cutoffs",
}


def _as_ts(value, label: str) -> dt.datetime:
    if isinstance(value, dt.datetime):
        return parse_ts(value.isoformat())
    if isinstance(value, dt.date):
        return parse_ts(value.isoformat() + "T00:00:00Z")
    if isinstance(value, str):
        try:
            return parse_ts(value)
        except ValueError as exc:
            raise ConfigError(f"{label}: bad timestamp {value!r}") from exc
    raise ConfigError(f"{label}: expected a timestamp, got {value!r}")


def _as_freq(name: str, label: str) -> Freq:
    try:
        return Freq(name)
    except ValueError as exc:
        raise ConfigError(f"{label}: unknown frequency {name!r}") from exc


def load_config(path: Path) -> RunConfig:
    """Parse and validate a config file; all errors become ConfigError."""
    path = Path(path)
    try:
        raw = yaml.safe_load(path.read_text(encoding="utf-8"))
    except FileNotFoundError as exc:
        raise ConfigError(f"config file not found: {path}") from exc
    except yaml.YAMLError as exc:
        raise ConfigError(f"{path}: not valid YAML: {exc}") from exc
    if not isinstance(raw, dict):
        raise ConfigError(f"{path}: expected a mapping at the top level")
    unknown = set(raw) - _KNOWN_KEYS
    if unknown:
        raise ConfigError(f"{path}: unknown keys {sorted(unknown)}")
    for key in ("source", "start", "end", "universe"):
        if key not in raw:
            raise ConfigError(f"{path}: missing required key {key!r}")

    base = path.parent

    def _resolve(p) -> Path:
        p = Path(str(p))
        return p if p.is_absolute() else base / p

    universe = raw["universe"]
    if not isinstance(universe, dict) or "file" not in universe or "size" not in universe:
        raise ConfigError(f"{path}: universe needs 'file' and 'size'")

    source = str(raw["source"])
    if not (source.startswith("http://") or source.startswith("https://")):
        source = str(_resolve(source))

    completeness = dict(COMPLETENESS_THRESHOLDS)
    for name, value in (raw.get("completeness") or {}).items():
        completeness[_as_freq(name, "completeness")] = float(value)

    seasonal = dict(DEFAULT_SEASONAL_PERIODS)
    for name, value in (raw.get("seasonal_periods") or {}).items():
        seasonal[_as_freq(name, "seasonal_periods")] = int(value)

    specs = default_specs()
    for name, entry in (raw.get("cutoffs") or {}).items():
        freq = _as_freq(name, "cutoffs")
        current = specs[freq]
        try:
            specs[freq] = CutoffSpec(
                freq=freq,
                horizon=int(entry.get("horizon", current.horizon)),
                max_context=int(entry.get("max_context", current.max_context)),
                first_cutoff=_as_ts(entry.get("first", current.first_cutoff), "cutoffs.first"),
            )
        except (TypeError, ValueError) as exc:
            raise ConfigError(f"{path}: bad cutoff spec for {name}: {exc}") from exc

    desc_raw = raw.get("descriptors") or {}
    descriptors = DescriptorParams(
        bandpower_split=float(desc_raw.get("bandpower_split", 0.125)),
        permutation_order=int(desc_raw.get("permutation_order", 3)),
        permutation_delay=int(desc_raw.get("permutation_delay", 1)),
    )

    levels = raw.get("quantile_levels")
    quantiles = tuple(float(q) for q in levels) if levels else QUANTILE_LEVELS

    cfg = RunConfig(
        source=source,
        start=_as_ts(raw["start"], "start"),
        end=_as_ts(raw["end"], "end"),
        universe_file=_resolve(universe["file"]),
        universe_size=int(universe["size"]),
        data_root=_resolve(raw.get("data_root", "data")),
        models=tuple(raw.get("models") or BUILTIN_MODELS),
        workers=int(raw.get("workers", 4)),
        exclude_bots=bool(raw.get("exclude_bots", False)),
        completeness=completeness,
        quantile_levels=quantiles,
        seasonal_periods=seasonal,
        strata_count=int(raw.get("strata", 3)),
        descriptors=descriptors,
        cutoffs=specs,
    )
    cfg.validate()
    return cfg
