"""File-protocol bridge between the benchmark engine and external forecasters.

The engine publishes jobs and accepts forecasts as NDJSON files; this package
turns any callable that maps (context, horizon, quantile levels) to a matrix
into a conformant forecast file, sorting each step's quantiles so the engine's
strict validation never sees a crossing.
"""

from .core import AdapterResult, ForecasterPlugin, load_plugin, run_adapter

__all__ = [
    "AdapterResult",
    "ForecasterPlugin",
    "load_plugin",
    "run_adapter",
]
