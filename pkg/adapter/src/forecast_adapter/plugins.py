"""Reference plugins: trivial forecasters useful for wiring and smoke tests.

Real model wrappers (statistical packages, foundation models) follow the same
shape: close over whatever client or library they need and return one row of
quantiles per step. Nothing here is a dependency of the engine.
"""

from __future__ import annotations

from .core import ForecasterPlugin


def _zero_predict(context, horizon, levels):
    return [[0.0] * len(levels) for _ in range(horizon)]


def _last_value_predict(context, horizon, levels):
    last = float(context[-1])
    return [[last] * len(levels) for _ in range(horizon)]


#: Always predicts zero; its output matches the engine's own zero reference.
zero = ForecasterPlugin(name="ZeroModel", predict=_zero_predict)

#: Carries the final context value flat across the horizon and the levels.
last_value = ForecasterPlugin(name="LastValue", predict=_last_value_predict)
