"""Live forecasting benchmark over GitHub event-stream activity.

The engine ingests hourly event archives, rolls them up into a multi-frequency
panel of per-repository counts, emits leak-proof rolling-origin forecast jobs,
runs the built-in baselines, scores submitted quantile forecasts, and publishes
a hierarchical leaderboard plus spectral summaries of the underlying series.
"""

__version__ = "0.1.0"
