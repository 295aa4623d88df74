"""Forecasting and anomaly-detection tools.

Both are deterministic classical baselines standing in for pretrained
zero-shot models: a seasonal-naive/drift forecaster and a leave-one-out
moving-average reconstruction scorer.
"""

from __future__ import annotations

import math

import numpy as np

from tsart.config import DEFAULT_TOOLKIT, ToolkitConfig
from tsart.series import TimeSeries
from tsart.tools._common import ToolError, channel_key, num, ols_slope, require_complete, require_int
from tsart.tools.pattern import detect_season


def forecast_channel(
    y: np.ndarray, horizon: int, config: ToolkitConfig = DEFAULT_TOOLKIT
) -> np.ndarray:
    n = len(y)
    season = detect_season(y, n // 2, config)
    p = season["period"]
    steps = np.arange(1, horizon + 1)
    if season["strength"] == "strong":
        last, prev = y[n - p :], y[n - 2 * p : n - p]
        drift = (last.mean() - prev.mean()) / p
        # same phase in the last observed season, lifted by the drift accrued since
        cycles = (steps - 1) // p + 1
        base = last[(steps - 1) % p]
        return base + drift * p * cycles
    fit_len = min(n, 4 * max(p or 0, 8))
    tail = y[n - fit_len :]
    slope = ols_slope(tail)
    t_mid = (fit_len - 1) / 2.0
    level_at_end = tail.mean() + slope * (fit_len - 1 - t_mid)
    return level_at_end + slope * steps


def forecaster(series: TimeSeries, forecast_horizon, config: ToolkitConfig = DEFAULT_TOOLKIT) -> dict:
    horizon = require_int(forecast_horizon, "forecast_horizon", minimum=1)
    if series.length < 8:
        raise ToolError(f"forecaster needs at least 8 points, got {series.length}")
    if horizon > 4 * series.length:
        raise ToolError(
            f"forecast_horizon {horizon} exceeds 4x the series length ({4 * series.length})"
        )
    forecasts = {}
    for c in range(series.channels):
        y = require_complete(series.channel(c), channel_key(c))
        forecasts[channel_key(c)] = [num(v) for v in forecast_channel(y, horizon, config)]
    return {"forecast_horizon": horizon, "forecasts": forecasts}


def reconstruction_scores(x: np.ndarray, half_window: int = 2) -> np.ndarray:
    """Squared error against the centred moving average of the neighbours.

    The scored point is excluded from its own window and edge windows shrink.
    """
    n = len(x)
    scores = np.empty(n)
    for t in range(n):
        lo, hi = max(0, t - half_window), min(n, t + half_window + 1)
        neighbours = np.concatenate([x[lo:t], x[t + 1 : hi]])
        recon = neighbours.mean()
        scores[t] = (x[t] - recon) ** 2
    return scores


def selection_count(threshold: float, length: int) -> int:
    count = math.ceil(threshold * length) if threshold < 1 else math.floor(threshold)
    return min(length, count)


def top_indices(scores: np.ndarray, count: int) -> list[int]:
    order = sorted(range(len(scores)), key=lambda i: (-scores[i], i))
    return order[:count]


def anomaly_detection(series: TimeSeries, anomaly_threshold) -> dict:
    try:
        threshold = float(anomaly_threshold)
    except (TypeError, ValueError):
        raise ToolError(f"anomaly_threshold must be a number, got {anomaly_threshold!r}") from None
    if not threshold > 0 or not math.isfinite(threshold):
        raise ToolError(f"anomaly_threshold must be positive, got {anomaly_threshold}")
    if series.length < 8:
        raise ToolError(f"anomaly detection needs at least 8 points, got {series.length}")
    count = selection_count(threshold, series.length)
    scores, selected = {}, {}
    for c in range(series.channels):
        x = require_complete(series.channel(c), channel_key(c))
        s = reconstruction_scores(x)
        scores[channel_key(c)] = [num(v) for v in s]
        selected[channel_key(c)] = top_indices(s, count)
    return {"anomaly_threshold": threshold, "anomaly_scores": scores, "selected_indices": selected}
