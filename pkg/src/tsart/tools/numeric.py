"""Numerical operators: metadata, point lookups, summary and rolling statistics.

Every function returns a JSON-ready payload with per-channel maps keyed
``channel_0``, ``channel_1``, ...
"""

from __future__ import annotations

import numpy as np

from tsart.series import Range, SeriesError, TimeSeries
from tsart.tools._common import (
    ToolError,
    channel_key,
    num,
    require_complete,
    require_int,
)

STATS = ("mean", "sum", "max", "min", "std")

_STAT_FUNCS = {
    "mean": np.mean,
    "sum": np.sum,
    "max": np.max,
    "min": np.min,
    # population std (divide by n)
    "std": np.std,
}


def _stat_kind(stat: str) -> str:
    kind = str(stat).strip().lower()
    if kind not in _STAT_FUNCS:
        raise ToolError(f"unknown statistic {stat!r}; expected one of {', '.join(STATS)}")
    return kind


def compute_stat(values: np.ndarray, stat: str) -> float:
    return float(_STAT_FUNCS[_stat_kind(stat)](values))


def series_info(series: TimeSeries) -> dict:
    by_channel = series.missing_mask.sum(axis=0)
    info = {
        "length": series.length,
        "channels": series.channels,
        "missing_count": int(by_channel.sum()),
        "missing_by_channel": {channel_key(c): int(n) for c, n in enumerate(by_channel)},
    }
    if series.channel_names is not None:
        info["channel_names"] = list(series.channel_names)
    if series.timestamps is not None:
        info["start"] = series.timestamps[0].isoformat()
        info["end"] = series.timestamps[-1].isoformat()
    return info


def datapoint_value(series: TimeSeries, index_or_timestamp) -> dict:
    try:
        idx = series.resolve_index(index_or_timestamp)
    except SeriesError as exc:
        raise ToolError(str(exc)) from None
    out = {
        "index": idx,
        "values": {channel_key(c): num(v) for c, v in enumerate(series.values[idx])},
    }
    if series.timestamps is not None:
        out["timestamp"] = series.timestamps[idx].isoformat()
    return out


def summary_stats(series: TimeSeries, start, end, stat: str) -> dict:
    kind = _stat_kind(stat)
    try:
        rng = Range(require_int(start, "start"), require_int(end, "end")).check(series.length)
    except SeriesError:
        raise ToolError(
            f"invalid range [{start}, {end}) for series of length {series.length}"
        ) from None
    block = require_complete(series.values[rng.start : rng.end], f"range [{rng.start}, {rng.end})")
    return {
        "range": {"start": rng.start, "end": rng.end},
        "statistic": kind,
        "results": {
            channel_key(c): num(compute_stat(block[:, c], kind)) for c in range(series.channels)
        },
    }


def return_calc(series: TimeSeries, t1, t2, kind: str = "pct") -> dict:
    kind = str(kind).strip().lower()
    if kind not in ("pct", "diff"):
        raise ToolError(f"unknown return kind {kind!r}; expected 'pct' or 'diff'")
    try:
        i1, i2 = series.resolve_index(t1), series.resolve_index(t2)
    except SeriesError as exc:
        raise ToolError(str(exc)) from None
    results = {}
    for c in range(series.channels):
        a, b = series.values[i1, c], series.values[i2, c]
        if np.isnan(a) or np.isnan(b):
            raise ToolError(f"missing data at index {i1 if np.isnan(a) else i2}")
        if kind == "diff":
            results[channel_key(c)] = num(b - a)
        else:
            if a == 0:
                raise ToolError(f"percentage return undefined: value at t1={i1} is zero")
            results[channel_key(c)] = num((b - a) / a)
    return {"t1": i1, "t2": i2, "kind": kind, "results": results}


def acf_value(x: np.ndarray, lag: int) -> float:
    d = x - x.mean()
    denom = float(d @ d)
    if denom == 0.0:
        raise ToolError("autocorrelation undefined for a constant series")
    return float(d[lag:] @ d[: len(d) - lag]) / denom


def autocorr(series: TimeSeries, lag) -> dict:
    lag = require_int(lag, "lag", minimum=0)
    if lag >= series.length:
        raise ToolError(f"lag {lag} must be smaller than the series length {series.length}")
    results = {}
    for c in range(series.channels):
        x = require_complete(series.channel(c), channel_key(c))
        results[channel_key(c)] = num(acf_value(x, lag))
    return {"lag": lag, "results": results}


def _windows(length: int, window: int, step: int) -> range:
    return range(0, length - window + 1, step)


def rolling_stat(series: TimeSeries, stat: str, window, step=1) -> dict:
    kind = _stat_kind(stat)
    window = require_int(window, "window", minimum=1)
    step = require_int(step, "step", minimum=1)
    if window > series.length:
        raise ToolError(f"window {window} exceeds series length {series.length}")
    results = {}
    for c in range(series.channels):
        x = series.channel(c)
        rows = []
        for i in _windows(series.length, window, step):
            block = require_complete(x[i : i + window], f"window [{i}, {i + window})")
            rows.append(
                {"window_start": i, "window_end": i + window, kind: num(compute_stat(block, kind))}
            )
        results[channel_key(c)] = rows
    return {"statistic": kind, "window_size": window, "step_size": step, "rolling_results": results}


def quantile_value(series: TimeSeries, q) -> dict:
    try:
        q = float(q)
    except (TypeError, ValueError):
        raise ToolError(f"q must be a number, got {q!r}") from None
    if not 0.0 <= q <= 1.0:
        raise ToolError(f"q must lie in [0, 1], got {q}")
    results = {}
    for c in range(series.channels):
        x = require_complete(series.channel(c), channel_key(c))
        # linear interpolation between order statistics at q * (n - 1)
        results[channel_key(c)] = num(np.quantile(x, q, method="linear"))
    return {"q": q, "results": results}


def volatility(series: TimeSeries, window) -> dict:
    """Rolling population std of first differences; bounds index the difference series."""
    window = require_int(window, "window", minimum=2)
    if series.length < window + 1:
        raise ToolError(
            f"series too short: volatility with window {window} needs at least {window + 1} points"
        )
    results = {}
    for c in range(series.channels):
        diffs = np.diff(series.channel(c))
        rows = []
        for i in _windows(len(diffs), window, 1):
            block = require_complete(diffs[i : i + window], f"difference window [{i}, {i + window})")
            rows.append(
                {"window_start": i, "window_end": i + window, "volatility": num(np.std(block))}
            )
        results[channel_key(c)] = rows
    return {"window_size": window, "volatility_results": results}
