from __future__ import annotations

import math

import numpy as np

from tsart.series import SeriesError, TimeSeries


class ToolError(ValueError):
    """A tool rejected its inputs; the message is shown to the agent."""


def channel_key(c: int) -> str:
    return f"channel_{c}"


def per_channel(series: TimeSeries, fn) -> dict:
    return {channel_key(c): fn(series.channel(c)) for c in range(series.channels)}


def num(x) -> float | None:
    """Native float for payloads; non-finite values become None."""
    x = float(x)
    return x if math.isfinite(x) else None


def require_int(value, name: str, minimum: int | None = None) -> int:
    if isinstance(value, bool) or not isinstance(value, (int, np.integer)):
        if isinstance(value, float) and value.is_integer():
            value = int(value)
        else:
            raise ToolError(f"{name} must be an integer, got {value!r}")
    value = int(value)
    if minimum is not None and value < minimum:
        raise ToolError(f"{name} must be >= {minimum}, got {value}")
    return value


def require_complete(values: np.ndarray, what: str) -> np.ndarray:
    if np.isnan(values).any():
        raise ToolError(f"missing data in {what}")
    return values


def resolve_channel(series: TimeSeries, ref, name: str = "channel") -> int:
    """Accept ``2``, ``"2"``, ``"channel_2"`` or a declared channel name."""
    if isinstance(ref, str):
        text = ref.strip()
        if series.channel_names and text in series.channel_names:
            return series.channel_names.index(text)
        if text.startswith("channel_"):
            text = text[len("channel_"):]
        try:
            ref = int(text)
        except ValueError:
            raise ToolError(f"unknown {name} {ref!r}") from None
    idx = require_int(ref, name)
    if not 0 <= idx < series.channels:
        raise ToolError(f"{name} {idx} out of range [0, {series.channels})")
    return idx


def pearson(x: np.ndarray, y: np.ndarray) -> float:
    dx = x - x.mean()
    dy = y - y.mean()
    denom = math.sqrt(float(dx @ dx) * float(dy @ dy))
    if denom == 0.0:
        raise ToolError("correlation undefined for a constant segment")
    return float(dx @ dy) / denom


def ols_slope(y: np.ndarray) -> float:
    n = len(y)
    if n < 2:
        return 0.0
    t = np.arange(n, dtype=float)
    t -= t.mean()
    return float(t @ (y - y.mean())) / float(t @ t)


def segments(length: int, window: int | None) -> list[tuple[int, int]]:
    """Consecutive non-overlapping ``[s, s + window)`` segments with a short tail."""
    if window is None:
        return [(0, length)]
    return [(s, min(s + window, length)) for s in range(0, length, window)]


__all__ = [
    "SeriesError",
    "ToolError",
    "channel_key",
    "num",
    "ols_slope",
    "pearson",
    "per_channel",
    "require_complete",
    "require_int",
    "resolve_channel",
    "segments",
]
