"""Pattern detectors: trend, seasonality, change points, noise colour,
stationarity and spikes."""

from __future__ import annotations

import math
import re
from dataclasses import dataclass
from statistics import NormalDist

import numpy as np

from tsart import _stats
from tsart.config import DEFAULT_TOOLKIT, ToolkitConfig
from tsart.series import TimeSeries
from tsart.tools._common import (
    ToolError,
    channel_key,
    num,
    ols_slope,
    require_complete,
    require_int,
    segments,
)
from tsart.tools.numeric import acf_value

TREND_LABELS = ("up", "down", "flat")


def _scope(window: int | None) -> str:
    return "global" if window is None else f"window={window}"


def trend_label(y: np.ndarray, flat_threshold: float = DEFAULT_TOOLKIT.flat_threshold) -> str:
    n = len(y)
    if n < 2:
        return "flat"
    slope = ols_slope(y)
    if abs(slope) * (n - 1) <= flat_threshold * float(np.std(y)):
        return "flat"
    return "up" if slope > 0 else "down"


def trend_classifier(
    series: TimeSeries, window=None, config: ToolkitConfig = DEFAULT_TOOLKIT
) -> dict:
    if window is not None:
        window = require_int(window, "window")
        if not 2 <= window <= series.length:
            raise ToolError(f"window must lie in [2, {series.length}], got {window}")
    rows = []
    for c in range(series.channels):
        y = require_complete(series.channel(c), channel_key(c))
        for s, e in segments(series.length, window):
            row = {"channel": c, "trend": trend_label(y[s:e], config.flat_threshold)}
            if window is not None:
                row["segment_start"], row["segment_end"] = s, e
            row["analysis_scope"] = _scope(window)
            rows.append(row)
    return {"trend_results": rows}


def _detrend(y: np.ndarray) -> np.ndarray:
    t = np.arange(len(y), dtype=float)
    slope = ols_slope(y)
    return y - (y.mean() + slope * (t - t.mean()))


def periodogram_power(d: np.ndarray, period: int) -> float:
    t = np.arange(len(d), dtype=float)
    phase = 2.0 * math.pi * t / period
    re_part = float(d @ np.cos(phase))
    im_part = float(d @ np.sin(phase))
    return (re_part * re_part + im_part * im_part) / len(d)


def seasonal_strength(d: np.ndarray, period: int) -> float:
    """1 - Var(residual after phase-mean removal) / Var(d), floored at 0."""
    var_d = float(np.var(d))
    if var_d == 0.0:
        return 0.0
    phase = np.arange(len(d)) % period
    means = np.bincount(phase, weights=d, minlength=period) / np.bincount(phase, minlength=period)
    resid = d - means[phase]
    return max(0.0, 1.0 - float(np.var(resid)) / var_d)


def adjusted_strength(d: np.ndarray, period: int) -> float:
    """Seasonal strength with residual and total variance scaled by their degrees of freedom."""
    n = len(d)
    if n <= period:
        return -math.inf
    return 1.0 - (1.0 - seasonal_strength(d, period)) * (n - 1) / (n - period)


def detect_season(
    y: np.ndarray, max_period: int, config: ToolkitConfig = DEFAULT_TOOLKIT
) -> dict:
    d = _detrend(y)
    var_y = float(np.var(y))
    if float(np.var(d)) <= 1e-12 * var_y or var_y == 0.0:
        return {"period": None, "strength": "weak", "strength_score": 0.0}
    candidates = range(2, max_period + 1)
    powers = [periodogram_power(d, p) for p in candidates]
    peak = candidates[int(np.argmax(powers))]
    # the peak can sit on a harmonic; prefer the multiple with the best dof-adjusted fit
    period, best = peak, -math.inf
    for p in range(peak, max_period + 1, peak):
        adj = adjusted_strength(d, p)
        if adj > best + 1e-9:
            period, best = p, adj
    score = seasonal_strength(d, period)
    return {
        "period": period,
        "strength": "strong" if score >= config.season_threshold else "weak",
        "strength_score": num(score),
    }


def seasonality_detector(
    series: TimeSeries, max_period=None, config: ToolkitConfig = DEFAULT_TOOLKIT
) -> dict:
    if max_period is None:
        max_period = series.length // 2
    max_period = require_int(max_period, "max_period")
    if max_period < 2:
        raise ToolError(f"max_period must be >= 2, got {max_period}")
    if series.length < 2 * max_period:
        raise ToolError(
            f"series of length {series.length} is shorter than 2 * max_period ({2 * max_period})"
        )
    results = {}
    for c in range(series.channels):
        y = require_complete(series.channel(c), channel_key(c))
        results[channel_key(c)] = detect_season(y, max_period, config)
    return {"max_period": max_period, "seasonality_results": results}


@dataclass(frozen=True)
class ChangePointSpec:
    mode: str  # "penalty" or "fixed_count"
    value: float

    def __post_init__(self) -> None:
        if self.mode not in ("penalty", "fixed_count"):
            raise ToolError(f"unknown change point mode {self.mode!r}")
        if not self.value > 0:
            raise ToolError(f"change point {self.mode} must be positive, got {self.value}")
        if self.mode == "fixed_count" and not float(self.value).is_integer():
            raise ToolError(f"change point count must be an integer, got {self.value}")

    @classmethod
    def parse(cls, raw) -> "ChangePointSpec":
        """Accept ``"n_cp=2"``, ``"penalty=3.5"``, an int (count) or a float (penalty)."""
        if isinstance(raw, ChangePointSpec):
            return raw
        if isinstance(raw, bool) or raw is None:
            raise ToolError(f"cannot interpret penalty_or_n_cp={raw!r}")
        if isinstance(raw, (int, np.integer)):
            return cls("fixed_count", int(raw))
        if isinstance(raw, float):
            return cls("penalty", raw)
        text = str(raw).strip().lower()
        m = re.fullmatch(r"(n_cp|n|penalty|pen)\s*[=:]\s*([-+0-9.eE]+)", text)
        try:
            if m:
                key, val = m.groups()
                if key in ("n_cp", "n"):
                    return cls("fixed_count", int(val))
                return cls("penalty", float(val))
            if re.fullmatch(r"[+]?\d+", text):
                return cls("fixed_count", int(text))
            return cls("penalty", float(text))
        except ValueError:
            raise ToolError(f"cannot interpret penalty_or_n_cp={raw!r}") from None


class _SegmentCost:
    """O(1) within-segment squared error around the segment mean."""

    def __init__(self, x: np.ndarray):
        centered = x - x.mean()
        self.s1 = np.concatenate([[0.0], np.cumsum(centered)])
        self.s2 = np.concatenate([[0.0], np.cumsum(centered * centered)])

    def __call__(self, i, j):
        n = j - i
        s = self.s1[j] - self.s1[i]
        return self.s2[j] - self.s2[i] - s * s / n

    def best_split(self, i: int, j: int) -> tuple[float, int] | None:
        if j - i < 2:
            return None
        splits = np.arange(i + 1, j)
        gains = self(i, j) - self(i, splits) - self(splits, j)
        k = int(np.argmax(gains))
        return float(gains[k]), int(splits[k])


def binary_segmentation(x: np.ndarray, spec: ChangePointSpec) -> list[int]:
    """Greedy binary segmentation; returns sorted interior split indices.

    Split ``s`` separates ``[.., s)`` from ``[s, ..)``. Each round applies the
    single best split over all current segments.
    """
    cost = _SegmentCost(x)
    bounds = [0, len(x)]
    limit = int(spec.value) if spec.mode == "fixed_count" else len(x) - 1
    found: list[int] = []
    cache: dict[tuple[int, int], tuple[float, int] | None] = {}
    while len(found) < limit:
        best = None
        for i, j in zip(bounds, bounds[1:]):
            if (i, j) not in cache:
                cache[(i, j)] = cost.best_split(i, j)
            cand = cache[(i, j)]
            if cand is not None and (best is None or cand[0] > best[0]):
                best = cand
        if best is None:
            break
        gain, split = best
        if spec.mode == "penalty" and gain <= spec.value:
            break
        found.append(split)
        bounds = sorted(bounds + [split])
    return sorted(found)


def change_point_detector(series: TimeSeries, penalty_or_n_cp) -> dict:
    spec = ChangePointSpec.parse(penalty_or_n_cp)
    if series.length < 4:
        raise ToolError(f"change point detection needs at least 4 points, got {series.length}")
    if spec.mode == "fixed_count" and spec.value >= series.length / 2:
        raise ToolError(
            f"n_cp={int(spec.value)} too large for a series of length {series.length}"
        )
    rows = []
    for c in range(series.channels):
        x = require_complete(series.channel(c), channel_key(c))
        rows.append({"channel": c, "change_point_indices": binary_segmentation(x, spec)})
    mode = "n_cp" if spec.mode == "fixed_count" else "penalty"
    value = int(spec.value) if spec.mode == "fixed_count" else float(spec.value)
    return {"mode": mode, "value": value, "change_point_results": rows}


def noise_label(x: np.ndarray, alpha: float = DEFAULT_TOOLKIT.noise_alpha) -> str:
    n = len(x)
    max_lag = min(20, n // 4)
    # Bonferroni-adjusted band so the family of tested lags has size alpha
    z = NormalDist().inv_cdf(1.0 - alpha / (2 * max_lag))
    band = z / math.sqrt(n)
    r = [acf_value(x, k) for k in range(1, max_lag + 1)]
    if all(abs(v) <= band for v in r):
        return "white"
    if r[0] > band and r[0] >= r[1] >= r[2] > 0:
        return "red"
    return "other"


def noise_profile(series: TimeSeries, window=None, config: ToolkitConfig = DEFAULT_TOOLKIT) -> dict:
    min_len = config.noise_min_length
    if window is not None:
        window = require_int(window, "window")
        if window < min_len:
            raise ToolError(f"segment too short: window must be >= {min_len}, got {window}")
    if series.length < min_len:
        raise ToolError(f"segment too short: need at least {min_len} points, got {series.length}")
    segs = segments(series.length, window)
    if len(segs) > 1 and segs[-1][1] - segs[-1][0] < min_len:
        # fold a short tail into the previous segment
        (s, _), (_, e) = segs[-2], segs[-1]
        segs = segs[:-2] + [(s, e)]
    rows = []
    for c in range(series.channels):
        x = require_complete(series.channel(c), channel_key(c))
        for s, e in segs:
            row = {"channel": c, "noise": noise_label(x[s:e], config.noise_alpha)}
            if window is not None:
                row["segment_start"], row["segment_end"] = s, e
            row["analysis_scope"] = _scope(window)
            rows.append(row)
    return {"noise_results": rows}


def adf_test(y: np.ndarray) -> dict:
    """ADF with constant; lag order chosen by BIC up to the Schwert bound."""
    n = len(y)
    max_lag = min(int(12.0 * (n / 100.0) ** 0.25), n // 3)
    dy = np.diff(y)

    def design(p: int, start: int):
        rows = np.arange(start, len(dy))
        cols = [np.ones(len(rows)), y[rows]] + [dy[rows - j] for j in range(1, p + 1)]
        return np.column_stack(cols), dy[rows]

    best_ic, used = math.inf, 0
    for p in range(max_lag + 1):
        X, target = design(p, max_lag)
        try:
            _, resid = _stats.ols(X, target)
        except _stats.SingularDesignError:
            continue
        m, k = X.shape
        ic = m * math.log(float(resid @ resid) / m) + k * math.log(m)
        if ic < best_ic:
            best_ic, used = ic, p
    X, target = design(used, used)
    try:
        stat = _stats.ols_tstat(X, target, column=1)
    except _stats.SingularDesignError:
        raise ToolError("ADF regression is singular") from None
    crit = _stats.adf_critical_value(X.shape[0], "5%")
    return {
        "status": "stationary" if stat < crit else "nonstationary",
        "statistic": num(stat),
        "critical_value": num(crit),
        "used_lags": used,
    }


def kpss_test(y: np.ndarray) -> dict:
    n = len(y)
    bandwidth = int(4.0 * (n / 100.0) ** 0.25)
    e = y - y.mean()
    partial = np.cumsum(e)
    long_run = float(e @ e)
    for j in range(1, bandwidth + 1):
        long_run += 2.0 * (1.0 - j / (bandwidth + 1.0)) * float(e[j:] @ e[:-j])
    long_run /= n
    stat = float(partial @ partial) / (n * n * long_run)
    crit = _stats.KPSS_CRITICAL_LEVEL["5%"]
    return {
        "status": "stationary" if stat < crit else "nonstationary",
        "statistic": num(stat),
        "critical_value": crit,
        "used_lags": bandwidth,
    }


def stationarity_test(series: TimeSeries, test: str = "adf") -> dict:
    kind = str(test).strip().lower()
    if kind not in ("adf", "kpss"):
        raise ToolError(f"unknown stationarity test {test!r}; expected 'adf' or 'kpss'")
    if series.length < 20:
        raise ToolError(f"stationarity test needs at least 20 points, got {series.length}")
    results = {}
    for c in range(series.channels):
        y = require_complete(series.channel(c), channel_key(c))
        if np.ptp(y) == 0.0:
            raise ToolError(f"stationarity test undefined for constant {channel_key(c)}")
        results[channel_key(c)] = adf_test(y) if kind == "adf" else kpss_test(y)
    return {"test": kind, "stationarity_results": results}


def rolling_median(x: np.ndarray, window: int = 5) -> np.ndarray:
    half = window // 2
    padded = np.pad(x, half, mode="edge")
    view = np.lib.stride_tricks.sliding_window_view(padded, window)
    return np.median(view, axis=1)


def find_spikes(x: np.ndarray, threshold: float, min_sep: int) -> list[dict]:
    resid = x - rolling_median(x, 5)
    scale = float(np.std(resid))
    if scale == 0.0:
        return []
    cand = np.flatnonzero(np.abs(resid) >= threshold * scale)
    order = sorted(cand, key=lambda i: (-abs(resid[i]), i))
    kept: list[int] = []
    for i in order:
        if all(abs(i - j) >= min_sep for j in kept):
            kept.append(int(i))
    return [
        {"index": i, "kind": "spike" if resid[i] > 0 else "dip", "magnitude": num(abs(resid[i]))}
        for i in sorted(kept)
    ]


def spike_detector(series: TimeSeries, threshold=3.0, min_sep=1) -> dict:
    try:
        threshold = float(threshold)
    except (TypeError, ValueError):
        raise ToolError(f"threshold must be a number, got {threshold!r}") from None
    if not threshold > 0:
        raise ToolError(f"threshold must be positive, got {threshold}")
    min_sep = require_int(min_sep, "min_sep", minimum=1)
    if series.length < 5:
        raise ToolError(f"spike detection needs at least 5 points, got {series.length}")
    results = {}
    for c in range(series.channels):
        x = require_complete(series.channel(c), channel_key(c))
        results[channel_key(c)] = find_spikes(x, threshold, min_sep)
    return {"threshold": threshold, "min_sep": min_sep, "spike_results": results}
