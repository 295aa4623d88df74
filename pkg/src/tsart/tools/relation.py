"""Correlation analyzers over channel pairs.

Lag convention: at lag ``L`` channel_1 at time ``t`` is paired with
channel_2 at time ``t + L``, so a positive best lag means channel_2 follows
channel_1 by ``L`` samples.
"""

from __future__ import annotations

import numpy as np

from tsart import _stats
from tsart.config import DEFAULT_TOOLKIT, ToolkitConfig
from tsart.series import TimeSeries
from tsart.tools._common import (
    ToolError,
    num,
    pearson,
    require_complete,
    require_int,
    resolve_channel,
)


def average_ranks(x: np.ndarray) -> np.ndarray:
    order = np.argsort(x, kind="mergesort")
    ranks = np.empty(len(x), dtype=float)
    sorted_x = x[order]
    i = 0
    while i < len(x):
        j = i
        while j + 1 < len(x) and sorted_x[j + 1] == sorted_x[i]:
            j += 1
        ranks[order[i : j + 1]] = (i + j) / 2.0 + 1.0
        i = j + 1
    return ranks


def lagged_overlap(a: np.ndarray, b: np.ndarray, lag: int) -> tuple[np.ndarray, np.ndarray]:
    n = len(a)
    if lag >= 0:
        return a[: n - lag], b[lag:]
    return a[-lag:], b[: n + lag]


def correlate(a: np.ndarray, b: np.ndarray, lag: int = 0, method: str = "pearson") -> float:
    x, y = lagged_overlap(a, b, lag)
    if len(x) < 3:
        raise ToolError(f"overlap of {len(x)} points at lag {lag} is too short (need 3)")
    if method == "spearman":
        x, y = average_ranks(x), average_ranks(y)
    return pearson(x, y)


def _method(method: str) -> str:
    m = str(method).strip().lower()
    if m not in ("pearson", "spearman"):
        raise ToolError(f"unknown correlation method {method!r}; expected pearson or spearman")
    return m


def _pair(series: TimeSeries, channel_1, channel_2) -> tuple[int, int, np.ndarray, np.ndarray]:
    i = resolve_channel(series, channel_1, "channel_1")
    j = resolve_channel(series, channel_2, "channel_2")
    a = require_complete(series.channel(i), f"channel_{i}")
    b = require_complete(series.channel(j), f"channel_{j}")
    return i, j, a, b


def channel_correlation(series: TimeSeries, channel_1, channel_2, lag=0, method="pearson") -> dict:
    method = _method(method)
    lag = require_int(lag, "lag")
    if abs(lag) >= series.length:
        raise ToolError(f"|lag| must be smaller than the series length {series.length}")
    i, j, a, b = _pair(series, channel_1, channel_2)
    return {
        "channel_1": i,
        "channel_2": j,
        "lag": lag,
        "method": method,
        "correlation": num(correlate(a, b, lag, method)),
    }


def best_lag(per_lag: dict[int, float]) -> int:
    # largest coefficient; ties go to smaller |lag|, then to the negative lag
    return min(per_lag, key=lambda lag: (-per_lag[lag], abs(lag), lag))


def cross_correlation(series: TimeSeries, channel_1, channel_2, max_lag) -> dict:
    max_lag = require_int(max_lag, "max_lag", minimum=0)
    if not max_lag < series.length / 2:
        raise ToolError(f"max_lag must be smaller than half the series length ({series.length / 2})")
    i, j, a, b = _pair(series, channel_1, channel_2)
    coeffs = {lag: correlate(a, b, lag) for lag in range(-max_lag, max_lag + 1)}
    chosen = best_lag(coeffs)
    return {
        "channel_1": i,
        "channel_2": j,
        "per_lag": [{"lag": lag, "correlation": num(r)} for lag, r in coeffs.items()],
        "best_lag": chosen,
        "correlation": num(coeffs[chosen]),
    }


def dtw(a, b, metric: str = "abs") -> float:
    """Full-window DTW; ``squared`` sums squared costs without a final root."""
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    n, m = len(a), len(b)
    if n == 0 or m == 0:
        raise ToolError("DTW needs two non-empty sequences")
    diff = a[:, None] - b[None, :]
    cost = np.abs(diff) if metric == "abs" else diff * diff
    acc = np.full((n + 1, m + 1), np.inf)
    acc[0, 0] = 0.0
    for i in range(1, n + 1):
        for j in range(1, m + 1):
            acc[i, j] = cost[i - 1, j - 1] + min(acc[i - 1, j], acc[i, j - 1], acc[i - 1, j - 1])
    return float(acc[n, m])


def dtw_distance(series: TimeSeries, channel_1, channel_2, distance_metric="abs") -> dict:
    metric = str(distance_metric).strip().lower()
    if metric in ("absolute", "l1", "manhattan"):
        metric = "abs"
    if metric in ("sq", "square", "euclidean", "l2"):
        metric = "squared"
    if metric not in ("abs", "squared"):
        raise ToolError(f"unknown distance_metric {distance_metric!r}; expected abs or squared")
    i, j, a, b = _pair(series, channel_1, channel_2)
    return {
        "channel_1": i,
        "channel_2": j,
        "distance_metric": metric,
        "dtw_distance": num(dtw(a, b, metric)),
    }


def normalize(x: np.ndarray, norm: str) -> np.ndarray:
    if norm == "zscore":
        sd = float(np.std(x))
        if sd == 0.0:
            raise ToolError("shape similarity undefined for a constant channel")
        return (x - x.mean()) / sd
    lo, hi = float(x.min()), float(x.max())
    if hi == lo:
        raise ToolError("shape similarity undefined for a constant channel")
    return (x - lo) / (hi - lo)


def shape_similarity(series: TimeSeries, channel_1, channel_2, norm="zscore") -> dict:
    norm = str(norm).strip().lower()
    if norm not in ("zscore", "minmax"):
        raise ToolError(f"unknown norm {norm!r}; expected zscore or minmax")
    i, j, a, b = _pair(series, channel_1, channel_2)
    r = pearson(normalize(a, norm), normalize(b, norm))
    return {
        "channel_1": i,
        "channel_2": j,
        "norm": norm,
        "correlation": num(max(-1.0, min(1.0, r))),
    }


def lag_matrix(x: np.ndarray, max_lag: int) -> np.ndarray:
    """Columns x_{t-1} .. x_{t-max_lag} for t = max_lag .. T-1."""
    n = len(x)
    return np.column_stack([x[max_lag - k : n - k] for k in range(1, max_lag + 1)])


def granger_test(cause: np.ndarray, effect: np.ndarray, max_lag: int) -> tuple[float, float, int, int]:
    """Returns (F, p, df_num, df_den)."""
    target = effect[max_lag:]
    n = len(target)
    ones = np.ones((n, 1))
    restricted = np.hstack([ones, lag_matrix(effect, max_lag)])
    full = np.hstack([restricted, lag_matrix(cause, max_lag)])
    try:
        _, res_r = _stats.ols(restricted, target)
        _, res_u = _stats.ols(full, target)
    except _stats.SingularDesignError:
        raise ToolError("singular design matrix in Granger regression") from None
    sse_r, sse_u = float(res_r @ res_r), float(res_u @ res_u)
    df_den = n - 2 * max_lag - 1
    if sse_u == 0.0:
        raise ToolError("singular design matrix in Granger regression (perfect fit)")
    f = ((sse_r - sse_u) / max_lag) / (sse_u / df_den)
    return f, _stats.f_sf(f, max_lag, df_den), max_lag, df_den


def granger_causality(
    series: TimeSeries,
    cause_channel,
    effect_channel,
    max_lag,
    config: ToolkitConfig = DEFAULT_TOOLKIT,
) -> dict:
    max_lag = require_int(max_lag, "max_lag", minimum=1)
    if series.length < 4 * max_lag + 8:
        raise ToolError(
            f"series of length {series.length} too short for max_lag {max_lag} "
            f"(need {4 * max_lag + 8})"
        )
    i, j, cause, effect = _pair(series, cause_channel, effect_channel)
    f, p, d1, d2 = granger_test(cause, effect, max_lag)
    return {
        "cause_channel": i,
        "effect_channel": j,
        "max_lag": max_lag,
        "f_statistic": num(f),
        "p_value": num(p),
        "df": [d1, d2],
        "causal": bool(p < config.granger_alpha),
    }
