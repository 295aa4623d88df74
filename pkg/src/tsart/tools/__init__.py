"""The 21 built-in analytical tools as pure functions on TimeSeries."""

from tsart.tools._common import ToolError
from tsart.tools.models import anomaly_detection, forecaster
from tsart.tools.numeric import (
    autocorr,
    datapoint_value,
    quantile_value,
    return_calc,
    rolling_stat,
    series_info,
    summary_stats,
    volatility,
)
from tsart.tools.pattern import (
    ChangePointSpec,
    change_point_detector,
    noise_profile,
    seasonality_detector,
    spike_detector,
    stationarity_test,
    trend_classifier,
)
from tsart.tools.relation import (
    channel_correlation,
    cross_correlation,
    dtw_distance,
    granger_causality,
    shape_similarity,
)

__all__ = [
    "ChangePointSpec",
    "ToolError",
    "anomaly_detection",
    "autocorr",
    "change_point_detector",
    "channel_correlation",
    "cross_correlation",
    "datapoint_value",
    "dtw_distance",
    "forecaster",
    "granger_causality",
    "noise_profile",
    "quantile_value",
    "return_calc",
    "rolling_stat",
    "seasonality_detector",
    "series_info",
    "shape_similarity",
    "spike_detector",
    "stationarity_test",
    "summary_stats",
    "trend_classifier",
    "volatility",
]
