import json

import numpy as np
import pytest
from hypothesis import HealthCheck, given, settings
from hypothesis import strategies as st

from conftest import ts
from reference_samples import SAMPLE2, SAMPLE2_MEANS
from tsart.registry import (
    MissingParam,
    Param,
    ToolCall,
    ToolResult,
    ToolSchema,
    UnknownTool,
    default_registry,
)
from tsart.series import TimeSeries

FRAGMENTS = {
    "series_info": "Retrieves basic metadata of the time series",
    "datapoint_value": "values of all channels at a given time index or timestamp",
    "summary_stats": "over a defined index range [start, end)",
    "return_calc": "percentage return (pct) or absolute difference (diff)",
    "autocorr": "autocorrelation coefficient for each channel at a specified time lag",
    "rolling_stat": "using a sliding window across the time series",
    "quantile_value": "empirical value at a specific quantile level",
    "volatility": "standard deviation of first differences",
    "trend_classifier": "supports global analysis or window-based segment analysis",
    "seasonality_detector": "returns estimated period with seasonality strength",
    "change_point_detector": "Detects structural breaks (change points)",
    "noise_profile": "based on autocorrelation tests",
    "stationarity_test": "Augmented Dickey-Fuller or KPSS methods",
    "spike_detector": "based on amplitude threshold and minimum separation",
    "channel_correlation": "with an optional time lag",
    "cross_correlation": "find the optimal time alignment between two channels",
    "dtw_distance": "using Dynamic Time Warping (DTW)",
    "shape_similarity": "invariant to amplitude scaling",
    "granger_causality": "statistically predicts another (Granger causality)",
    "forecaster": "returns predicted values for all channels",
    "anomaly_detection": "based on reconstruction error (MSE)",
}


def test_catalogue(registry):
    assert len(registry) == 21
    assert registry.names()[0] == "series_info"
    assert set(registry.names()) == set(FRAGMENTS)
    assert registry.tool_names() == ", ".join(registry.names())
    assert len(registry.list_tools().splitlines()) == 21


@pytest.mark.parametrize("name", sorted(FRAGMENTS))
def test_descriptions_keep_fragments(registry, name):
    assert FRAGMENTS[name] in registry.schema(name).description


def test_custom_tool(registry):
    schema = ToolSchema("double_last", "Doubles the last value.", (Param("channel", "channel", required=False, default=0),))
    bigger = registry.with_tool(schema, lambda s, channel=0: {"value": 2 * float(s.channel(channel)[-1])})
    assert len(bigger) == 22 and len(registry) == 21
    res = bigger.dispatch(ts([1, 2, 3]), ToolCall("double_last"))
    assert res.payload == {"value": 6.0}


def test_validate_call(registry):
    ok = registry.validate_call(ToolCall("rolling_stat", {"stat": "mean", "window": 3, "step": 1}))
    assert ok.arguments == {"stat": "mean", "window": 3, "step": 1}
    with pytest.raises(UnknownTool):
        registry.validate_call(ToolCall("no_such_tool"))
    assert registry.validate_call(ToolCall("volatility", {"window": "5"})).arguments["window"] == 5
    with pytest.raises(MissingParam):
        registry.validate_call(ToolCall("volatility", {}))
    extra = registry.validate_call(ToolCall("volatility", {"window": 5, "colour": "red"}))
    assert "colour" not in extra.arguments and extra.warnings


def test_null_is_absent(registry):
    call = registry.validate_call(ToolCall("trend_classifier", {"window": None}))
    assert call.arguments.get("window") is None


def test_alias_and_brackets(registry):
    assert registry.resolve_name("[anomaly_detector]") == "anomaly_detection"
    assert registry.resolve_name("Rolling_Stat") == "rolling_stat"


def test_dispatch_sample2(registry):
    res = registry.dispatch(ts(SAMPLE2), ToolCall("rolling_stat", {"stat": "mean", "window": 3, "step": 1}))
    assert res.ok
    rows = res.payload["rolling_results"]["channel_0"]
    assert [r["mean"] for r in rows] == pytest.approx(SAMPLE2_MEANS, abs=1e-9)
    assert res.text().startswith("tool: [rolling_stat]\noutput: {")


def test_dispatch_errors_are_results(registry):
    s = ts(SAMPLE2)
    bad = registry.dispatch(s, ToolCall("summary_stats", {"start": 0, "end": 99, "stat": "mean"}))
    assert not bad.ok and "invalid range" in bad.error
    assert not registry.dispatch(s, ToolCall("anomaly_detection", {"anomaly_threshold": 0})).ok
    assert not registry.dispatch(s, ToolCall("nope")).ok
    assert bad.text().startswith("tool: [summary_stats]\nerror: ")


def test_tool_result_exclusive():
    with pytest.raises(ValueError):
        ToolResult("x")
    with pytest.raises(ValueError):
        ToolResult("x", payload={}, error="e")


values = st.one_of(
    st.none(), st.booleans(), st.integers(-50, 50), st.floats(allow_nan=True, allow_infinity=True),
    st.text(max_size=8), st.lists(st.integers(-3, 3), max_size=3),
)


@settings(max_examples=300, suppress_health_check=[HealthCheck.too_slow])
@given(
    st.sampled_from(sorted(FRAGMENTS) + ["bogus"]),
    st.dictionaries(st.sampled_from(["window", "lag", "stat", "start", "end", "q", "t1", "t2", "kind",
                                     "channel_1", "channel_2", "max_lag", "penalty_or_n_cp", "threshold",
                                     "min_sep", "forecast_horizon", "anomaly_threshold", "test",
                                     "index_or_timestamp", "max_period", "method", "norm",
                                     "distance_metric", "cause_channel", "effect_channel", "step"]),
                    values, max_size=5),
    st.integers(0, 2**16),
)
def test_dispatch_total_and_roundtrip(name, args, seed):
    registry = default_registry()
    y = np.random.default_rng(seed).normal(size=(40, 2)).cumsum(axis=0)
    res = registry.dispatch(TimeSeries(y), ToolCall(name, args))
    assert isinstance(res, ToolResult)
    if res.ok:
        text = res.text()
        payload = json.loads(text.split("output: ", 1)[1])
        assert payload == res.payload


@pytest.mark.parametrize("name", sorted(FRAGMENTS))
def test_example_calls_succeed(registry, name):
    y = np.random.default_rng(1).normal(size=(64, 2)).cumsum(axis=0)
    s = TimeSeries(y)
    res = registry.dispatch(s, registry.example_call(name, s))
    assert res.ok, res.error
