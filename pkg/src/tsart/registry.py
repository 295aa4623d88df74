"""Tool catalogue: schemas, argument validation, dispatch and observation text."""

from __future__ import annotations

import json
import logging
import re
from dataclasses import dataclass, field
from typing import Any, Callable, Mapping

from tsart import tools
from tsart.config import DEFAULT_TOOLKIT, ToolkitConfig
from tsart.series import TimeSeries

log = logging.getLogger(__name__)


class CallError(ValueError):
    pass


class UnknownTool(CallError):
    pass


class MissingParam(CallError):
    pass


class BadParamType(CallError):
    pass


_NO_DEFAULT = object()


@dataclass(frozen=True)
class Param:
    name: str
    kind: str  # int | number | str | channel | index | spec
    required: bool = True
    default: Any = _NO_DEFAULT
    choices: tuple[str, ...] = ()
    note: str = ""

    def signature(self) -> str:
        kind = "|".join(self.choices) if self.choices else self.kind
        return f"{self.name}: {kind}" + ("" if self.required else "?")


@dataclass(frozen=True)
class ToolSchema:
    name: str
    description: str
    params: tuple[Param, ...] = ()
    example: Callable[[TimeSeries], dict] | None = field(default=None, compare=False)

    def render(self) -> str:
        args = ", ".join(p.signature() for p in self.params)
        return f"{self.name}({args}): {self.description}"

    def param(self, name: str) -> Param | None:
        return next((p for p in self.params if p.name == name), None)


@dataclass(frozen=True)
class ToolCall:
    tool: str
    arguments: dict = field(default_factory=dict)
    warnings: tuple[str, ...] = ()

    def to_dict(self) -> dict:
        return {"tool": self.tool, "arguments": dict(self.arguments)}

    @classmethod
    def from_dict(cls, doc: Mapping) -> "ToolCall":
        return cls(str(doc["tool"]), dict(doc.get("arguments") or {}))


@dataclass(frozen=True)
class ToolResult:
    tool: str
    payload: dict | None = None
    error: str | None = None
    warnings: tuple[str, ...] = ()

    def __post_init__(self) -> None:
        if (self.payload is None) == (self.error is None):
            raise ValueError("ToolResult needs exactly one of payload or error")

    @property
    def ok(self) -> bool:
        return self.error is None

    def text(self) -> str:
        """Observation text as embedded in prompts and exported conversations."""
        if self.error is not None:
            return f"tool: [{self.tool}]\nerror: {self.error}"
        return f"tool: [{self.tool}]\noutput: {serialize(self.payload)}"

    def to_dict(self) -> dict:
        out: dict[str, Any] = {"tool": self.tool, "payload": self.payload, "error": self.error}
        if self.warnings:
            out["warnings"] = list(self.warnings)
        return out

    @classmethod
    def from_dict(cls, doc: Mapping) -> "ToolResult":
        return cls(
            str(doc["tool"]),
            payload=doc.get("payload"),
            error=doc.get("error"),
            warnings=tuple(doc.get("warnings") or ()),
        )


def serialize(payload: Any) -> str:
    """Single-line JSON; floats use the shortest round-trip repr."""
    return json.dumps(payload, allow_nan=False, ensure_ascii=False)


_INT_RE = re.compile(r"[+-]?\d+")


def _coerce(param: Param, value: Any) -> Any:
    kind = param.kind
    if isinstance(value, bool):
        raise BadParamType(f"{param.name}: booleans are not accepted")
    if kind in ("int", "number", "channel", "index", "spec") and isinstance(value, str):
        text = value.strip()
        if _INT_RE.fullmatch(text):
            value = int(text)
        elif kind in ("number", "int"):
            try:
                value = float(text)
            except ValueError:
                raise BadParamType(f"{param.name}: expected a number, got {value!r}") from None
    if kind == "int":
        if isinstance(value, float) and value.is_integer():
            value = int(value)
        if not isinstance(value, int):
            raise BadParamType(f"{param.name}: expected an integer, got {value!r}")
    elif kind == "number":
        if not isinstance(value, (int, float)):
            raise BadParamType(f"{param.name}: expected a number, got {value!r}")
    elif kind == "str":
        if not isinstance(value, str):
            raise BadParamType(f"{param.name}: expected a string, got {value!r}")
        if param.choices:
            value = value.strip().lower()
            if value not in param.choices:
                raise BadParamType(
                    f"{param.name}: expected one of {', '.join(param.choices)}, got {value!r}"
                )
    elif kind in ("channel", "index"):
        if isinstance(value, float) and value.is_integer():
            value = int(value)
        if not isinstance(value, (int, str)):
            raise BadParamType(f"{param.name}: expected an index, got {value!r}")
    elif kind == "spec":
        if not isinstance(value, (int, float, str)):
            raise BadParamType(f"{param.name}: expected a count, penalty or 'n_cp=K', got {value!r}")
    return value


def _normalize_name(name: str) -> str:
    return str(name).strip().strip("[]`'\" ").strip().lower()


class Registry:
    """Immutable tool catalogue. ``with_tool`` returns an extended copy."""

    def __init__(
        self,
        entries: tuple[tuple[ToolSchema, Callable[..., dict]], ...],
        aliases: Mapping[str, str] | None = None,
    ):
        names = [s.name for s, _ in entries]
        if len(set(names)) != len(names):
            raise ValueError("tool names must be unique")
        self._entries = tuple(entries)
        self._by_name = {s.name: (s, fn) for s, fn in entries}
        self._aliases = dict(aliases or {})

    def __len__(self) -> int:
        return len(self._entries)

    def __contains__(self, name: str) -> bool:
        return self.resolve_name(name) is not None

    @property
    def schemas(self) -> tuple[ToolSchema, ...]:
        return tuple(s for s, _ in self._entries)

    def names(self) -> list[str]:
        return [s.name for s, _ in self._entries]

    def schema(self, name: str) -> ToolSchema:
        resolved = self.resolve_name(name)
        if resolved is None:
            raise UnknownTool(f"unknown tool {name!r}")
        return self._by_name[resolved][0]

    def resolve_name(self, name: str) -> str | None:
        key = _normalize_name(name)
        key = self._aliases.get(key, key)
        return key if key in self._by_name else None

    def with_tool(self, schema: ToolSchema, fn: Callable[..., dict]) -> "Registry":
        return Registry(self._entries + ((schema, fn),), self._aliases)

    def list_tools(self) -> str:
        return "\n".join(s.render() for s in self.schemas)

    def tool_names(self) -> str:
        return ", ".join(self.names())

    def example_call(self, name: str, series: TimeSeries) -> ToolCall:
        schema = self.schema(name)
        args = schema.example(series) if schema.example else {}
        return ToolCall(schema.name, args)

    def validate_call(self, call: ToolCall) -> ToolCall:
        name = self.resolve_name(call.tool)
        if name is None:
            raise UnknownTool(f"unknown tool {call.tool!r}; available: {self.tool_names()}")
        schema = self._by_name[name][0]
        warnings = list(call.warnings)
        args: dict[str, Any] = {}
        supplied = {k: v for k, v in (call.arguments or {}).items() if v is not None}
        for key, value in supplied.items():
            param = schema.param(key)
            if param is None:
                warnings.append(f"dropped unexpected argument {key!r}")
                continue
            args[key] = _coerce(param, value)
        for param in schema.params:
            if param.name not in args:
                if param.required:
                    raise MissingParam(f"{name}: missing required argument {param.name!r}")
                if param.default is not _NO_DEFAULT:
                    args[param.name] = param.default
        return ToolCall(name, args, tuple(warnings))

    def dispatch(self, series: TimeSeries, call: ToolCall) -> ToolResult:
        """Validate and run a call. Never raises; failures become error results."""
        label = _normalize_name(call.tool) or str(call.tool)
        try:
            valid = self.validate_call(call)
        except CallError as exc:
            return ToolResult(label, error=str(exc), warnings=call.warnings)
        fn = self._by_name[valid.tool][1]
        for w in valid.warnings:
            log.warning("%s: %s", valid.tool, w)
        try:
            payload = fn(series, **valid.arguments)
            serialize(payload)
        except (ValueError, TypeError, ArithmeticError) as exc:
            return ToolResult(valid.tool, error=str(exc), warnings=valid.warnings)
        except Exception as exc:  # noqa: BLE001 - tool faults must not reach the agent loop
            log.exception("tool %s crashed", valid.tool)
            return ToolResult(
                valid.tool, error=f"internal error: {type(exc).__name__}: {exc}", warnings=valid.warnings
            )
        return ToolResult(valid.tool, payload=payload, warnings=valid.warnings)


def _second(series: TimeSeries) -> int:
    return min(1, series.channels - 1)


def _builtin_schemas() -> list[ToolSchema]:
    stat = ("mean", "sum", "max", "min", "std")
    ch = lambda name: Param(name, "channel")  # noqa: E731
    return [
        ToolSchema(
            "series_info",
            "Retrieves basic metadata of the time series: length T, channel count C "
            "and missing-value counts per channel.",
            (),
            lambda s: {},
        ),
        ToolSchema(
            "datapoint_value",
            "Returns the values of all channels at a given time index or timestamp "
            "(0-based index, or an exact ISO-8601 timestamp when the series has them).",
            (Param("index_or_timestamp", "index"),),
            lambda s: {"index_or_timestamp": s.length - 1},
        ),
        ToolSchema(
            "summary_stats",
            "Computes one statistic (mean, sum, max, min, std) per channel over a defined "
            "index range [start, end). std is the population standard deviation.",
            (Param("start", "int"), Param("end", "int"), Param("stat", "str", choices=stat)),
            lambda s: {"start": 0, "end": s.length, "stat": "mean"},
        ),
        ToolSchema(
            "return_calc",
            "Computes the percentage return (pct) or absolute difference (diff) between "
            "the values at indices t1 and t2, per channel.",
            (
                Param("t1", "index"),
                Param("t2", "index"),
                Param("kind", "str", required=False, default="pct", choices=("pct", "diff")),
            ),
            lambda s: {"t1": 0, "t2": s.length - 1, "kind": "diff"},
        ),
        ToolSchema(
            "autocorr",
            "Computes the autocorrelation coefficient for each channel at a specified time lag.",
            (Param("lag", "int"),),
            lambda s: {"lag": 1},
        ),
        ToolSchema(
            "rolling_stat",
            "Computes a rolling statistic (mean, sum, max, min, std) using a sliding window "
            "across the time series; windows [i, i+window) advance by step.",
            (
                Param("stat", "str", choices=stat),
                Param("window", "int"),
                Param("step", "int", required=False, default=1),
            ),
            lambda s: {"stat": "mean", "window": min(5, s.length), "step": 1},
        ),
        ToolSchema(
            "quantile_value",
            "Returns the empirical value at a specific quantile level q in [0, 1] for each "
            "channel (q=0.5 is the median), interpolating linearly between order statistics.",
            (Param("q", "number"),),
            lambda s: {"q": 0.5},
        ),
        ToolSchema(
            "volatility",
            "Computes rolling volatility, the standard deviation of first differences, "
            "over windows of the given size.",
            (Param("window", "int"),),
            lambda s: {"window": max(2, min(5, s.length - 1))},
        ),
        ToolSchema(
            "trend_classifier",
            "Labels the trend as up, down or flat; supports global analysis or window-based "
            "segment analysis (omit window for global).",
            (Param("window", "int", required=False),),
            lambda s: {},
        ),
        ToolSchema(
            "seasonality_detector",
            "Detects periodic structure and returns estimated period with seasonality "
            "strength (strong or weak), searching periods 2..max_period.",
            (Param("max_period", "int", required=False),),
            lambda s: {},
        ),
        ToolSchema(
            "change_point_detector",
            "Detects structural breaks (change points) in the mean by binary segmentation "
            "and returns their indices. Pass 'n_cp=K' for K breaks or 'penalty=V'.",
            (Param("penalty_or_n_cp", "spec"),),
            lambda s: {"penalty_or_n_cp": "n_cp=1"},
        ),
        ToolSchema(
            "noise_profile",
            "Labels the noise type (white, red or other) based on autocorrelation tests, "
            "globally or per window of at least 16 points.",
            (Param("window", "int", required=False),),
            lambda s: {},
        ),
        ToolSchema(
            "stationarity_test",
            "Tests stationarity with the Augmented Dickey-Fuller or KPSS methods and returns "
            "the status (stationary/nonstationary) with the test statistic.",
            (Param("test", "str", required=False, default="adf", choices=("adf", "kpss")),),
            lambda s: {"test": "adf"},
        ),
        ToolSchema(
            "spike_detector",
            "Finds spikes and dips relative to a rolling median, based on amplitude threshold "
            "and minimum separation (threshold in residual standard deviations).",
            (
                Param("threshold", "number", required=False, default=3.0),
                Param("min_sep", "int", required=False, default=1),
            ),
            lambda s: {"threshold": 3.0, "min_sep": 1},
        ),
        ToolSchema(
            "channel_correlation",
            "Computes Pearson or Spearman correlation between two channels with an optional "
            "time lag (positive lag pairs channel_1 at t with channel_2 at t+lag).",
            (
                ch("channel_1"),
                ch("channel_2"),
                Param("lag", "int", required=False, default=0),
                Param(
                    "method", "str", required=False, default="pearson", choices=("pearson", "spearman")
                ),
            ),
            lambda s: {"channel_1": 0, "channel_2": _second(s), "lag": 0, "method": "pearson"},
        ),
        ToolSchema(
            "cross_correlation",
            "Computes correlation at every lag in [-max_lag, max_lag] to find the optimal "
            "time alignment between two channels.",
            (ch("channel_1"), ch("channel_2"), Param("max_lag", "int")),
            lambda s: {
                "channel_1": 0,
                "channel_2": _second(s),
                "max_lag": max(0, min(5, (s.length - 1) // 2)),
            },
        ),
        ToolSchema(
            "dtw_distance",
            "Measures similarity between two channels using Dynamic Time Warping (DTW); "
            "lower distances mean more similar shapes.",
            (
                ch("channel_1"),
                ch("channel_2"),
                Param(
                    "distance_metric", "str", required=False, default="abs", choices=("abs", "squared")
                ),
            ),
            lambda s: {"channel_1": 0, "channel_2": _second(s)},
        ),
        ToolSchema(
            "shape_similarity",
            "Correlation of normalized channels, invariant to amplitude scaling and offset.",
            (
                ch("channel_1"),
                ch("channel_2"),
                Param("norm", "str", required=False, default="zscore", choices=("zscore", "minmax")),
            ),
            lambda s: {"channel_1": 0, "channel_2": _second(s)},
        ),
        ToolSchema(
            "granger_causality",
            "F-test of whether one channel statistically predicts another (Granger causality) "
            "using lags 1..max_lag.",
            (ch("cause_channel"), ch("effect_channel"), Param("max_lag", "int")),
            lambda s: {"cause_channel": 0, "effect_channel": _second(s), "max_lag": 1},
        ),
        ToolSchema(
            "anomaly_detection",
            "Scores every point based on reconstruction error (MSE) against a leave-one-out "
            "moving average (classical baseline detector) and selects the top anomalies: "
            "threshold in (0, 1) is a fraction of points, threshold >= 1 a count.",
            (Param("anomaly_threshold", "number"),),
            lambda s: {"anomaly_threshold": 1},
        ),
        ToolSchema(
            "forecaster",
            "Forecasts forecast_horizon future steps and returns predicted values for all "
            "channels (classical seasonal-naive/drift baseline forecaster).",
            (Param("forecast_horizon", "int"),),
            lambda s: {"forecast_horizon": min(8, s.length)},
        ),
    ]


def default_registry(config: ToolkitConfig = DEFAULT_TOOLKIT) -> Registry:
    fns: dict[str, Callable[..., dict]] = {
        "series_info": tools.series_info,
        "datapoint_value": tools.datapoint_value,
        "summary_stats": tools.summary_stats,
        "return_calc": tools.return_calc,
        "autocorr": tools.autocorr,
        "rolling_stat": tools.rolling_stat,
        "quantile_value": tools.quantile_value,
        "volatility": tools.volatility,
        "trend_classifier": lambda s, **kw: tools.trend_classifier(s, config=config, **kw),
        "seasonality_detector": lambda s, **kw: tools.seasonality_detector(s, config=config, **kw),
        "change_point_detector": tools.change_point_detector,
        "noise_profile": lambda s, **kw: tools.noise_profile(s, config=config, **kw),
        "stationarity_test": tools.stationarity_test,
        "spike_detector": tools.spike_detector,
        "channel_correlation": tools.channel_correlation,
        "cross_correlation": tools.cross_correlation,
        "dtw_distance": tools.dtw_distance,
        "shape_similarity": tools.shape_similarity,
        "granger_causality": lambda s, **kw: tools.granger_causality(s, config=config, **kw),
        "anomaly_detection": tools.anomaly_detection,
        "forecaster": lambda s, **kw: tools.forecaster(s, config=config, **kw),
    }
    entries = tuple((schema, fns[schema.name]) for schema in _builtin_schemas())
    return Registry(entries, aliases={"anomaly_detector": "anomaly_detection"})
