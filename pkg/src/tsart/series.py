"""Time-series data model, file ingestion and prompt rendering."""

from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass, field
from datetime import datetime
from pathlib import Path
from typing import Any, Sequence

import numpy as np


class SeriesError(ValueError):
    """Raised for malformed series input."""


@dataclass(frozen=True)
class Range:
    """Half-open index range ``[start, end)``."""

    start: int
    end: int

    def check(self, length: int) -> "Range":
        if not (0 <= self.start < self.end <= length):
            raise SeriesError(
                f"invalid range [{self.start}, {self.end}) for series of length {length}"
            )
        return self


@dataclass(frozen=True, eq=False)
class TimeSeries:
    """Immutable T x C numeric panel.

    Missing values are stored as NaN; ``missing_mask`` is derived from the
    stored values so the two can never disagree.
    """

    values: np.ndarray
    timestamps: tuple[datetime, ...] | None = None
    channel_names: tuple[str, ...] | None = None
    missing_mask: np.ndarray = field(init=False, repr=False)

    def __post_init__(self) -> None:
        arr = np.array(self.values, dtype=float)
        if arr.ndim == 1:
            arr = arr.reshape(-1, 1)
        if arr.ndim != 2 or arr.shape[0] < 1 or arr.shape[1] < 1:
            raise SeriesError(f"expected a non-empty T x C panel, got shape {arr.shape}")
        arr[~np.isfinite(arr)] = np.nan
        arr.setflags(write=False)
        mask = np.isnan(arr)
        mask.setflags(write=False)
        object.__setattr__(self, "values", arr)
        object.__setattr__(self, "missing_mask", mask)

        if self.timestamps is not None:
            ts = tuple(_parse_timestamp(t) for t in self.timestamps)
            if len(ts) != arr.shape[0]:
                raise SeriesError(f"{len(ts)} timestamps for {arr.shape[0]} rows")
            if any(b <= a for a, b in zip(ts, ts[1:])):
                raise SeriesError("timestamps must be strictly increasing")
            object.__setattr__(self, "timestamps", ts)
        if self.channel_names is not None:
            names = tuple(str(n) for n in self.channel_names)
            if len(names) != arr.shape[1]:
                raise SeriesError(f"{len(names)} channel names for {arr.shape[1]} channels")
            object.__setattr__(self, "channel_names", names)

    @property
    def length(self) -> int:
        return self.values.shape[0]

    @property
    def channels(self) -> int:
        return self.values.shape[1]

    def channel(self, c: int) -> np.ndarray:
        return self.values[:, c]

    def resolve_index(self, index_or_timestamp: Any) -> int:
        """Map an integer index or an exact ISO-8601 timestamp to a row index."""
        if isinstance(index_or_timestamp, bool):
            raise SeriesError(f"not an index: {index_or_timestamp!r}")
        if isinstance(index_or_timestamp, (int, np.integer)):
            idx = int(index_or_timestamp)
        elif isinstance(index_or_timestamp, float) and index_or_timestamp.is_integer():
            idx = int(index_or_timestamp)
        elif isinstance(index_or_timestamp, str):
            text = index_or_timestamp.strip()
            try:
                idx = int(text)
            except ValueError:
                if self.timestamps is None:
                    raise SeriesError(f"series has no timestamps; cannot resolve {text!r}")
                try:
                    when = _parse_timestamp(text)
                except ValueError as exc:
                    raise SeriesError(f"unknown timestamp {text!r}") from exc
                try:
                    return self.timestamps.index(when)
                except ValueError:
                    raise SeriesError(f"unknown timestamp {text!r}") from None
        else:
            raise SeriesError(f"not an index or timestamp: {index_or_timestamp!r}")
        if not 0 <= idx < self.length:
            raise SeriesError(f"index {idx} out of range [0, {self.length})")
        return idx

    def to_dict(self) -> dict:
        out: dict[str, Any] = {"values": [[_json_number(v) for v in row] for row in self.values]}
        if self.timestamps is not None:
            out["timestamps"] = [t.isoformat() for t in self.timestamps]
        if self.channel_names is not None:
            out["channel_names"] = list(self.channel_names)
        return out

    @classmethod
    def from_dict(cls, doc: Any) -> "TimeSeries":
        """Build from a JSON document: an array of rows/values or a ``{"values": ...}`` object."""
        if isinstance(doc, dict):
            if "values" not in doc:
                raise SeriesError("series object needs a 'values' field")
            rows = doc["values"]
            timestamps = doc.get("timestamps")
            names = doc.get("channel_names")
        else:
            rows, timestamps, names = doc, None, None
        return cls(_rows_from_json(rows), timestamps=timestamps, channel_names=names)


def _parse_timestamp(value: Any) -> datetime:
    if isinstance(value, datetime):
        return value
    return datetime.fromisoformat(str(value).strip())


def _json_number(v: float) -> float | None:
    return None if math.isnan(v) else float(v)


def _to_float(cell: Any) -> float:
    if cell is None or isinstance(cell, bool):
        return math.nan
    if isinstance(cell, (int, float)):
        return float(cell)
    try:
        return float(str(cell).strip())
    except ValueError:
        return math.nan


def _rows_from_json(rows: Any) -> np.ndarray:
    if not isinstance(rows, list):
        raise SeriesError("series values must be a JSON array")
    if not rows:
        raise SeriesError("series has zero rows")
    if all(not isinstance(r, list) for r in rows):
        return np.array([[_to_float(r)] for r in rows], dtype=float)
    width = len(rows[0]) if isinstance(rows[0], list) else 1
    out = []
    for i, r in enumerate(rows):
        r = r if isinstance(r, list) else [r]
        if len(r) != width:
            raise SeriesError(f"ragged row {i}: expected {width} values, got {len(r)}")
        out.append([_to_float(c) for c in r])
    if width == 0:
        raise SeriesError("series rows are empty")
    return np.array(out, dtype=float)


def _looks_like_header(row: Sequence[str]) -> bool:
    return all(math.isnan(_to_float(c)) for c in row) and any(c.strip() for c in row)


def load_series(
    path: str | Path,
    format: str | None = None,
    header: bool | None = None,
    timestamp_column: int | None = None,
) -> TimeSeries:
    """Read a series from CSV or JSON.

    ``format`` defaults to the file suffix. For CSV, ``header=None`` detects a
    header row (a first row with no numeric cells). Non-numeric cells become
    missing values; rows are never dropped.
    """
    path = Path(path)
    fmt = (format or path.suffix.lstrip(".")).lower()
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise SeriesError(f"cannot read {path}: {exc}") from exc

    if fmt == "json":
        try:
            doc = json.loads(text)
        except json.JSONDecodeError as exc:
            raise SeriesError(f"invalid JSON in {path}: {exc}") from exc
        series = TimeSeries.from_dict(doc)
    elif fmt == "csv":
        rows = [r for r in csv.reader(text.splitlines()) if r and any(c.strip() for c in r)]
        if not rows:
            raise SeriesError(f"{path} has zero rows")
        names = None
        has_header = _looks_like_header(rows[0]) if header is None else header
        if has_header:
            names, rows = [c.strip() for c in rows[0]], rows[1:]
        if not rows:
            raise SeriesError(f"{path} has zero data rows")
        width = len(rows[0])
        for i, r in enumerate(rows):
            if len(r) != width:
                raise SeriesError(f"ragged row {i}: expected {width} cells, got {len(r)}")
        timestamps = None
        if timestamp_column is not None:
            timestamps = [r[timestamp_column] for r in rows]
            rows = [r[:timestamp_column] + r[timestamp_column + 1 :] for r in rows]
            if names is not None:
                names = names[:timestamp_column] + names[timestamp_column + 1 :]
        if not rows[0]:
            raise SeriesError(f"{path} has no value columns")
        values = np.array([[_to_float(c) for c in r] for r in rows], dtype=float)
        series = TimeSeries(values, timestamps=timestamps, channel_names=names)
    else:
        raise SeriesError(f"unsupported series format {fmt!r} (expected csv or json)")

    if series.missing_mask.all(axis=0).all():
        raise SeriesError(f"{path} has no numeric column")
    return series


def render_values(values: Sequence[float], precision: int = 3) -> str:
    parts = []
    for v in values:
        v = float(v)
        parts.append("NaN" if math.isnan(v) else repr(round(v, precision)))
    return "[" + ", ".join(parts) + "]"


def render_for_prompt(series: TimeSeries, precision: int = 3) -> str:
    """Bracketed value list per channel, one line per channel when C > 1."""
    if series.channels == 1:
        return render_values(series.channel(0), precision)
    names = series.channel_names or tuple(f"channel_{c}" for c in range(series.channels))
    return "\n".join(
        f"{names[c]}: {render_values(series.channel(c), precision)}" for c in range(series.channels)
    )
