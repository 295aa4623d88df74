import json
import math
import re

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from tsart.series import Range, SeriesError, TimeSeries, load_series, render_for_prompt, render_values


def test_single_column_csv(tmp_path):
    p = tmp_path / "s.csv"
    p.write_text("\n".join(str(i * 0.5) for i in range(24)) + "\n")
    s = load_series(p)
    assert (s.length, s.channels) == (24, 1)


def test_json_rows(tmp_path):
    p = tmp_path / "s.json"
    p.write_text("[[1,2],[3,4]]")
    s = load_series(p)
    assert (s.length, s.channels) == (2, 2)
    assert s.values.tolist() == [[1, 2], [3, 4]]


def test_json_object_with_timestamps(tmp_path):
    p = tmp_path / "s.json"
    p.write_text(json.dumps({"values": [1, 2, 3], "timestamps": ["2021-01-01", "2021-01-02", "2021-01-03"]}))
    s = load_series(p)
    assert s.resolve_index("2021-01-02") == 1
    with pytest.raises(SeriesError):
        s.resolve_index("2021-01-05")


def test_nan_cell_sets_mask(tmp_path):
    p = tmp_path / "s.csv"
    p.write_text("1\n2\n3\nNaN\n5\n")
    s = load_series(p)
    assert s.missing_mask[3][0]
    assert s.missing_mask.sum() == 1


def test_header_detected_and_rows_kept(tmp_path):
    p = tmp_path / "s.csv"
    p.write_text("a,b\n1,2\nx,4\n5,6\n")
    s = load_series(p)
    assert s.channel_names == ("a", "b")
    assert s.length == 3
    assert s.missing_mask[1][0]


@pytest.mark.parametrize("content", ["", "1,2\n3\n", "a\nb\nc\n"])
def test_bad_csv_rejected(tmp_path, content):
    p = tmp_path / "s.csv"
    p.write_text(content)
    with pytest.raises(SeriesError):
        load_series(p)


def test_unreadable_file(tmp_path):
    with pytest.raises(SeriesError):
        load_series(tmp_path / "missing.csv")


def test_timestamps_must_increase():
    with pytest.raises(SeriesError):
        TimeSeries([1, 2], timestamps=["2021-01-02", "2021-01-01"])


def test_immutable():
    s = TimeSeries([1.0, 2.0])
    with pytest.raises(ValueError):
        s.values[0, 0] = 3.0


def test_range_bounds():
    assert Range(0, 3).check(3) == Range(0, 3)
    for bad in [(2, 2), (-1, 2), (0, 4)]:
        with pytest.raises(SeriesError):
            Range(*bad).check(3)


def test_render_examples():
    assert render_values([0.06, 0.11, 0.13], 2) == "[0.06, 0.11, 0.13]"
    assert render_values([1.23456], 3) == "[1.235]"
    multi = render_for_prompt(TimeSeries([[1, 2], [3, 4]]), 3)
    assert multi.splitlines() == ["channel_0: [1.0, 3.0]", "channel_1: [2.0, 4.0]"]


@given(
    st.lists(st.floats(-1e6, 1e6, allow_nan=False), min_size=1, max_size=50),
    st.integers(0, 6),
)
def test_render_reparse_roundtrip(values, precision):
    text = render_for_prompt(TimeSeries(values), precision)
    parsed = [float(x) for x in re.findall(r"[-+0-9.e]+", text.strip("[]"))]
    assert len(parsed) == len(values)
    for a, b in zip(parsed, values):
        assert abs(a - b) <= 10 ** (-precision) / 2 + 1e-9 * max(1.0, abs(b))


@given(st.lists(st.lists(st.one_of(st.floats(allow_nan=True), st.none()), min_size=2, max_size=2), min_size=1, max_size=20))
def test_mask_matches_nonfinite(rows):
    arr = np.array([[np.nan if v is None else v for v in r] for r in rows], dtype=float)
    s = TimeSeries(arr)
    assert s.length == len(rows)
    assert (s.missing_mask == ~np.isfinite(arr)).all()


def test_dict_roundtrip():
    s = TimeSeries([[1.0, math.nan]], timestamps=["2021-01-01T00:00:00"], channel_names=["x", "y"])
    back = TimeSeries.from_dict(json.loads(json.dumps(s.to_dict())))
    assert back.channel_names == s.channel_names
    assert back.timestamps == s.timestamps
    assert np.array_equal(back.missing_mask, s.missing_mask)
