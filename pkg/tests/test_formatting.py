"""Tests for formatting and file-writing utilities."""

import json

import numpy as np

from multiquant.utils.formatting import (
    atomic_write_text,
    dumps_json,
    format_cell,
    format_float,
    render_csv,
    to_jsonable,
)


def test_format_float_round_trips():
    """Seventeen significant digits reproduce the float exactly."""
    for value in (0.1, 1 / 3, 2.0**-30, 123456.789):
        assert float(format_float(value)) == value
    assert format_float(0.1) == "0.10000000000000001"


def test_format_cell_types():
    """Floats get fixed precision, integers and strings pass through."""
    assert format_cell(np.int64(3)) == "3"
    assert format_cell("proposed") == "proposed"
    assert format_cell(np.float64(0.5)) == "0.5"


def test_to_jsonable_converts_numpy():
    """Nested numpy values become plain Python types."""
    data = to_jsonable({"a": np.arange(2), "b": (np.float64(1.5), np.int32(2))})

    assert data == {"a": [0, 1], "b": [1.5, 2]}
    assert type(data["a"][0]) is int


def test_dumps_json_is_deterministic():
    """Keys are sorted and the text ends with a newline."""
    text = dumps_json({"b": 1, "a": np.array([0.25])})

    assert text.endswith("\n")
    assert text.index('"a"') < text.index('"b"')
    assert json.loads(text) == {"a": [0.25], "b": 1}


def test_render_csv():
    """Header first, one line per row."""
    text = render_csv(["method", "mean"], [("ordinary", 0.5), ("proposed", 1.0)])

    assert text.splitlines() == ["method,mean", "ordinary,0.5", "proposed,1"]


class TestAtomicWrite:
    """Tests for atomic_write_text."""

    def test_creates_parents(self, temp_dir):
        """Missing parent directories are created."""
        path = temp_dir / "a" / "b" / "out.csv"
        atomic_write_text(path, "x\n")

        assert path.read_text() == "x\n"

    def test_replaces_and_leaves_no_temp_files(self, temp_dir):
        """An existing file is replaced and no temporary file remains."""
        path = temp_dir / "out.json"
        path.write_text("old")
        atomic_write_text(path, "new")

        assert path.read_text() == "new"
        assert [p.name for p in temp_dir.iterdir()] == ["out.json"]
