"""Test reading and writing measures, reports and series."""
import io

import numpy as np
import pandas as pd
import pytest

from kone.errors import InvalidMeasureError
from kone.measure.core import DiscreteMeasure, Window
from kone.utils.io_utils import (
    format_measure,
    read_jsonl,
    read_measures,
    save_series,
    write_jsonl,
    write_measures,
)


def test_measure_file_reads_back_exactly(tmp_path):
    """Test that written measures, the empty one included, read back."""
    window = Window.cube(2, 0.0, 1.0)
    rng = np.random.default_rng(0)
    measures = [
        DiscreteMeasure(
            window.uniform(rng, 4), rng.exponential(size=4), window
        ),
        DiscreteMeasure.empty(window),
    ]
    path = str(tmp_path / "out" / "measures.txt")
    write_measures(measures, path)
    assert read_measures(path) == measures


def test_measure_header():
    """Test the block header format."""
    window = Window((0.0, -1.0), (2.0, 1.0))
    eta = DiscreteMeasure([[1.0, 0.0]], [0.5], window)
    lines = format_measure(eta).splitlines()
    assert lines[0] == "# d=2 window=0.0..2.0,-1.0..1.0"
    assert lines[1] == "0.5 1 0"


def test_write_measures_to_stream():
    """Test writing a single measure to an open stream."""
    buffer = io.StringIO()
    eta = DiscreteMeasure([[0.5]], [1.0], Window.cube(1, 0.0, 1.0))
    write_measures(eta, buffer)
    assert buffer.getvalue() == "# d=1 window=0.0..1.0\n1 0.5\n"


@pytest.mark.parametrize(
    "text",
    [
        "1.0 0.5 0.5\n",
        "# d=2 window=0..1,0..1\n1.0 abc 0.5\n",
        "# d=2 window=0..1,0..1\n1.0 0.5\n",
        "# d=2 window=0..1,0..1\n-1.0 0.5 0.5\n",
    ],
)
def test_malformed_measure_files(tmp_path, text):
    """Test that malformed files raise InvalidMeasureError."""
    path = tmp_path / "bad.txt"
    path.write_text(text)
    with pytest.raises(InvalidMeasureError):
        read_measures(str(path))


def test_comments_are_skipped(tmp_path):
    """Test that other comment lines are ignored."""
    path = tmp_path / "measures.txt"
    path.write_text("# produced by a test\n# d=1 window=0..2\n\n0.5 1.5\n")
    (eta,) = read_measures(str(path))
    assert eta.total_mass() == 0.5
    assert eta.window == Window.cube(1, 0.0, 2.0)


def test_jsonl_reports(tmp_path):
    """Test report lines with numpy values."""
    path = str(tmp_path / "reports.jsonl")
    write_jsonl([{"check": "c2", "pass": np.bool_(True)}], path)
    write_jsonl(
        [{"check": "mecke", "values": np.array([1.5, 2.0])}],
        path,
        append=True,
    )
    records = read_jsonl(path)
    assert records == [
        {"check": "c2", "pass": True},
        {"check": "mecke", "values": [1.5, 2.0]},
    ]


def test_save_series(tmp_path):
    """Test the CSV time series."""
    series = pd.DataFrame({"t": [0.0, 0.1], "count": [3.5, 2.5]})
    path = str(tmp_path / "series" / "run.csv")
    save_series(series, path)
    pd.testing.assert_frame_equal(pd.read_csv(path), series)
