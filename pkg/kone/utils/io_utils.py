"""Reading and writing measures, reports and time series."""
import json
import os
import re
from typing import Any, Iterable, List, TextIO, Union

import numpy as np
import pandas as pd

from kone.errors import InvalidMeasureError
from kone.measure.core import DiscreteMeasure, Window

__all__ = [
    "format_measure",
    "read_jsonl",
    "read_measures",
    "save_series",
    "to_jsonable",
    "write_jsonl",
    "write_measures",
]

HEADER = re.compile(r"^#\s*d=(\d+)\s+window=(\S+)\s*$")


def _ensure_dir(path: str):
    directory = os.path.dirname(path)
    if directory and not os.path.isdir(directory):
        os.makedirs(directory)


def format_measure(eta: DiscreteMeasure) -> str:
    """Text block of a measure.

    The header is ``# d=<dim> window=<lo..hi per axis>`` and each atom is
    a line ``s x_1 ... x_d`` with 17 significant digits, which reads back
    exactly.
    """
    lines = [f"# d={eta.dim} window={eta.window.to_string()}"]
    for s, x in zip(eta.weights, eta.positions):
        values = [s, *x]
        lines.append(" ".join(f"{v:.17g}" for v in values))
    return "\n".join(lines) + "\n"


def write_measures(
    measures: Union[DiscreteMeasure, Iterable[DiscreteMeasure]],
    output: Union[str, TextIO],
) -> None:
    """Write one or several measures, one block each.

    Args:
        measures: Measure or measures to write.
        output: Path or open text stream. Missing directories are created.
    """
    if isinstance(measures, DiscreteMeasure):
        measures = [measures]
    text = "".join(format_measure(eta) for eta in measures)
    if isinstance(output, str):
        _ensure_dir(output)
        with open(output, "w", encoding="utf-8") as handle:
            handle.write(text)
    else:
        output.write(text)


def _block(dim: int, window: Window, rows: List[List[float]]):
    if rows:
        data = np.array(rows, dtype=float)
        return DiscreteMeasure(data[:, 1:], data[:, 0], window)
    return DiscreteMeasure.empty(window)


def read_measures(path: str) -> List[DiscreteMeasure]:
    """Read every measure block of a file.

    Args:
        path: File written by :func:`write_measures`.

    Returns:
        List of measures in file order.

    Raises:
        InvalidMeasureError: Malformed header or atom line, or atoms
            violating the measure invariants.
    """
    measures: List[DiscreteMeasure] = []
    header = None
    rows: List[List[float]] = []
    with open(path, "r", encoding="utf-8") as handle:
        for number, line in enumerate(handle, start=1):
            line = line.strip()
            if not line:
                continue
            if line.startswith("#"):
                match = HEADER.match(line)
                if match is None:
                    continue
                if header is not None:
                    measures.append(_block(*header, rows))
                window = Window.from_string(match.group(2))
                header = (int(match.group(1)), window)
                rows = []
                continue
            if header is None:
                raise InvalidMeasureError(
                    f"{path}:{number}: atom line before any header"
                )
            try:
                values = [float(v) for v in line.split()]
            except ValueError as err:
                raise InvalidMeasureError(
                    f"{path}:{number}: could not parse {line!r}"
                ) from err
            if len(values) != header[0] + 1:
                raise InvalidMeasureError(
                    f"{path}:{number}: expected {header[0] + 1} columns, "
                    f"got {len(values)}"
                )
            rows.append(values)
    if header is not None:
        measures.append(_block(*header, rows))
    return measures


def to_jsonable(value: Any) -> Any:
    """Convert numpy scalars and arrays to plain Python objects."""
    if isinstance(value, dict):
        return {str(k): to_jsonable(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [to_jsonable(v) for v in value]
    if isinstance(value, np.ndarray):
        return to_jsonable(value.tolist())
    if isinstance(value, np.bool_):
        return bool(value)
    if isinstance(value, np.integer):
        return int(value)
    if isinstance(value, np.floating):
        return float(value)
    return value


def write_jsonl(
    records: Iterable[dict],
    output: Union[str, TextIO],
    append: bool = False,
) -> None:
    """Write one JSON object per line with sorted keys.

    Floats use Python's shortest round-trip representation.
    """
    text = "".join(
        json.dumps(to_jsonable(record), sort_keys=True) + "\n"
        for record in records
    )
    if isinstance(output, str):
        _ensure_dir(output)
        mode = "a" if append else "w"
        with open(output, mode, encoding="utf-8") as handle:
            handle.write(text)
    else:
        output.write(text)


def read_jsonl(path: str) -> List[dict]:
    with open(path, "r", encoding="utf-8") as handle:
        return [json.loads(line) for line in handle if line.strip()]


def save_series(series: pd.DataFrame, path: str) -> None:
    """Save a time series as CSV without the index."""
    _ensure_dir(path)
    series.to_csv(path, sep=",", index=False, float_format="%.17g")
