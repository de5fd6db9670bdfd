"""Deterministic text serialization for all artifacts.

Floats are written as Python's repr (shortest round-trip form), missing
values as empty CSV cells / JSON nulls. Every artifact starts with (or
embeds) the config digest and toolkit version so outputs identify the
run that made them.
"""

from __future__ import annotations

import csv
import io
import json
import math

import numpy as np

from .errors import DataError
from .matrix import MeasureMatrix

__all__ = [
    "fmt_float",
    "comment_header",
    "measure_matrix_to_csv",
    "measure_matrix_from_csv",
    "table_to_csv",
    "square_matrix_to_csv",
    "dump_json",
    "dump_jsonl",
]


def fmt_float(value) -> str:
    if value is None:
        return ""
    v = float(value)
    if math.isnan(v):
        return ""
    return repr(v)


def comment_header(digest: str, version: str, **extra: str) -> str:
    parts = [f"# qsimval {version} config={digest}"]
    for key in sorted(extra):
        parts.append(f"{key}={extra[key]}")
    return " ".join(parts)


def _csv_writer(buffer: io.StringIO) -> csv.writer:
    return csv.writer(buffer, lineterminator="\n")


def measure_matrix_to_csv(matrix: MeasureMatrix, digest: str, version: str) -> str:
    buffer = io.StringIO()
    buffer.write(comment_header(digest, version) + "\n")
    writer = _csv_writer(buffer)
    writer.writerow(["simulator_id", "session_id", "rank", *matrix.column_names])
    for key, row in zip(matrix.row_keys, matrix.values):
        writer.writerow([key[0], key[1], str(key[2]), *(fmt_float(v) for v in row)])
    return buffer.getvalue()


def measure_matrix_from_csv(text: str) -> MeasureMatrix:
    lines = [line for line in text.splitlines() if not line.startswith("#")]
    reader = csv.reader(lines)
    try:
        header = next(reader)
    except StopIteration:
        raise DataError("measure matrix CSV is empty") from None
    if header[:3] != ["simulator_id", "session_id", "rank"]:
        raise DataError(
            "measure matrix CSV must start with simulator_id,session_id,rank columns"
        )
    columns = tuple(header[3:])
    row_keys = []
    rows = []
    for lineno, record in enumerate(reader, start=2):
        if not record:
            continue
        if len(record) != 3 + len(columns):
            raise DataError(
                f"measure matrix CSV row {lineno}: expected {3 + len(columns)} fields,"
                f" got {len(record)}"
            )
        try:
            rank = int(record[2], 10)
        except ValueError as exc:
            raise DataError(f"measure matrix CSV row {lineno}: bad rank '{record[2]}'") from exc
        row_keys.append((record[0], record[1], rank))
        parsed = []
        for cell in record[3:]:
            if cell == "":
                parsed.append(np.nan)
            else:
                try:
                    parsed.append(float(cell))
                except ValueError as exc:
                    raise DataError(
                        f"measure matrix CSV row {lineno}: bad number '{cell}'"
                    ) from exc
        rows.append(parsed)
    values = np.array(rows, dtype=float) if rows else np.empty((0, len(columns)))
    return MeasureMatrix(row_keys=tuple(row_keys), column_names=columns, values=values)


def table_to_csv(
    row_names, col_names, rows, digest: str, version: str, **extra: str
) -> str:
    buffer = io.StringIO()
    buffer.write(comment_header(digest, version, **extra) + "\n")
    writer = _csv_writer(buffer)
    writer.writerow(["name", *col_names])
    for name, row in zip(row_names, rows):
        writer.writerow([name, *(fmt_float(v) for v in row)])
    return buffer.getvalue()


def square_matrix_to_csv(
    names, values, digest: str, version: str, **extra: str
) -> str:
    return table_to_csv(names, names, values, digest, version, **extra)


def _sanitize(obj):
    """JSON-safe copy: numpy scalars to Python, NaN to None."""
    if isinstance(obj, dict):
        return {k: _sanitize(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_sanitize(v) for v in obj]
    if isinstance(obj, np.generic):
        obj = obj.item()
    if isinstance(obj, float) and math.isnan(obj):
        return None
    return obj


def dump_json(obj) -> str:
    return json.dumps(_sanitize(obj), indent=2, sort_keys=True, allow_nan=False) + "\n"


def dump_jsonl(lines) -> str:
    return "".join(
        json.dumps(_sanitize(line), sort_keys=True, separators=(",", ":"), allow_nan=False)
        + "\n"
        for line in lines
    )
