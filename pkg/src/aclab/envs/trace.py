"""Episode trace files: one CSV row per transition, for debugging and golden tests."""

import csv

import numpy as np

from aclab.errors import MetricsParseError


def save_trace(path, columns, rows):
    """Write a trace as CSV with a header row.

    ``rows`` is an iterable of equal-length numeric sequences matching ``columns``.
    """
    with open(path, "w", newline="") as f:
        writer = csv.writer(f)
        writer.writerow(columns)
        for row in rows:
            writer.writerow([repr(float(v)) for v in row])


def load_trace(path):
    """Read a trace written by save_trace. Returns (columns, float64 array)."""
    with open(path, newline="") as f:
        reader = csv.reader(f)
        try:
            columns = next(reader)
        except StopIteration:
            raise MetricsParseError("empty trace file", 1) from None
        rows = []
        for i, row in enumerate(reader, start=2):
            if len(row) != len(columns):
                raise MetricsParseError(
                    f"expected {len(columns)} fields, got {len(row)}", i
                )
            try:
                rows.append([float(v) for v in row])
            except ValueError as exc:
                raise MetricsParseError(str(exc), i) from None
    data = np.array(rows, dtype=np.float64) if rows else np.empty((0, len(columns)))
    return columns, data
