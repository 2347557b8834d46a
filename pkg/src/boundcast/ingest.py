"""CSV ingestion and flat key=value config files."""

from __future__ import annotations

import csv
import math
from pathlib import Path

import numpy as np

from .core import TimeSeries
from .errors import EmptySeries, ParseError

MISSING = object()


def _is_number(cell: str) -> bool:
    try:
        return math.isfinite(float(cell))
    except (TypeError, ValueError):
        return False


def ingest_csv(path, column=None) -> TimeSeries:
    """Read one numeric column as a TimeSeries, in file order.

    The first row is treated as a header when it is not numeric; `column`
    may be a name (needs a header) or 0-based index, and defaults to the
    last column so "t,value" layouts pick the value.
    """
    path = Path(path)
    if not path.exists():
        raise FileNotFoundError(f"no such file: {path}")
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    rows = [(i + 1, row) for i, row in enumerate(rows) if any(cell.strip() for cell in row)]
    if not rows:
        raise EmptySeries(f"{path} has no rows")

    header = None
    first_line, first = rows[0]
    if not all(_is_number(c) for c in first if c.strip()):
        header = [c.strip() for c in first]
        rows = rows[1:]
    if not rows:
        raise EmptySeries(f"{path} has no data rows")

    if column is None:
        col_idx = len(rows[0][1]) - 1
    elif isinstance(column, int) or (isinstance(column, str) and column.lstrip("-").isdigit()):
        col_idx = int(column)
    else:
        if header is None:
            raise ParseError(f"column {column!r} needs a header row", 1)
        if column not in header:
            raise ParseError(f"column {column!r} not in header {header}", 1)
        col_idx = header.index(column)

    values = []
    for line_no, row in rows:
        if col_idx >= len(row) or not row[col_idx].strip():
            raise ParseError(f"missing cell in column {col_idx}", line_no)
        cell = row[col_idx].strip()
        if not _is_number(cell):
            raise ParseError(f"cannot parse {cell!r} as a finite number", line_no)
        values.append(float(cell))
    if not values:
        raise EmptySeries(f"{path} has no data rows")
    return TimeSeries(np.array(values))


def read_config_file(path) -> dict[str, str]:
    """Flat `key = value` lines; blank lines and # comments ignored."""
    out: dict[str, str] = {}
    for line_no, line in enumerate(Path(path).read_text().splitlines(), start=1):
        stripped = line.strip()
        if not stripped or stripped.startswith("#"):
            continue
        if "=" not in stripped:
            raise ParseError(f"expected key = value, got {stripped!r}", line_no)
        key, _, value = stripped.partition("=")
        out[key.strip().lower().replace("-", "_")] = value.strip()
    return out
