"""Flat CSV files with ``#``-prefixed configuration headers."""

from __future__ import annotations

import csv
import io
import math
import os
from collections.abc import Iterable, Sequence

__all__ = ["format_value", "write_csv", "read_csv"]


def format_value(x) -> str:
    """Text for one cell; floats keep 17 significant digits so they round-trip."""
    if isinstance(x, bool):
        return "true" if x else "false"
    if isinstance(x, int):
        return str(x)
    if isinstance(x, float) or hasattr(x, "dtype"):
        x = float(x)
        if math.isnan(x):
            return "nan"
        if math.isinf(x):
            return "inf" if x > 0 else "-inf"
        return format(x, ".17g")
    return str(x)


def write_csv(
    path,
    columns: Sequence[str],
    rows: Iterable[Sequence],
    comments: Iterable[tuple[str, object]] = (),
) -> str:
    """Write a header row and data rows, preceded by ``# key = value`` lines.

    Returns the path written. The file is assembled in memory and written in
    one call so a failure never leaves a half-written file behind.
    """
    buf = io.StringIO()
    for key, value in comments:
        buf.write(f"# {key} = {format_value(value)}\n")
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(columns)
    for row in rows:
        if len(row) != len(columns):
            raise ValueError(f"row has {len(row)} cells, header has {len(columns)}")
        writer.writerow([format_value(v) for v in row])
    path = os.fspath(path)
    try:
        with open(path, "w", encoding="utf-8", newline="") as fh:
            fh.write(buf.getvalue())
    except OSError as exc:
        raise OSError(f"cannot write {path}: {exc.strerror or exc}") from exc
    return path


def _parse_cell(text: str):
    try:
        return int(text)
    except ValueError:
        pass
    try:
        return float(text)
    except ValueError:
        return {"true": True, "false": False}.get(text, text)


def read_csv(path) -> tuple[dict[str, object], list[str], list[list]]:
    """Inverse of :func:`write_csv`: ``(comments, columns, rows)``."""
    comments: dict[str, object] = {}
    body = []
    with open(path, encoding="utf-8", newline="") as fh:
        for line in fh:
            if line.startswith("#"):
                key, _, value = line[1:].partition("=")
                comments[key.strip()] = _parse_cell(value.strip())
            else:
                body.append(line)
    reader = csv.reader(body)
    columns = next(reader, [])
    rows = [[_parse_cell(c) for c in row] for row in reader]
    return comments, columns, rows
