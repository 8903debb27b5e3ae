"""CSV writing and reading for result tables.

Floats are written in exponent notation (``3.632E-04``).  The default of 16
mantissa digits round-trips every double exactly; fewer digits give the
compact table style.  NaN is written as an empty field.
"""
from __future__ import annotations

import csv
import io
import math
from dataclasses import fields as dc_fields
from dataclasses import is_dataclass

FULL_PRECISION = 16


def format_value(x, digits: int = FULL_PRECISION) -> str:
    if isinstance(x, bool):
        return "true" if x else "false"
    if isinstance(x, int):
        return str(x)
    if isinstance(x, float):
        if math.isnan(x):
            return ""
        return f"{x:.{digits}E}"
    if x is None:
        return ""
    return str(x)


def _as_dict(row, names):
    if is_dataclass(row):
        return {f.name: getattr(row, f.name) for f in dc_fields(row)}
    return {n: row[n] for n in names}


def write_table(rows, names, stream=None, digits: int = FULL_PRECISION) -> str:
    """Write ``rows`` (dataclasses or mappings) with header ``names``; returns the text."""
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\r\n")
    w.writerow(names)
    for r in rows:
        d = _as_dict(r, names)
        w.writerow([format_value(d[n], digits) for n in names])
    text = buf.getvalue()
    if stream is not None:
        stream.write(text)
    return text


def parse_value(s: str):
    if s == "":
        return math.nan
    if s in ("true", "false"):
        return s == "true"
    try:
        return int(s)
    except ValueError:
        pass
    try:
        return float(s)
    except ValueError:
        return s


def read_table(text: str) -> tuple[list[str], list[dict]]:
    reader = csv.reader(io.StringIO(text, newline=""))
    header = next(reader)
    rows = [dict(zip(header, (parse_value(v) for v in rec))) for rec in reader if rec]
    return header, rows
