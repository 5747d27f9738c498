"""Trace CSV files.

The header lists every ``TraceRecord`` field in ``TRACE_FIELDS`` order.
Floats use 17 significant digits, so a write/read cycle is lossless; unset
fields are empty cells and booleans are ``true`` / ``false``.
"""

from __future__ import annotations

import csv
import io
import os

from ..diagnostics import TRACE_FIELDS, TraceRecord

_INT_FIELDS = {"t", "theta_excluded"}
_BOOL_FIELDS = {"k_perp_degenerate", "drift_bound_ok"}


def _cell(value) -> str:
    if value is None:
        return ""
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, int):
        return str(value)
    return format(float(value), ".17g")


def _parse(field: str, text: str):
    if text == "":
        return None
    if field in _INT_FIELDS:
        return int(text)
    if field in _BOOL_FIELDS:
        if text not in ("true", "false"):
            raise ValueError(f"column {field}: expected true/false, got {text!r}")
        return text == "true"
    return float(text)


def trace_to_csv(trace) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(TRACE_FIELDS)
    for rec in trace:
        writer.writerow([_cell(getattr(rec, f)) for f in TRACE_FIELDS])
    return buf.getvalue()


def write_trace_csv(trace, path) -> None:
    text = trace_to_csv(trace)
    try:
        with open(path, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    except OSError as exc:
        raise OSError(f"cannot write trace CSV {os.fspath(path)!r}: {exc.strerror}") from exc


def read_trace_csv(path) -> list[TraceRecord]:
    try:
        with open(path, encoding="utf-8", newline="") as fh:
            rows = list(csv.reader(fh))
    except OSError as exc:
        raise OSError(f"cannot read trace CSV {os.fspath(path)!r}: {exc.strerror}") from exc
    if not rows:
        raise ValueError(f"{os.fspath(path)}: empty file, expected a header line")
    header = rows[0]
    unknown = [h for h in header if h not in TRACE_FIELDS]
    if unknown or "t" not in header:
        raise ValueError(f"{os.fspath(path)}: unexpected header (unknown columns {unknown})")
    out = []
    for lineno, row in enumerate(rows[1:], start=2):
        if len(row) != len(header):
            raise ValueError(f"{os.fspath(path)}:{lineno}: {len(row)} cells, header has {len(header)}")
        try:
            values = {f: _parse(f, cell) for f, cell in zip(header, row)}
        except ValueError as exc:
            raise ValueError(f"{os.fspath(path)}:{lineno}: {exc}") from None
        out.append(TraceRecord(**values))
    return out
