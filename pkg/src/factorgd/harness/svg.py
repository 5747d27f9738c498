"""Minimal deterministic SVG line charts.

Output depends only on the input numbers: fixed canvas, fixed palette,
coordinates printed with 6 decimals, no timestamps or ids.
"""

from __future__ import annotations

import math
import os
from typing import NamedTuple, Sequence
from xml.sax.saxutils import escape

AXES = ("linear", "log_y", "loglog")
WIDTH, HEIGHT = 760, 460
LEFT, RIGHT, TOP, BOTTOM = 80, 190, 40, 60
PALETTE = ("#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b", "#e377c2", "#17becf")
MAX_TICKS = 9


class Series(NamedTuple):
    label: str
    points: list  # (x, y) pairs


def _check_axes(axes: str) -> tuple[bool, bool]:
    if axes not in AXES:
        raise ValueError(f"axes must be one of {', '.join(AXES)}, got {axes!r}")
    return axes == "loglog", axes in ("log_y", "loglog")


def trace_series(trace, fields: Sequence[str], axes: str = "log_y") -> list[Series]:
    """One series per field, skipping records where the field is unset."""
    logx, logy = _check_axes(axes)
    out = []
    for field in fields:
        pts = []
        for rec in trace:
            if not hasattr(rec, field):
                raise ValueError(f"trace has no field {field!r}")
            v = getattr(rec, field)
            if v is None:
                continue
            v = float(v)
            if not math.isfinite(v):
                raise ValueError(f"non-finite value at (t={rec.t}, field={field})")
            if logy and v <= 0:
                raise ValueError(f"nonpositive value {v!r} under a log axis at (t={rec.t}, field={field})")
            if logx and rec.t <= 0:
                raise ValueError(f"nonpositive t under a log axis at (t={rec.t}, field={field})")
            pts.append((float(rec.t), v))
        if not pts:
            raise ValueError(f"field {field!r} has no values in the trace")
        out.append(Series(field, pts))
    return out


def _span(values: list[float], log: bool) -> tuple[float, float]:
    if log:
        lo = math.floor(min(math.log10(v) for v in values))
        hi = math.ceil(max(math.log10(v) for v in values))
        return (float(lo), float(hi)) if hi > lo else (float(lo), float(lo + 1))
    lo, hi = min(values), max(values)
    if hi == lo:
        pad = abs(lo) * 0.1 or 1.0
        return lo - pad, hi + pad
    return lo, hi


def _frame(series: list[Series], logx: bool, logy: bool):
    xs = [x for s in series for x, _ in s.points]
    ys = [y for s in series for _, y in s.points]
    return _span(xs, logx), _span(ys, logy)


def _mapper(span: tuple[float, float], log: bool, start: float, length: float, flip: bool):
    lo, hi = span

    def f(v: float) -> float:
        u = ((math.log10(v) if log else v) - lo) / (hi - lo)
        return start + (1.0 - u) * length if flip else start + u * length

    return f


def plot_points(series: list[Series], axes: str = "log_y") -> list[list[tuple[float, float]]]:
    """Canvas coordinates of every point, as drawn."""
    logx, logy = _check_axes(axes)
    xspan, yspan = _frame(series, logx, logy)
    fx = _mapper(xspan, logx, LEFT, WIDTH - LEFT - RIGHT, False)
    fy = _mapper(yspan, logy, TOP, HEIGHT - TOP - BOTTOM, True)
    return [[(fx(x), fy(y)) for x, y in s.points] for s in series]


def _log_ticks(span):
    lo, hi = int(span[0]), int(span[1])
    step = max(1, math.ceil((hi - lo) / (MAX_TICKS - 1)))
    return [(10.0**e, f"1e{e}") for e in range(lo, hi + 1, step)]


def _linear_ticks(span):
    lo, hi = span
    raw = (hi - lo) / (MAX_TICKS - 1)
    mag = 10.0 ** math.floor(math.log10(raw))
    step = next(m * mag for m in (1, 2, 5, 10) if m * mag >= raw)
    first = math.ceil(lo / step - 1e-9)
    out = []
    i = first
    while i * step <= hi + 1e-9 * step:
        v = i * step
        out.append((v, format(v, ".6g")))
        i += 1
    return out


def _f(v: float) -> str:
    return format(v, ".6f")


def svg_document(series: list[Series], axes: str = "log_y", title: str = "", xlabel: str = "t", ylabel: str = "") -> str:
    logx, logy = _check_axes(axes)
    if not series:
        raise ValueError("nothing to plot")
    xspan, yspan = _frame(series, logx, logy)
    pw, ph = WIDTH - LEFT - RIGHT, HEIGHT - TOP - BOTTOM
    fx = _mapper(xspan, logx, LEFT, pw, False)
    fy = _mapper(yspan, logy, TOP, ph, True)

    lines = [
        '<?xml version="1.0" encoding="UTF-8"?>',
        f'<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{WIDTH}" height="{HEIGHT}" '
        f'viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="12">',
        f'<rect x="0" y="0" width="{WIDTH}" height="{HEIGHT}" fill="white"/>',
        f'<rect x="{LEFT}" y="{TOP}" width="{pw}" height="{ph}" fill="none" stroke="black"/>',
    ]
    if title:
        lines.append(f'<text x="{LEFT + pw / 2:g}" y="{TOP - 14}" text-anchor="middle" font-size="14">{escape(title)}</text>')

    xticks = _log_ticks(xspan) if logx else _linear_ticks(xspan)
    for v, label in xticks:
        x = _f(fx(v))
        lines.append(f'<line x1="{x}" y1="{TOP + ph}" x2="{x}" y2="{TOP + ph + 5}" stroke="black"/>')
        lines.append(f'<text x="{x}" y="{TOP + ph + 18}" text-anchor="middle">{escape(label)}</text>')
    yticks = _log_ticks(yspan) if logy else _linear_ticks(yspan)
    for v, label in yticks:
        y = _f(fy(v))
        lines.append(f'<line x1="{LEFT - 5}" y1="{y}" x2="{LEFT}" y2="{y}" stroke="black"/>')
        lines.append(f'<line x1="{LEFT}" y1="{y}" x2="{LEFT + pw}" y2="{y}" stroke="#dddddd"/>')
        lines.append(f'<text x="{LEFT - 8}" y="{y}" text-anchor="end" dominant-baseline="middle">{escape(label)}</text>')
    lines.append(f'<text x="{LEFT + pw / 2:g}" y="{HEIGHT - 16}" text-anchor="middle">{escape(xlabel)}</text>')
    if ylabel:
        lines.append(
            f'<text x="18" y="{TOP + ph / 2:g}" text-anchor="middle" '
            f'transform="rotate(-90 18 {TOP + ph / 2:g})">{escape(ylabel)}</text>'
        )

    for i, s in enumerate(series):
        color = PALETTE[i % len(PALETTE)]
        pts = [(fx(x), fy(y)) for x, y in s.points]
        if len(pts) == 1:
            px, py = pts[0]
            lines.append(f'<circle cx="{_f(px)}" cy="{_f(py)}" r="3" fill="{color}"/>')
        else:
            coords = " ".join(f"{_f(px)},{_f(py)}" for px, py in pts)
            lines.append(f'<polyline fill="none" stroke="{color}" stroke-width="1.5" points="{coords}"/>')
        ly = TOP + 10 + 18 * i
        lx = LEFT + pw + 12
        lines.append(f'<line x1="{lx}" y1="{ly}" x2="{lx + 20}" y2="{ly}" stroke="{color}" stroke-width="2"/>')
        lines.append(f'<text x="{lx + 26}" y="{ly}" dominant-baseline="middle">{escape(s.label)}</text>')
    lines.append("</svg>")
    return "\n".join(lines) + "\n"


def _write(text: str, path) -> None:
    try:
        with open(path, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    except OSError as exc:
        raise OSError(f"cannot write SVG {os.fspath(path)!r}: {exc.strerror}") from exc


def render_svg(trace, fields: Sequence[str], path, axes: str = "log_y", title: str = "") -> None:
    series = trace_series(trace, fields, axes)
    _write(svg_document(series, axes, title, ylabel=", ".join(fields) if len(fields) == 1 else ""), path)


def render_series_svg(series: list[Series], path, axes: str = "log_y", title: str = "", ylabel: str = "") -> None:
    _write(svg_document(series, axes, title, ylabel=ylabel), path)
