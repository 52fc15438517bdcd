"""Minimal deterministic SVG line charts.

Data coordinates map to the canvas by the affine transform::

    px = PLOT_LEFT + (x - xmin) / (xmax - xmin) * PLOT_WIDTH
    py = PLOT_TOP + (ymax - y) / (ymax - ymin) * PLOT_HEIGHT

with ``(xmin, xmax, ymin, ymax)`` recorded in the document's ``<desc>``.
"""

from __future__ import annotations

import math
import os
from dataclasses import dataclass
from xml.sax.saxutils import escape

import numpy as np

__all__ = ["Series", "render_svg", "FIGURE_STYLES", "to_canvas"]

WIDTH, HEIGHT = 640, 440
PLOT_LEFT, PLOT_TOP = 80.0, 40.0
PLOT_WIDTH, PLOT_HEIGHT = 520.0, 320.0
COLORS = ("#000000", "#d62728", "#1f77b4", "#2ca02c", "#9467bd", "#ff7f0e")

FIGURE_STYLES = {
    "fig2": ("Level spacing, lambda = 1", "level n", "D(n) [J]"),
    "fig3": ("Transfer fidelity, tan^2 field", "t [1/J]", "F(t)"),
    "fig4": ("Maximal fidelity vs effective length", "L_eff [sites]", "max F"),
    "fig5": ("Maximal fidelity vs lambda", "lambda", "max F"),
    "fig6": ("Spectrum, strong field", "level n", "E_n - E_0 [J]"),
    "fig7": ("Transfer fidelity, strong field", "t [1/J]", "F(t)"),
    "fig8": ("Transfer fidelity vs distance, strong field", "t [1/J]", "F(t)"),
    "custom": ("Transfer fidelity", "t [1/J]", "F(t)"),
}


@dataclass
class Series:
    name: str
    x: np.ndarray
    y: np.ndarray


def _fmt(v: float) -> str:
    return format(float(v), ".12g")


def _nice_ticks(lo: float, hi: float, count: int = 5) -> list[float]:
    span = hi - lo
    raw = span / count
    mag = 10 ** math.floor(math.log10(raw))
    step = min((m * mag for m in (1, 2, 5, 10) if m * mag >= raw), default=raw)
    first = math.ceil(lo / step) * step
    ticks = []
    v = first
    while v <= hi + 1e-9 * span:
        ticks.append(0.0 if abs(v) < 1e-12 * step else v)
        v += step
    return ticks


def _range(values: list[np.ndarray]) -> tuple[float, float]:
    finite = np.concatenate([v[np.isfinite(v)] for v in values])
    lo, hi = float(finite.min()), float(finite.max())
    if lo == hi:
        pad = abs(lo) * 0.05 or 1.0
        lo, hi = lo - pad, hi + pad
    return lo, hi


def to_canvas(x, y, bounds):
    xmin, xmax, ymin, ymax = bounds
    px = PLOT_LEFT + (np.asarray(x, float) - xmin) / (xmax - xmin) * PLOT_WIDTH
    py = PLOT_TOP + (ymax - np.asarray(y, float)) / (ymax - ymin) * PLOT_HEIGHT
    return px, py


def render_svg(series: list[Series], path, style: str = "custom", *, title=None, xlabel=None, ylabel=None) -> str:
    """Write a standalone SVG 1.1 line chart with axes and a legend."""
    series = [Series(s.name, np.asarray(s.x, float), np.asarray(s.y, float)) for s in series]
    series = [s for s in series if s.x.size]
    if not series:
        raise ValueError("render_svg needs at least one non-empty series")
    d_title, d_x, d_y = FIGURE_STYLES.get(style, FIGURE_STYLES["custom"])
    title, xlabel, ylabel = title or d_title, xlabel or d_x, ylabel or d_y

    xmin, xmax = _range([s.x for s in series])
    ymin, ymax = _range([s.y for s in series])
    bounds = (xmin, xmax, ymin, ymax)

    out = [
        '<?xml version="1.0" encoding="UTF-8" standalone="no"?>',
        f'<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{WIDTH}" height="{HEIGHT}" '
        f'viewBox="0 0 {WIDTH} {HEIGHT}">',
        f"<title>{escape(title)}</title>",
        f"<desc>xmin={_fmt(xmin)} xmax={_fmt(xmax)} ymin={_fmt(ymin)} ymax={_fmt(ymax)} "
        f"left={_fmt(PLOT_LEFT)} top={_fmt(PLOT_TOP)} width={_fmt(PLOT_WIDTH)} height={_fmt(PLOT_HEIGHT)}</desc>",
        f'<rect x="0" y="0" width="{WIDTH}" height="{HEIGHT}" fill="#ffffff"/>',
        f'<g class="axes" stroke="#000000" stroke-width="1" fill="none">'
        f'<rect x="{_fmt(PLOT_LEFT)}" y="{_fmt(PLOT_TOP)}" width="{_fmt(PLOT_WIDTH)}" height="{_fmt(PLOT_HEIGHT)}"/></g>',
    ]
    tick = ['<g class="ticks" font-family="sans-serif" font-size="11" fill="#000000">']
    for xv in _nice_ticks(xmin, xmax):
        px, _ = to_canvas(xv, ymin, bounds)
        y0 = PLOT_TOP + PLOT_HEIGHT
        tick.append(f'<line x1="{_fmt(px)}" y1="{_fmt(y0)}" x2="{_fmt(px)}" y2="{_fmt(y0 + 5)}" stroke="#000000"/>')
        tick.append(f'<text x="{_fmt(px)}" y="{_fmt(y0 + 18)}" text-anchor="middle">{xv:.4g}</text>')
    for yv in _nice_ticks(ymin, ymax):
        _, py = to_canvas(xmin, yv, bounds)
        tick.append(f'<line x1="{_fmt(PLOT_LEFT - 5)}" y1="{_fmt(py)}" x2="{_fmt(PLOT_LEFT)}" y2="{_fmt(py)}" stroke="#000000"/>')
        tick.append(f'<text x="{_fmt(PLOT_LEFT - 8)}" y="{_fmt(py + 4)}" text-anchor="end">{yv:.4g}</text>')
    tick.append("</g>")
    out.extend(tick)
    out.append(
        f'<g class="labels" font-family="sans-serif" font-size="13" fill="#000000">'
        f'<text x="{WIDTH / 2:g}" y="22" text-anchor="middle">{escape(title)}</text>'
        f'<text x="{PLOT_LEFT + PLOT_WIDTH / 2:g}" y="{HEIGHT - 30:g}" text-anchor="middle">{escape(xlabel)}</text>'
        f'<text x="18" y="{PLOT_TOP + PLOT_HEIGHT / 2:g}" text-anchor="middle" '
        f'transform="rotate(-90 18 {PLOT_TOP + PLOT_HEIGHT / 2:g})">{escape(ylabel)}</text></g>'
    )

    out.append('<g class="data" fill="none" stroke-width="1.2">')
    for k, s in enumerate(series):
        keep = np.isfinite(s.x) & np.isfinite(s.y)
        px, py = to_canvas(s.x[keep], s.y[keep], bounds)
        points = " ".join(f"{_fmt(a)},{_fmt(b)}" for a, b in zip(px, py))
        out.append(
            f'<polyline class="series" id="series-{k}" stroke="{COLORS[k % len(COLORS)]}" points="{points}"/>'
        )
    out.append("</g>")

    out.append('<g class="legend" font-family="sans-serif" font-size="11">')
    for k, s in enumerate(series):
        y = PLOT_TOP + 14 + 16 * k
        x = PLOT_LEFT + PLOT_WIDTH - 150
        out.append(
            f'<g class="legend-entry"><line x1="{_fmt(x)}" y1="{_fmt(y)}" x2="{_fmt(x + 20)}" y2="{_fmt(y)}" '
            f'stroke="{COLORS[k % len(COLORS)]}" stroke-width="2"/>'
            f'<text x="{_fmt(x + 26)}" y="{_fmt(y + 4)}" fill="#000000">{escape(s.name)}</text></g>'
        )
    out.append("</g>")
    out.append("</svg>")

    path = os.fspath(path)
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("\n".join(out) + "\n")
    return path
