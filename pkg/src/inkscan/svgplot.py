"""Minimal standalone SVG line charts."""

from __future__ import annotations

from typing import Sequence
from xml.sax.saxutils import escape

import numpy as np

# stroke colors, cycled in order
STROKES = (
    "#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e",
    "#8c564b", "#e377c2", "#17becf", "#bcbd22", "#7f7f7f",
    "#393b79", "#637939",
)

WIDTH, HEIGHT = 640, 400
MARGIN_L, MARGIN_R, MARGIN_T, MARGIN_B = 70, 130, 40, 50


def _fmt(v: float) -> str:
    return f"{v:.2f}"


def _span(lo: float, hi: float) -> tuple:
    if hi > lo:
        return lo, hi
    pad = abs(lo) * 0.05 or 0.5
    return lo - pad, hi + pad


def line_chart(xs: Sequence[float], series: Sequence[tuple], title: str,
               xlabel: str = "wavelength (nm)", ylabel: str = "reflectance") -> str:
    """Render ``series`` (``(label, ys)`` pairs) over a shared x axis.

    Each series becomes one ``<polyline>``. Axis ticks show the data min/max.
    """
    xs = np.asarray(xs, dtype=np.float64)
    ys_all = [np.asarray(ys, dtype=np.float64) for _, ys in series]
    x_lo, x_hi = _span(float(xs.min()), float(xs.max()))
    if ys_all:
        y_lo = min(float(y.min()) for y in ys_all)
        y_hi = max(float(y.max()) for y in ys_all)
    else:
        y_lo, y_hi = 0.0, 1.0
    y_lo, y_hi = _span(y_lo, y_hi)
    pw = WIDTH - MARGIN_L - MARGIN_R
    ph = HEIGHT - MARGIN_T - MARGIN_B

    def px(x):
        return MARGIN_L + (x - x_lo) / (x_hi - x_lo) * pw

    def py(y):
        return MARGIN_T + ph - (y - y_lo) / (y_hi - y_lo) * ph

    out = [
        '<?xml version="1.0" encoding="UTF-8" standalone="yes"?>',
        f'<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{WIDTH}" height="{HEIGHT}" '
        f'viewBox="0 0 {WIDTH} {HEIGHT}">',
        f'<rect x="0" y="0" width="{WIDTH}" height="{HEIGHT}" fill="white"/>',
        f'<text x="{WIDTH / 2:.0f}" y="22" text-anchor="middle" font-size="15">{escape(title)}</text>',
        f'<g stroke="black" stroke-width="1">'
        f'<line x1="{MARGIN_L}" y1="{MARGIN_T + ph}" x2="{MARGIN_L + pw}" y2="{MARGIN_T + ph}"/>'
        f'<line x1="{MARGIN_L}" y1="{MARGIN_T}" x2="{MARGIN_L}" y2="{MARGIN_T + ph}"/></g>',
        '<g font-size="11">',
        f'<text x="{MARGIN_L}" y="{MARGIN_T + ph + 16}" text-anchor="middle">{x_lo:.1f}</text>',
        f'<text x="{MARGIN_L + pw}" y="{MARGIN_T + ph + 16}" text-anchor="middle">{x_hi:.1f}</text>',
        f'<text x="{MARGIN_L - 6}" y="{MARGIN_T + ph + 4}" text-anchor="end">{y_lo:.3f}</text>',
        f'<text x="{MARGIN_L - 6}" y="{MARGIN_T + 4}" text-anchor="end">{y_hi:.3f}</text>',
        f'<text x="{MARGIN_L + pw / 2:.0f}" y="{HEIGHT - 12}" text-anchor="middle">{escape(xlabel)}</text>',
        f'<text x="16" y="{MARGIN_T + ph / 2:.0f}" text-anchor="middle" '
        f'transform="rotate(-90 16 {MARGIN_T + ph / 2:.0f})">{escape(ylabel)}</text>',
        '</g>',
    ]
    for i, ((label, _), ys) in enumerate(zip(series, ys_all)):
        color = STROKES[i % len(STROKES)]
        pts = " ".join(f"{_fmt(px(x))},{_fmt(py(y))}" for x, y in zip(xs, ys))
        out.append(f'<polyline fill="none" stroke="{color}" stroke-width="1.5" points="{pts}"/>')
        ly = MARGIN_T + 10 + 16 * i
        lx = MARGIN_L + pw + 12
        out.append(f'<line x1="{lx}" y1="{ly}" x2="{lx + 18}" y2="{ly}" stroke="{color}" stroke-width="2"/>')
        out.append(f'<text x="{lx + 24}" y="{ly + 4}" font-size="11">{escape(str(label))}</text>')
    out.append("</svg>")
    return "\n".join(out) + "\n"
