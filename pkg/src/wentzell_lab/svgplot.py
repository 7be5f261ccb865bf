"""Minimal deterministic SVG line plots (no plotting dependency)."""

from __future__ import annotations

import math
from dataclasses import dataclass
from xml.sax.saxutils import escape

WIDTH, HEIGHT = 640, 420
LEFT, RIGHT, TOP, BOTTOM = 70, 20, 30, 50
COLORS = ("#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#17becf")


@dataclass(frozen=True)
class Axes:
    xlabel: str = "x"
    ylabel: str = "y"
    title: str = ""
    xlog: bool = False
    ylog: bool = False


def _fmt(v: float) -> str:
    return f"{v:.2f}"


def _ticks(lo, hi, log):
    if log:
        a, b = math.floor(lo), math.ceil(hi)
        step = max(1, (b - a) // 6)
        return [float(k) for k in range(a, b + 1, step) if lo - 1e-12 <= k <= hi + 1e-12]
    span = hi - lo
    raw = span / 5
    mag = 10 ** math.floor(math.log10(raw))
    step = min((m * mag for m in (1, 2, 5, 10) if m * mag >= raw), default=raw)
    start = math.ceil(lo / step) * step
    out, v = [], start
    while v <= hi + 1e-12 * span:
        out.append(v)
        v += step
    return out


def emit_svg_plot(series, axes: Axes | dict, path) -> str:
    """Write an SVG with one polyline per series and return its text.

    ``series`` is a list of ``(label, xs, ys)``. Points that cannot be shown
    on a log axis (nonpositive values) are dropped.
    """
    if isinstance(axes, dict):
        axes = Axes(**axes)
    series = list(series)
    if not series:
        raise ValueError("nothing to plot: empty series list")
    tx = (lambda v: math.log10(v)) if axes.xlog else float
    ty = (lambda v: math.log10(v)) if axes.ylog else float
    cleaned = []
    for label, xs, ys in series:
        pts = [(tx(x), ty(y)) for x, y in zip(xs, ys)
               if math.isfinite(x) and math.isfinite(y)
               and (not axes.xlog or x > 0) and (not axes.ylog or y > 0)]
        cleaned.append((str(label), pts))
    allpts = [p for _, pts in cleaned for p in pts]
    if not allpts:
        raise ValueError("nothing to plot: no finite points")
    xlo, xhi = min(p[0] for p in allpts), max(p[0] for p in allpts)
    ylo, yhi = min(p[1] for p in allpts), max(p[1] for p in allpts)
    if xhi == xlo:
        xlo, xhi = xlo - 0.5, xhi + 0.5
    if yhi == ylo:
        ylo, yhi = ylo - 0.5, yhi + 0.5
    pw, ph = WIDTH - LEFT - RIGHT, HEIGHT - TOP - BOTTOM
    sx = lambda x: LEFT + (x - xlo) / (xhi - xlo) * pw
    sy = lambda y: TOP + (yhi - y) / (yhi - ylo) * ph

    out = [f'<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" '
           f'viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="11">',
           f'<rect x="0" y="0" width="{WIDTH}" height="{HEIGHT}" fill="white"/>',
           f'<rect x="{LEFT}" y="{TOP}" width="{pw}" height="{ph}" fill="none" stroke="black"/>']
    for v in _ticks(xlo, xhi, axes.xlog):
        x = sx(v)
        lab = f"1e{int(v)}" if axes.xlog else f"{v:.4g}"
        out.append(f'<line x1="{_fmt(x)}" y1="{TOP + ph}" x2="{_fmt(x)}" y2="{TOP + ph + 4}" stroke="black"/>')
        out.append(f'<text x="{_fmt(x)}" y="{TOP + ph + 16}" text-anchor="middle">{lab}</text>')
    for v in _ticks(ylo, yhi, axes.ylog):
        y = sy(v)
        lab = f"1e{int(v)}" if axes.ylog else f"{v:.4g}"
        out.append(f'<line x1="{LEFT - 4}" y1="{_fmt(y)}" x2="{LEFT}" y2="{_fmt(y)}" stroke="black"/>')
        out.append(f'<text x="{LEFT - 6}" y="{_fmt(y + 4)}" text-anchor="end">{lab}</text>')
    out.append(f'<text x="{LEFT + pw / 2}" y="{HEIGHT - 10}" text-anchor="middle">{escape(axes.xlabel)}</text>')
    out.append(f'<text x="15" y="{TOP + ph / 2}" text-anchor="middle" '
               f'transform="rotate(-90 15 {TOP + ph / 2})">{escape(axes.ylabel)}</text>')
    if axes.title:
        out.append(f'<text x="{LEFT + pw / 2}" y="18" text-anchor="middle">{escape(axes.title)}</text>')
    for i, (label, pts) in enumerate(cleaned):
        color = COLORS[i % len(COLORS)]
        if pts:
            coords = " ".join(f"{_fmt(sx(x))},{_fmt(sy(y))}" for x, y in pts)
            out.append(f'<polyline fill="none" stroke="{color}" stroke-width="1.5" points="{coords}"/>')
        ly = TOP + 14 + 14 * i
        out.append(f'<line x1="{LEFT + pw - 120}" y1="{ly}" x2="{LEFT + pw - 100}" y2="{ly}" stroke="{color}" stroke-width="2"/>')
        out.append(f'<text x="{LEFT + pw - 95}" y="{ly + 4}">{escape(label)}</text>')
    out.append("</svg>")
    text = "\n".join(out) + "\n"
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(text)
    return text
