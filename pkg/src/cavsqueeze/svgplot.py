"""Minimal deterministic SVG line plots and heatmaps."""

from __future__ import annotations

import math
from xml.sax.saxutils import escape

WIDTH, HEIGHT = 640, 420
MARGIN = dict(left=70, right=150, top=40, bottom=55)
PALETTE = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b", "#e377c2", "#17becf"]


def _fmt(x):
    return f"{x:.6g}"


def _ticks(lo, hi, n=5):
    if hi == lo:
        return [lo]
    raw = (hi - lo) / n
    mag = 10 ** math.floor(math.log10(raw))
    step = min((m * mag for m in (1, 2, 5, 10) if m * mag >= raw), default=raw)
    start = math.ceil(lo / step) * step
    out, v = [], start
    while v <= hi + 1e-9 * step:
        out.append(round(v, 12))
        v += step
    return out


class _Frame:
    def __init__(self, xlim, ylim, logx=False):
        self.logx = logx
        self.x0, self.x1 = (math.log10(xlim[0]), math.log10(xlim[1])) if logx else xlim
        self.y0, self.y1 = ylim
        if self.x1 == self.x0:
            self.x1 = self.x0 + 1
        if self.y1 == self.y0:
            self.y1 = self.y0 + 1
        self.pw = WIDTH - MARGIN["left"] - MARGIN["right"]
        self.ph = HEIGHT - MARGIN["top"] - MARGIN["bottom"]

    def x(self, v):
        v = math.log10(v) if self.logx else v
        return MARGIN["left"] + (v - self.x0) / (self.x1 - self.x0) * self.pw

    def y(self, v):
        return MARGIN["top"] + (1 - (v - self.y0) / (self.y1 - self.y0)) * self.ph


def _axes(frame, xlabel, ylabel, title, xlim):
    left, top = MARGIN["left"], MARGIN["top"]
    parts = [
        f'<rect x="{left}" y="{top}" width="{frame.pw}" height="{frame.ph}" '
        'fill="none" stroke="black"/>',
        f'<text x="{WIDTH / 2 - MARGIN["right"] / 2 + MARGIN["left"] / 2}" y="24" '
        f'text-anchor="middle" font-size="15">{escape(title)}</text>',
        f'<text x="{left + frame.pw / 2}" y="{HEIGHT - 12}" text-anchor="middle" '
        f'font-size="13">{escape(xlabel)}</text>',
        f'<text transform="translate(18,{top + frame.ph / 2}) rotate(-90)" '
        f'text-anchor="middle" font-size="13">{escape(ylabel)}</text>',
    ]
    if frame.logx:
        xt = [10.0 ** k for k in range(math.ceil(frame.x0 - 1e-9), math.floor(frame.x1 + 1e-9) + 1)]
    else:
        xt = _ticks(*xlim)
    for v in xt:
        px = frame.x(v)
        parts.append(f'<line x1="{_fmt(px)}" y1="{top + frame.ph}" x2="{_fmt(px)}" '
                     f'y2="{top + frame.ph + 5}" stroke="black"/>')
        parts.append(f'<text x="{_fmt(px)}" y="{top + frame.ph + 19}" text-anchor="middle" '
                     f'font-size="11">{_fmt(v)}</text>')
    for v in _ticks(frame.y0, frame.y1):
        py = frame.y(v)
        parts.append(f'<line x1="{left - 5}" y1="{_fmt(py)}" x2="{left}" y2="{_fmt(py)}" stroke="black"/>')
        parts.append(f'<text x="{left - 8}" y="{_fmt(py + 4)}" text-anchor="end" '
                     f'font-size="11">{_fmt(v)}</text>')
    return parts


def _document(parts):
    head = (f'<?xml version="1.0" encoding="UTF-8"?>\n'
            f'<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" '
            f'viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif">\n'
            f'<rect width="{WIDTH}" height="{HEIGHT}" fill="white"/>\n')
    return head + "\n".join(parts) + "\n</svg>\n"


def line_plot(series, xlabel="", ylabel="", title="", logx=False, markers=None):
    """SVG text for ``series = [(label, xs, ys), ...]``.

    ``markers`` optionally maps a label to "circle" or "diamond".
    """
    xs_all = [x for _, xs, _ in series for x in xs]
    ys_all = [y for _, _, ys in series for y in ys if math.isfinite(y)]
    xlim = (min(xs_all), max(xs_all))
    ylim = (min(ys_all), max(ys_all))
    pad = 0.05 * (ylim[1] - ylim[0] or 1)
    frame = _Frame(xlim, (ylim[0] - pad, ylim[1] + pad), logx)
    parts = _axes(frame, xlabel, ylabel, title, xlim)
    markers = markers or {}
    for k, (label, xs, ys) in enumerate(series):
        colour = PALETTE[k % len(PALETTE)]
        pts = " ".join(f"{_fmt(frame.x(x))},{_fmt(frame.y(y))}" for x, y in zip(xs, ys) if math.isfinite(y))
        parts.append(f'<polyline points="{pts}" fill="none" stroke="{colour}" stroke-width="1.5"/>')
        shape = markers.get(label)
        if shape:
            stride = max(1, len(xs) // 10)
            for x, y in list(zip(xs, ys))[::stride]:
                px, py = frame.x(x), frame.y(y)
                if shape == "circle":
                    parts.append(f'<circle cx="{_fmt(px)}" cy="{_fmt(py)}" r="3" fill="none" stroke="{colour}"/>')
                else:
                    parts.append(f'<polygon points="{_fmt(px)},{_fmt(py - 4)} {_fmt(px + 4)},{_fmt(py)} '
                                 f'{_fmt(px)},{_fmt(py + 4)} {_fmt(px - 4)},{_fmt(py)}" fill="none" '
                                 f'stroke="{colour}"/>')
        ly = MARGIN["top"] + 14 + 18 * k
        lx = WIDTH - MARGIN["right"] + 10
        parts.append(f'<line x1="{lx}" y1="{ly - 4}" x2="{lx + 20}" y2="{ly - 4}" stroke="{colour}" '
                     'stroke-width="2"/>')
        parts.append(f'<text x="{lx + 25}" y="{ly}" font-size="11">{escape(label)}</text>')
    return _document(parts)


def _colour(v, lo, hi):
    # white -> dark blue ramp
    f = 0.0 if hi == lo else min(max((v - lo) / (hi - lo), 0.0), 1.0)
    r = int(round(255 * (1 - f) + 8 * f))
    g = int(round(255 * (1 - f) + 48 * f))
    b = int(round(255 * (1 - f) + 107 * f))
    return f"#{r:02x}{g:02x}{b:02x}"


def heatmap(xs, ys, grid, xlabel="", ylabel="", title="", colorbar_label=""):
    """SVG text for ``grid[i][j]`` at ``(xs[j], ys[i])`` on a regular grid."""
    vals = [v for row in grid for v in row if math.isfinite(v)]
    lo, hi = min(vals), max(vals)
    dx = (xs[-1] - xs[0]) / max(len(xs) - 1, 1)
    dy = (ys[-1] - ys[0]) / max(len(ys) - 1, 1)
    xlim = (xs[0] - dx / 2, xs[-1] + dx / 2)
    frame = _Frame(xlim, (ys[0] - dy / 2, ys[-1] + dy / 2))
    parts = []
    for i, y in enumerate(ys):
        for j, x in enumerate(xs):
            x0, x1 = frame.x(x - dx / 2), frame.x(x + dx / 2)
            y0, y1 = frame.y(y + dy / 2), frame.y(y - dy / 2)
            parts.append(f'<rect x="{_fmt(x0)}" y="{_fmt(y0)}" width="{_fmt(x1 - x0 + 0.3)}" '
                         f'height="{_fmt(y1 - y0 + 0.3)}" fill="{_colour(grid[i][j], lo, hi)}"/>')
    parts += _axes(frame, xlabel, ylabel, title, xlim)
    bx = WIDTH - MARGIN["right"] + 20
    steps = 20
    for k in range(steps):
        v = hi - (hi - lo) * k / (steps - 1)
        y = MARGIN["top"] + k * frame.ph / steps
        parts.append(f'<rect x="{bx}" y="{_fmt(y)}" width="18" height="{_fmt(frame.ph / steps + 0.5)}" '
                     f'fill="{_colour(v, lo, hi)}"/>')
    parts.append(f'<text x="{bx + 24}" y="{MARGIN["top"] + 10}" font-size="11">{_fmt(hi)}</text>')
    parts.append(f'<text x="{bx + 24}" y="{MARGIN["top"] + frame.ph}" font-size="11">{_fmt(lo)}</text>')
    parts.append(f'<text x="{bx}" y="{MARGIN["top"] - 8}" font-size="11">{escape(colorbar_label)}</text>')
    return _document(parts)
