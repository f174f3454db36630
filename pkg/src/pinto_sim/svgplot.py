"""Minimal SVG line, scatter and bar charts written by hand.

Output depends only on the data, so identical inputs give identical files.
"""
from __future__ import annotations

import math
from xml.sax.saxutils import escape

import numpy as np

__all__ = ["Series", "line_plot", "bar_plot", "nice_ticks"]

W, H = 640, 420
LEFT, RIGHT, TOP, BOTTOM = 70, 20, 40, 55
COLORS = ("#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#17becf", "#8c564b")


class Series:
    def __init__(self, label, x, y, points=False):
        self.label = label
        self.x = np.asarray(x, dtype=float)
        self.y = np.asarray(y, dtype=float)
        self.points = points


def nice_ticks(lo, hi, n=5):
    if not (math.isfinite(lo) and math.isfinite(hi)):
        return [0.0]
    if hi <= lo:
        hi = lo + 1.0
    raw = (hi - lo) / n
    mag = 10 ** math.floor(math.log10(raw))
    step = min((m * mag for m in (1, 2, 2.5, 5, 10) if m * mag >= raw), default=10 * mag)
    start = math.ceil(lo / step - 1e-9) * step
    ticks = []
    v = start
    while v <= hi + 1e-9 * step:
        ticks.append(0.0 if abs(v) < 1e-12 * step else v)
        v += step
    return ticks


def _fmt(v):
    return f"{v:.2f}".rstrip("0").rstrip(".")


def _lbl(v):
    return f"{v:.6g}"


def _frame(title, xlabel, ylabel, xlo, xhi, ylo, yhi):
    pw, ph = W - LEFT - RIGHT, H - TOP - BOTTOM
    sx = lambda x: LEFT + (x - xlo) / (xhi - xlo) * pw
    sy = lambda y: TOP + ph - (y - ylo) / (yhi - ylo) * ph
    out = [f'<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{H}" '
           f'viewBox="0 0 {W} {H}" font-family="sans-serif" font-size="12">',
           f'<rect width="{W}" height="{H}" fill="white"/>',
           f'<text x="{W / 2}" y="22" text-anchor="middle" font-size="14">{escape(title)}</text>',
           f'<rect x="{LEFT}" y="{TOP}" width="{pw}" height="{ph}" fill="none" stroke="black"/>']
    return out, sx, sy


def _axes(out, sx, sy, xt, yt, xlabel, ylabel):
    base = H - BOTTOM
    for v in xt:
        x = _fmt(sx(v))
        out.append(f'<line x1="{x}" y1="{base}" x2="{x}" y2="{base + 5}" stroke="black"/>')
        out.append(f'<text x="{x}" y="{base + 18}" text-anchor="middle">{_lbl(v)}</text>')
    for v in yt:
        y = _fmt(sy(v))
        out.append(f'<line x1="{LEFT - 5}" y1="{y}" x2="{LEFT}" y2="{y}" stroke="black"/>')
        out.append(f'<text x="{LEFT - 8}" y="{y}" text-anchor="end" '
                   f'dominant-baseline="middle">{_lbl(v)}</text>')
    out.append(f'<text x="{LEFT + (W - LEFT - RIGHT) / 2}" y="{H - 12}" '
               f'text-anchor="middle">{escape(xlabel)}</text>')
    cy = TOP + (H - TOP - BOTTOM) / 2
    out.append(f'<text x="16" y="{cy}" text-anchor="middle" '
               f'transform="rotate(-90 16 {cy})">{escape(ylabel)}</text>')


def _legend(out, labels):
    for i, label in enumerate(labels):
        y = TOP + 14 + 16 * i
        c = COLORS[i % len(COLORS)]
        out.append(f'<line x1="{W - RIGHT - 130}" y1="{y}" x2="{W - RIGHT - 110}" y2="{y}" '
                   f'stroke="{c}" stroke-width="2"/>')
        out.append(f'<text x="{W - RIGHT - 104}" y="{y}" dominant-baseline="middle">'
                   f'{escape(label)}</text>')


def line_plot(series, title="", xlabel="", ylabel="", equal_aspect=False) -> str:
    xs = np.concatenate([s.x[np.isfinite(s.x)] for s in series] or [np.zeros(1)])
    ys = np.concatenate([s.y[np.isfinite(s.y)] for s in series] or [np.zeros(1)])
    xlo, xhi = (float(xs.min()), float(xs.max())) if xs.size else (0.0, 1.0)
    ylo, yhi = (float(ys.min()), float(ys.max())) if ys.size else (0.0, 1.0)
    if equal_aspect:
        pw, ph = W - LEFT - RIGHT, H - TOP - BOTTOM
        span = max((xhi - xlo) / pw, (yhi - ylo) / ph, 1e-12)
        cx, cy = (xlo + xhi) / 2, (ylo + yhi) / 2
        xlo, xhi = cx - span * pw / 2, cx + span * pw / 2
        ylo, yhi = cy - span * ph / 2, cy + span * ph / 2
    xt, yt = nice_ticks(xlo, xhi), nice_ticks(ylo, yhi)
    if not equal_aspect:
        xlo, xhi = min(xlo, xt[0]), max(xhi, xt[-1])
        ylo, yhi = min(ylo, yt[0]), max(yhi, yt[-1])
    if xhi <= xlo:
        xhi = xlo + 1.0
    if yhi <= ylo:
        yhi = ylo + 1.0
    out, sx, sy = _frame(title, xlabel, ylabel, xlo, xhi, ylo, yhi)
    _axes(out, sx, sy, [v for v in xt if xlo <= v <= xhi], [v for v in yt if ylo <= v <= yhi],
          xlabel, ylabel)
    for i, s in enumerate(series):
        c = COLORS[i % len(COLORS)]
        ok = np.isfinite(s.x) & np.isfinite(s.y)
        if s.points:
            for x, y in zip(s.x[ok], s.y[ok]):
                out.append(f'<circle cx="{_fmt(sx(x))}" cy="{_fmt(sy(y))}" r="1.5" fill="{c}"/>')
        elif ok.any():
            pts = " ".join(f"{_fmt(sx(x))},{_fmt(sy(y))}" for x, y in zip(s.x[ok], s.y[ok]))
            out.append(f'<polyline points="{pts}" fill="none" stroke="{c}" stroke-width="1.5"/>')
    _legend(out, [s.label for s in series if s.label])
    out.append("</svg>")
    return "\n".join(out) + "\n"


def bar_plot(labels, values, title="", ylabel="") -> str:
    vals = [float(v) for v in values]
    yt = nice_ticks(0.0, max(vals + [1e-12]))
    ylo, yhi = 0.0, max(yt[-1], max(vals + [1e-12]))
    out, _, sy = _frame(title, "", ylabel, 0.0, 1.0, ylo, yhi)
    _axes(out, lambda x: x, sy, [], yt, "", ylabel)
    pw = W - LEFT - RIGHT
    slot = pw / max(len(vals), 1)
    for i, (lab, v) in enumerate(zip(labels, vals)):
        x0 = LEFT + slot * (i + 0.2)
        top = sy(v)
        out.append(f'<rect x="{_fmt(x0)}" y="{_fmt(top)}" width="{_fmt(slot * 0.6)}" '
                   f'height="{_fmt(H - BOTTOM - top)}" fill="{COLORS[i % len(COLORS)]}"/>')
        out.append(f'<text x="{_fmt(x0 + slot * 0.3)}" y="{H - BOTTOM + 18}" '
                   f'text-anchor="middle">{escape(str(lab))}</text>')
        out.append(f'<text x="{_fmt(x0 + slot * 0.3)}" y="{_fmt(top - 5)}" '
                   f'text-anchor="middle">{v:.3g}</text>')
    out.append("</svg>")
    return "\n".join(out) + "\n"
