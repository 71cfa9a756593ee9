"""Minimal self-contained SVG line plots (linear or log-scaled y axis)."""

from __future__ import annotations

from pathlib import Path
from xml.sax.saxutils import escape

import numpy as np

_COLORS = ("#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b",
           "#e377c2", "#7f7f7f", "#bcbd22", "#17becf")
WIDTH, HEIGHT = 640, 420
MARGIN = dict(left=70, right=170, top=40, bottom=50)


def _ticks(lo, hi, logy):
    if logy:
        return [10.0**e for e in range(int(np.floor(lo)), int(np.ceil(hi)) + 1)]
    return list(np.linspace(lo, hi, 5))


def line_plot(path, series, title="", xlabel="", ylabel="", logy=False, vlines=()):
    """Write an SVG with one polyline per ``(label, x, y)`` entry of ``series``.

    Non-finite points and, for log axes, non-positive values are skipped.
    ``vlines`` draws dashed vertical markers (e.g. the end of training).
    """
    cleaned = []
    for label, x, y in series:
        x = np.asarray(x, dtype=float)
        y = np.asarray(y, dtype=float)
        keep = np.isfinite(x) & np.isfinite(y)
        if logy:
            keep &= y > 0
        cleaned.append((label, x[keep], np.log10(y[keep]) if logy else y[keep]))
    xs = np.concatenate([c[1] for c in cleaned] + [np.asarray(vlines, float)])
    ys = np.concatenate([c[2] for c in cleaned])
    if xs.size == 0 or ys.size == 0:
        xs, ys = np.array([0.0, 1.0]), np.array([0.0, 1.0])
    x0, x1 = float(xs.min()), float(xs.max())
    y0, y1 = float(ys.min()), float(ys.max())
    if logy:
        y0, y1 = np.floor(y0), np.ceil(y1)
    if x1 == x0:
        x1 = x0 + 1.0
    if y1 == y0:
        y1 = y0 + 1.0

    pw = WIDTH - MARGIN["left"] - MARGIN["right"]
    ph = HEIGHT - MARGIN["top"] - MARGIN["bottom"]

    def px(x):
        return MARGIN["left"] + (x - x0) / (x1 - x0) * pw

    def py(y):
        return MARGIN["top"] + (1 - (y - y0) / (y1 - y0)) * ph

    out = [f'<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" '
           f'font-family="sans-serif" font-size="12">',
           f'<rect width="{WIDTH}" height="{HEIGHT}" fill="white"/>',
           f'<rect x="{MARGIN["left"]}" y="{MARGIN["top"]}" width="{pw}" height="{ph}" '
           f'fill="none" stroke="black"/>',
           f'<text x="{WIDTH / 2:.1f}" y="22" text-anchor="middle" font-size="14">'
           f'{escape(title)}</text>',
           f'<text x="{MARGIN["left"] + pw / 2:.1f}" y="{HEIGHT - 10}" '
           f'text-anchor="middle">{escape(xlabel)}</text>',
           f'<text x="16" y="{MARGIN["top"] + ph / 2:.1f}" text-anchor="middle" '
           f'transform="rotate(-90 16 {MARGIN["top"] + ph / 2:.1f})">{escape(ylabel)}</text>']
    for t in _ticks(y0, y1, logy):
        v = np.log10(t) if logy else t
        out.append(f'<line x1="{MARGIN["left"]}" x2="{MARGIN["left"] + pw}" '
                   f'y1="{py(v):.1f}" y2="{py(v):.1f}" stroke="#ddd"/>')
        out.append(f'<text x="{MARGIN["left"] - 6}" y="{py(v) + 4:.1f}" '
                   f'text-anchor="end">{t:.3g}</text>')
    for t in np.linspace(x0, x1, 5):
        out.append(f'<text x="{px(t):.1f}" y="{MARGIN["top"] + ph + 16}" '
                   f'text-anchor="middle">{t:.4g}</text>')
    for v in vlines:
        out.append(f'<line x1="{px(v):.1f}" x2="{px(v):.1f}" y1="{MARGIN["top"]}" '
                   f'y2="{MARGIN["top"] + ph}" stroke="black" stroke-dasharray="4 3"/>')
    for i, (label, x, y) in enumerate(cleaned):
        color = _COLORS[i % len(_COLORS)]
        if x.size:
            pts = " ".join(f"{px(a):.2f},{py(b):.2f}" for a, b in zip(x, y))
            out.append(f'<polyline points="{pts}" fill="none" stroke="{color}" '
                       f'stroke-width="1.5"/>')
        ly = MARGIN["top"] + 14 + 16 * i
        lx = MARGIN["left"] + pw + 10
        out.append(f'<line x1="{lx}" x2="{lx + 20}" y1="{ly - 4}" y2="{ly - 4}" '
                   f'stroke="{color}" stroke-width="2"/>')
        out.append(f'<text x="{lx + 26}" y="{ly}">{escape(str(label))}</text>')
    out.append("</svg>")
    Path(path).write_text("\n".join(out) + "\n")
    return path
