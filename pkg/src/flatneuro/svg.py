"""Minimal SVG line plots written directly as XML text."""
from __future__ import annotations

from pathlib import Path
from xml.sax.saxutils import escape

import numpy as np

PALETTE = ("#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b")


def _ticks(lo, hi, n=5):
    if hi <= lo:
        return [lo]
    return list(np.linspace(lo, hi, n))


def line_plot(path, x, series, title="", xlabel="t", width=640, height=360):
    """Write one panel with every entry of ``series`` (name -> y) against ``x``.

    Non-finite samples are dropped.  Returns the path written.
    """
    x = np.asarray(x, dtype=float)
    margin_l, margin_r, margin_t, margin_b = 70, 140, 30, 45
    pw = width - margin_l - margin_r
    ph = height - margin_t - margin_b
    ys = {k: np.asarray(v, dtype=float) for k, v in series.items()}
    finite = np.concatenate([v[np.isfinite(v)] for v in ys.values()] or [np.zeros(1)])
    ylo, yhi = (float(finite.min()), float(finite.max())) if finite.size else (0.0, 1.0)
    if yhi - ylo < 1e-12:
        ylo, yhi = ylo - 0.5, yhi + 0.5
    xlo, xhi = float(np.min(x)), float(np.max(x))
    if xhi - xlo < 1e-12:
        xhi = xlo + 1.0

    def sx(v):
        return margin_l + (v - xlo) / (xhi - xlo) * pw

    def sy(v):
        return margin_t + (yhi - v) / (yhi - ylo) * ph

    out = [f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" '
           f'font-family="sans-serif" font-size="11">',
           f'<rect width="{width}" height="{height}" fill="white"/>',
           f'<rect x="{margin_l}" y="{margin_t}" width="{pw}" height="{ph}" '
           'fill="none" stroke="black"/>']
    for tx in _ticks(xlo, xhi):
        out.append(f'<text x="{sx(tx):.1f}" y="{margin_t + ph + 15}" '
                   f'text-anchor="middle">{tx:.3g}</text>')
    for ty in _ticks(ylo, yhi):
        out.append(f'<text x="{margin_l - 5}" y="{sy(ty) + 4:.1f}" '
                   f'text-anchor="end">{ty:.3g}</text>')
    out.append(f'<text x="{margin_l + pw / 2}" y="{height - 8}" '
               f'text-anchor="middle">{escape(xlabel)}</text>')
    if title:
        out.append(f'<text x="{margin_l + pw / 2}" y="18" text-anchor="middle" '
                   f'font-size="13">{escape(title)}</text>')
    for i, (name, y) in enumerate(ys.items()):
        color = PALETTE[i % len(PALETTE)]
        ok = np.isfinite(y) & np.isfinite(x)
        pts = " ".join(f"{sx(a):.2f},{sy(b):.2f}" for a, b in zip(x[ok], y[ok]))
        out.append(f'<polyline fill="none" stroke="{color}" stroke-width="1.3" points="{pts}"/>')
        ly = margin_t + 14 * (i + 1)
        out.append(f'<line x1="{margin_l + pw + 10}" y1="{ly - 4}" x2="{margin_l + pw + 30}" '
                   f'y2="{ly - 4}" stroke="{color}" stroke-width="2"/>')
        out.append(f'<text x="{margin_l + pw + 35}" y="{ly}">{escape(name)}</text>')
    out.append("</svg>")
    path = Path(path)
    path.write_text("\n".join(out) + "\n")
    return path
