"""Minimal SVG line plots (axes, ticks, legend, polylines).

CSV is the authoritative output format; these plots exist for quick
visual inspection without a plotting dependency.
"""

from __future__ import annotations

import math

import numpy as np

_COLORS = ("#000000", "#c62828", "#2e7d32", "#1565c0", "#ef6c00", "#6a1b9a",
           "#00838f", "#9e9d24")

_W, _H = 800, 500
_ML, _MR, _MT, _MB = 70, 20, 30, 55


def _ticks(lo: float, hi: float, n: int = 5):
    if hi <= lo:
        hi = lo + 1.0
    raw = (hi - lo) / n
    mag = 10.0 ** math.floor(math.log10(raw))
    for mult in (1.0, 2.0, 2.5, 5.0, 10.0):
        if raw <= mult * mag:
            step = mult * mag
            break
    first = math.ceil(lo / step) * step
    out = []
    t = first
    while t <= hi + 1e-12 * step:
        out.append(0.0 if abs(t) < 1e-12 * step else t)
        t += step
    return out


def _fmt(v: float) -> str:
    return f"{v:.6g}"


def line_plot(path: str, x: np.ndarray, series: dict, title: str = "",
              xlabel: str = "t", ylabel: str = "") -> None:
    """Write a line plot of one or more named series against x."""
    x = np.asarray(x, dtype=np.float64)
    ys = {name: np.asarray(v, dtype=np.float64) for name, v in series.items()}
    xlo, xhi = float(x.min()), float(x.max())
    ylo = min(float(v.min()) for v in ys.values())
    yhi = max(float(v.max()) for v in ys.values())
    if yhi == ylo:
        yhi = ylo + 1.0
    pad = 0.05 * (yhi - ylo)
    ylo -= pad
    yhi += pad
    pw = _W - _ML - _MR
    ph = _H - _MT - _MB

    def sx(v):
        return _ML + (v - xlo) / (xhi - xlo) * pw

    def sy(v):
        return _MT + ph - (v - ylo) / (yhi - ylo) * ph

    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{_W}" height="{_H}" '
        f'viewBox="0 0 {_W} {_H}">',
        f'<rect width="{_W}" height="{_H}" fill="white"/>',
        f'<rect x="{_ML}" y="{_MT}" width="{pw}" height="{ph}" fill="none" '
        'stroke="#444" stroke-width="1"/>',
    ]
    if title:
        parts.append(
            f'<text x="{_W / 2}" y="{_MT - 10}" text-anchor="middle" '
            f'font-family="sans-serif" font-size="14">{title}</text>'
        )
    for tx in _ticks(xlo, xhi):
        px = sx(tx)
        parts.append(
            f'<line x1="{px:.1f}" y1="{_MT + ph}" x2="{px:.1f}" y2="{_MT + ph + 5}" '
            'stroke="#444"/>'
        )
        parts.append(
            f'<text x="{px:.1f}" y="{_MT + ph + 18}" text-anchor="middle" '
            f'font-family="sans-serif" font-size="11">{_fmt(tx)}</text>'
        )
    for ty in _ticks(ylo, yhi):
        py = sy(ty)
        parts.append(
            f'<line x1="{_ML - 5}" y1="{py:.1f}" x2="{_ML}" y2="{py:.1f}" stroke="#444"/>'
        )
        parts.append(
            f'<text x="{_ML - 8}" y="{py + 4:.1f}" text-anchor="end" '
            f'font-family="sans-serif" font-size="11">{_fmt(ty)}</text>'
        )
    parts.append(
        f'<text x="{_ML + pw / 2}" y="{_H - 12}" text-anchor="middle" '
        f'font-family="sans-serif" font-size="12">{xlabel}</text>'
    )
    if ylabel:
        parts.append(
            f'<text x="18" y="{_MT + ph / 2}" text-anchor="middle" '
            f'font-family="sans-serif" font-size="12" '
            f'transform="rotate(-90 18 {_MT + ph / 2})">{ylabel}</text>'
        )
    for idx, (name, v) in enumerate(ys.items()):
        color = _COLORS[idx % len(_COLORS)]
        pts = " ".join(f"{sx(a):.2f},{sy(b):.2f}" for a, b in zip(x, v))
        parts.append(
            f'<polyline fill="none" stroke="{color}" stroke-width="1.5" points="{pts}"/>'
        )
        ly = _MT + 16 + 16 * idx
        parts.append(
            f'<line x1="{_ML + pw - 130}" y1="{ly - 4}" x2="{_ML + pw - 105}" '
            f'y2="{ly - 4}" stroke="{color}" stroke-width="2"/>'
        )
        parts.append(
            f'<text x="{_ML + pw - 100}" y="{ly}" font-family="sans-serif" '
            f'font-size="11">{name}</text>'
        )
    parts.append("</svg>")
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("\n".join(parts) + "\n")
