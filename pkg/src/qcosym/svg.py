"""Bare-bones SVG line plots (one stacked panel per series)."""
from __future__ import annotations

from pathlib import Path

import numpy as np

_W, _H, _PAD = 640, 180, 40


def _polyline(x: np.ndarray, y: np.ndarray, top: float) -> str:
    x0, x1 = float(np.min(x)), float(np.max(x))
    y0, y1 = float(np.min(y)), float(np.max(y))
    if x1 == x0:
        x1 = x0 + 1.0
    if y1 == y0:
        y0, y1 = y0 - 0.5, y1 + 0.5
    px = _PAD + (x - x0) / (x1 - x0) * (_W - 2 * _PAD)
    py = top + _H - _PAD / 2 - (y - y0) / (y1 - y0) * (_H - _PAD)
    pts = " ".join(f"{a:.2f},{b:.2f}" for a, b in zip(px, py))
    return (f'<polyline fill="none" stroke="steelblue" stroke-width="1" points="{pts}"/>'
            f'<text x="4" y="{top + 14:.0f}" font-size="11">[{y0:.4g}, {y1:.4g}]</text>')


def line_plot(path: str | Path, x, series: dict, xlabel: str = "s") -> None:
    x = np.asarray(x, dtype=float)
    height = _H * len(series) + 20
    parts = [f'<svg xmlns="http://www.w3.org/2000/svg" width="{_W}" height="{height}">',
             '<rect width="100%" height="100%" fill="white"/>']
    for k, (name, y) in enumerate(series.items()):
        top = k * _H
        parts.append(f'<text x="{_W - _PAD}" y="{top + 14}" font-size="12" text-anchor="end">{name}</text>')
        parts.append(_polyline(x, np.asarray(y, dtype=float), top))
    parts.append(f'<text x="{_W / 2:.0f}" y="{height - 4}" font-size="12" text-anchor="middle">{xlabel}</text>')
    parts.append("</svg>")
    Path(path).write_text("\n".join(parts) + "\n", encoding="utf-8")
