"""Bare-bones SVG writers; plots are decorative, the CSV data is authoritative."""
from __future__ import annotations

import numpy as np

from .lattice import NEG_INF, POS_INF, UNCOLOURED

_PALETTE = ["#f2c14e", "#5b8e7d", "#9b5de5", "#f15bb5", "#00bbf9", "#00f5d4", "#e76f51", "#264653"]
_SPECIAL = {NEG_INF: "#3a86ff", POS_INF: "#ff5a5f", UNCOLOURED: "#111111"}


def _fill(v: int) -> str:
    if v in _SPECIAL:
        return _SPECIAL[v]
    return _PALETTE[int(v) % len(_PALETTE)]


def grid_svg(values: np.ndarray, cell: int = 10, title: str = "", flip_vertical: bool = False) -> str:
    """Render a 2-D integer array; axis 0 runs left to right, axis 1 upwards."""
    values = np.asarray(values)
    if values.ndim == 1:
        values = values[:, None]
    nx, ny = values.shape
    w, h = nx * cell, ny * cell
    parts = [f'<svg xmlns="http://www.w3.org/2000/svg" width="{w}" height="{h}" viewBox="0 0 {w} {h}">']
    if title:
        parts.append(f"<title>{title}</title>")
    for i in range(nx):
        for j in range(ny):
            y = (ny - 1 - j) * cell
            parts.append(f'<rect x="{i * cell}" y="{y}" width="{cell}" height="{cell}" fill="{_fill(int(values[i, j]))}"/>')
    parts.append("</svg>")
    return "\n".join(parts) + "\n"


def line_svg(series: dict, width: int = 480, height: int = 320, title: str = "") -> str:
    """Polyline chart of ``{label: [(x, y), ...]}`` with y in [0, 1]."""
    xs = [x for pts in series.values() for x, _ in pts]
    if not xs:
        return f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}"></svg>\n'
    x0, x1 = min(xs), max(xs)
    span = (x1 - x0) or 1.0
    pad = 30
    parts = [f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}">']
    if title:
        parts.append(f"<title>{title}</title>")
    parts.append(f'<rect x="{pad}" y="{pad}" width="{width - 2 * pad}" height="{height - 2 * pad}" fill="none" stroke="#999"/>')
    for n, (label, pts) in enumerate(sorted(series.items())):
        coords = " ".join(
            f"{pad + (x - x0) / span * (width - 2 * pad):.2f},{height - pad - y * (height - 2 * pad):.2f}"
            for x, y in pts)
        parts.append(f'<polyline fill="none" stroke="{_PALETTE[n % len(_PALETTE)]}" stroke-width="2" points="{coords}"><title>{label}</title></polyline>')
    parts.append("</svg>")
    return "\n".join(parts) + "\n"
