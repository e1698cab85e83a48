"""Minimal 2-D scatter plot as standalone SVG."""
from __future__ import annotations

import xml.etree.ElementTree as ET
from typing import Optional, Sequence

import numpy as np

PALETTE = [
    "#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd",
    "#8c564b", "#e377c2", "#17becf", "#bcbd22", "#7f7f7f",
]
NOISE_COLOR = "#bbbbbb"


def scatter_svg(xy: np.ndarray, labels: Optional[Sequence[int]] = None,
                balls: Optional[Sequence[tuple]] = None, size: int = 640,
                margin: int = 20, point_radius: float = 2.0) -> str:
    """Render points (one <circle class="point"> each) and optional ball outlines.

    ``balls`` holds (cx, cy, radius) triples in data coordinates. Both axes
    share one scale so circles stay round.
    """
    xy = np.asarray(xy, dtype=float)
    if xy.ndim != 2 or xy.shape[1] != 2:
        raise ValueError("scatter_svg needs an (n, 2) array")
    lo, hi = xy.min(axis=0), xy.max(axis=0)
    if balls:
        b = np.asarray(balls, dtype=float)
        lo = np.minimum(lo, (b[:, :2] - b[:, 2:3]).min(axis=0))
        hi = np.maximum(hi, (b[:, :2] + b[:, 2:3]).max(axis=0))
    span = float(max(hi - lo)) or 1.0
    scale = (size - 2 * margin) / span

    def tx(p):
        # flip y so larger values point up
        return margin + (p[0] - lo[0]) * scale, size - margin - (p[1] - lo[1]) * scale

    svg = ET.Element("svg", xmlns="http://www.w3.org/2000/svg", width=str(size),
                     height=str(size), viewBox=f"0 0 {size} {size}")
    ET.SubElement(svg, "rect", width="100%", height="100%", fill="white")
    g_pts = ET.SubElement(svg, "g", {"class": "points"})
    for i, p in enumerate(xy):
        x, y = tx(p)
        if labels is None:
            color = PALETTE[0]
        else:
            lab = int(labels[i])
            color = NOISE_COLOR if lab < 0 else PALETTE[lab % len(PALETTE)]
        ET.SubElement(g_pts, "circle", {"class": "point", "cx": f"{x:.2f}", "cy": f"{y:.2f}",
                                        "r": f"{point_radius:g}", "fill": color})
    if balls:
        g_balls = ET.SubElement(svg, "g", {"class": "balls", "fill": "none", "stroke": "#333333",
                                           "stroke-width": "0.7", "stroke-opacity": "0.6"})
        for cx, cy, r in balls:
            x, y = tx((cx, cy))
            ET.SubElement(g_balls, "circle", {"class": "ball", "cx": f"{x:.2f}", "cy": f"{y:.2f}",
                                              "r": f"{r * scale:.2f}"})
    return ET.tostring(svg, encoding="unicode")
