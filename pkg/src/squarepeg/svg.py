"""Standalone SVG emission for curves, corner traces, squares, and corner clouds.

World coordinates are mapped affinely into a square viewport preserving the
aspect ratio; the y axis is flipped so plots read like ordinary graphs.
"""

from __future__ import annotations

from pathlib import Path

import numpy as np

CURVE_COLOR = "#1f77b4"
SQUARE_COLOR = "#ff7f0e"
CLOUD_COLOR = "#d62728"
FAMILY_COLORS = {1: "#d62728", 2: "#2ca02c", 3: "#8c1515", 4: "#1a6b1a"}


class _Canvas:
    def __init__(self, size: int, margin: float = 40.0):
        self.size = size
        self.margin = margin
        self.bbox = None
        self.items = []

    def include(self, pts: np.ndarray):
        pts = np.asarray(pts, dtype=float)
        if pts.size == 0:
            return
        lo = pts.min(axis=0)
        hi = pts.max(axis=0)
        if self.bbox is None:
            self.bbox = [lo[0], lo[1], hi[0], hi[1]]
        else:
            self.bbox[0] = min(self.bbox[0], lo[0])
            self.bbox[1] = min(self.bbox[1], lo[1])
            self.bbox[2] = max(self.bbox[2], hi[0])
            self.bbox[3] = max(self.bbox[3], hi[1])

    def _transform(self, pts: np.ndarray) -> np.ndarray:
        x0, y0, x1, y1 = self.bbox
        span = max(x1 - x0, y1 - y0, 1e-30)
        scale = (self.size - 2 * self.margin) / span
        cx, cy = 0.5 * (x0 + x1), 0.5 * (y0 + y1)
        out = np.empty_like(np.asarray(pts, dtype=float))
        out[:, 0] = 0.5 * self.size + (pts[:, 0] - cx) * scale
        out[:, 1] = 0.5 * self.size - (pts[:, 1] - cy) * scale
        return out

    @staticmethod
    def _fmt(pts: np.ndarray) -> str:
        return " ".join(f"{x:.2f},{y:.2f}" for x, y in pts)

    def polyline(self, pts, color, width=2.0):
        self.items.append(("polyline", np.asarray(pts, dtype=float), color, width))
        self.include(pts)

    def polygon(self, pts, color, width=2.0):
        self.items.append(("polygon", np.asarray(pts, dtype=float), color, width))
        self.include(pts)

    def dots(self, pts, color, radius=2.0):
        self.items.append(("dots", np.asarray(pts, dtype=float), color, radius))
        self.include(pts)

    def render(self) -> str:
        if self.bbox is None:
            self.bbox = [0.0, 0.0, 1.0, 1.0]
        lines = [
            '<?xml version="1.0" encoding="UTF-8"?>',
            f'<svg xmlns="http://www.w3.org/2000/svg" width="{self.size}" height="{self.size}" '
            f'viewBox="0 0 {self.size} {self.size}">',
            f'<rect width="{self.size}" height="{self.size}" fill="white"/>',
        ]
        for kind, pts, color, w in self.items:
            mapped = self._transform(pts)
            if kind == "polyline":
                lines.append(
                    f'<polyline points="{self._fmt(mapped)}" fill="none" stroke="{color}" stroke-width="{w}"/>'
                )
            elif kind == "polygon":
                lines.append(
                    f'<polygon points="{self._fmt(mapped)}" fill="none" stroke="{color}" stroke-width="{w}"/>'
                )
            else:
                for x, y in mapped:
                    lines.append(f'<circle cx="{x:.2f}" cy="{y:.2f}" r="{w}" fill="{color}"/>')
        lines.append("</svg>")
        return "\n".join(lines) + "\n"


def emit_svg(
    path,
    pair=None,
    polyline=None,
    traces=(),
    squares=(),
    cloud=None,
    size: int = 1000,
) -> Path:
    """Write a figure of the curve with optional corner traces, squares, and cloud.

    The curve is drawn in blue, traces in the family palette (reds and
    greens), squares as outlined polygons, and cloud samples as red dots.
    Exactly one polygon element is emitted per square.
    """
    canvas = _Canvas(int(size))
    if pair is not None:
        knots = np.unique(np.concatenate([pair.f.breakpoints, pair.g.breakpoints]))
        canvas.polyline(np.column_stack([knots, pair.f(knots)]), CURVE_COLOR)
        canvas.polyline(np.column_stack([knots, pair.g(knots)]), CURVE_COLOR)
    if polyline is not None:
        pts = polyline.points
        if polyline.closed:
            pts = np.vstack([pts, pts[:1]])
        canvas.polyline(pts, CURVE_COLOR)
    for tr in traces:
        canvas.polyline(tr.q_points, FAMILY_COLORS.get(tr.family, CLOUD_COLOR), width=1.5)
    for square in squares:
        canvas.polygon(square.vertices, SQUARE_COLOR)
    if cloud is not None and len(cloud):
        canvas.dots(cloud.q, CLOUD_COLOR)
    path = Path(path)
    path.write_text(canvas.render())
    return path
