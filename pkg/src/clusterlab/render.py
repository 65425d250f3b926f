"""Deterministic SVG drawings of cluster nets."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .cluster_net import ClusterNet, region_loops

PALETTE = (
    "#4e79a7", "#f28e2b", "#59a14f", "#e15759",
    "#76b7b2", "#edc948", "#b07aa1", "#9c755f",
)


@dataclass(frozen=True)
class Style:
    width_px: int = 640
    stroke: str = "#222222"
    stroke_width: float = 1.5  # in pixels
    fill_opacity: float = 0.55
    marker_radius: float = 4.0  # in pixels
    decimals: int = 4


def region_color(label: int) -> str | None:
    """Fill color for a region label; the exterior (0) is left unfilled."""
    if label <= 0:
        return None
    return PALETTE[(label - 1) % len(PALETTE)]


def _fmt(v: float, decimals: int) -> str:
    s = f"{v:.{decimals}f}"
    if s.startswith("-") and float(s) == 0.0:
        s = s[1:]
    return s


def render_svg(net: ClusterNet, style: Style | None = None) -> str:
    """SVG text for ``net``; identical input gives byte-identical output."""
    st = style or Style()
    x0, y0, x1, y1 = net.window
    w, h = x1 - x0, y1 - y0
    scale = st.width_px / w
    height_px = max(1, int(round(h * scale)))
    d = st.decimals

    def xy(p) -> str:
        # flip y so the picture is upright
        return f"{_fmt((p[0] - x0) * scale, d)},{_fmt((y1 - p[1]) * scale, d)}"

    out = [
        '<?xml version="1.0" encoding="UTF-8"?>',
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{st.width_px}" height="{height_px}" '
        f'viewBox="0 0 {st.width_px} {height_px}">',
        f'<rect class="frame" x="0" y="0" width="{st.width_px}" height="{height_px}" fill="none" stroke="#999999" stroke-width="1"/>',
    ]
    for i in range(1, net.m + 1):
        loops = region_loops(net, i) if net.arcs else []
        if not loops:
            continue
        path = " ".join("M " + " L ".join(xy(p) for p in loop) + " Z" for loop in loops)
        out.append(f'<path class="region" data-label="{i}" d="{path}" fill="{region_color(i)}" '
                   f'fill-opacity="{st.fill_opacity}" fill-rule="evenodd" stroke="none"/>')
    for a in net.arcs:
        pts = " ".join(xy(p) for p in a.points)
        out.append(f'<polyline class="arc" data-id="{a.id}" points="{pts}" fill="none" '
                   f'stroke="{st.stroke}" stroke-width="{st.stroke_width}" stroke-linejoin="round"/>')
    for nid in net.junction_ids():
        n = net.node(nid)
        cx, cy = xy(np.array([n.x, n.y])).split(",")
        out.append(f'<circle class="junction" data-id="{nid}" cx="{cx}" cy="{cy}" r="{st.marker_radius}" '
                   f'fill="#ffffff" stroke="{st.stroke}" stroke-width="{st.stroke_width}"/>')
    out.append("</svg>")
    return "\n".join(out) + "\n"
