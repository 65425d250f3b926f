"""Initial nets for the built-in scenarios."""

from __future__ import annotations

import math
from dataclasses import dataclass, field as dc_field
from typing import Sequence

import numpy as np
from scipy.optimize import brentq

from .cluster_net import Arc, ClusterNet, Node, load
from .density import DensityField, make_density
from .errors import InvalidSpec

SCENARIOS = (
    "circle",
    "double_bubble",
    "triple_bubble",
    "gaussian_double_bubble",
    "grushin_bubble",
    "grushin_double_bubble",
    "custom",
)

DEFAULT_AREAS = {
    "circle": (math.pi,),
    "double_bubble": (1.0, 1.0),
    "triple_bubble": (1.0, 1.0, 1.0),
    "gaussian_double_bubble": (0.2, 0.2),
    "grushin_bubble": (2.0,),
    "grushin_double_bubble": (1.0, 1.0),
}

DEFAULT_DENSITY = {
    "circle": {"kind": "constant", "c": 1.0},
    "double_bubble": {"kind": "constant", "c": 1.0},
    "triple_bubble": {"kind": "constant", "c": 1.0},
    "gaussian_double_bubble": {"kind": "gaussian"},
    "grushin_bubble": {"kind": "grushin", "alpha": 1.0},
    "grushin_double_bubble": {"kind": "grushin", "alpha": 1.0},
}


@dataclass
class Scenario:
    name: str
    areas: tuple[float, ...] = ()
    density: dict = dc_field(default_factory=dict)
    seed: int = 0
    path: str | None = None  # custom scenarios read a cluster file

    def __post_init__(self):
        if self.name not in SCENARIOS:
            raise InvalidSpec(f"unknown scenario {self.name!r}; choose from {', '.join(SCENARIOS)}")
        if self.name == "custom":
            if not self.path:
                raise InvalidSpec("custom scenario needs a cluster file")
            return
        if not self.areas:
            self.areas = DEFAULT_AREAS[self.name]
        self.areas = tuple(float(a) for a in self.areas)
        if not self.density:
            self.density = dict(DEFAULT_DENSITY[self.name])
        expected = len(DEFAULT_AREAS[self.name])
        if len(self.areas) != expected:
            raise InvalidSpec(f"scenario {self.name} needs {expected} areas, got {len(self.areas)}")
        if not all(a > 0 and math.isfinite(a) for a in self.areas):
            raise InvalidSpec(f"target areas must be positive: {self.areas}")

    def to_dict(self) -> dict:
        return {"name": self.name, "areas": list(self.areas), "density": self.density, "seed": self.seed, "path": self.path}


def arc_points(start, end, center, ccw: bool, spacing: float, min_segments: int = 8) -> np.ndarray:
    """Circular arc from ``start`` to ``end`` around ``center``."""
    c = np.asarray(center, float)
    s, e = np.asarray(start, float) - c, np.asarray(end, float) - c
    R = math.hypot(*s)
    a0, a1 = math.atan2(s[1], s[0]), math.atan2(e[1], e[0])
    if ccw:
        sweep = (a1 - a0) % (2 * math.pi) or 2 * math.pi
    else:
        sweep = -((a0 - a1) % (2 * math.pi) or 2 * math.pi)
    n = max(min_segments, int(math.ceil(abs(sweep) * R / spacing)))
    th = a0 + sweep * np.linspace(0, 1, n + 1)
    pts = c + R * np.stack([np.cos(th), np.sin(th)], axis=1)
    pts[0], pts[-1] = start, end
    return pts


def segment_points(start, end, spacing: float, min_segments: int = 8) -> np.ndarray:
    start, end = np.asarray(start, float), np.asarray(end, float)
    n = max(min_segments, int(math.ceil(np.linalg.norm(end - start) / spacing)))
    t = np.linspace(0, 1, n + 1)[:, None]
    pts = start + t * (end - start)
    pts[0], pts[-1] = start, end
    return pts


def box_window(center, half: float) -> tuple[float, float, float, float]:
    cx, cy = center
    return (cx - half, cy - half, cx + half, cy + half)


def circle_net(area: float, n: int = 256, center=(0.0, 0.0), window=None) -> ClusterNet:
    """Regular n-gon whose Euclidean area equals ``area``."""
    R = math.sqrt(2 * area / (n * math.sin(2 * math.pi / n)))
    th = 2 * math.pi * np.arange(n + 1) / n
    c = np.asarray(center, float)
    pts = c + R * np.stack([np.cos(th), np.sin(th)], axis=1)
    pts[-1] = pts[0]
    node = Node(0, float(pts[0, 0]), float(pts[0, 1]))
    window = window or box_window(center, 2 * R)
    return ClusterNet(1, (node,), (Arc(0, 0, 0, pts, 1, 0),), (area,), window)


def _big_segment_radius(area: float, c: float) -> float:
    """Radius R whose disk, cut by a chord of half-length c, keeps ``area`` on the far side."""

    def big(R):
        d = math.sqrt(max(R * R - c * c, 0.0))
        return math.pi * R * R - (R * R * math.acos(min(1.0, d / R)) - d * c) - area

    return brentq(big, c, 10 * (c + math.sqrt(area)), xtol=1e-15)


def double_bubble_net(a1: float, a2: float, spacing: float, center=(0.0, 0.0), chord_fraction: float = 0.8, window=None) -> ClusterNet:
    """Two disk pieces of Euclidean areas a1 (left) and a2 (right) sharing a straight chord."""
    c = chord_fraction * math.sqrt(min(a1, a2) / math.pi)
    R1, R2 = _big_segment_radius(a1, c), _big_segment_radius(a2, c)
    d1, d2 = math.sqrt(R1 * R1 - c * c), math.sqrt(R2 * R2 - c * c)
    ox, oy = center
    top, bot = (ox, oy + c), (ox, oy - c)
    nodes = (Node(0, top[0], top[1]), Node(1, bot[0], bot[1]))
    chord = segment_points(bot, top, spacing)
    left = arc_points(top, bot, (ox - d1, oy), True, spacing)
    right = arc_points(bot, top, (ox + d2, oy), True, spacing)
    arcs = (
        Arc(0, 1, 0, chord, 1, 2),
        Arc(1, 0, 1, left, 1, 0),
        Arc(2, 1, 0, right, 2, 0),
    )
    half = 1.6 * (max(R1 + d1, R2 + d2))
    window = window or box_window(center, half)
    return ClusterNet(2, nodes, arcs, (a1, a2), window)


def sector_net(areas: Sequence[float], spacing: float, center=(0.0, 0.0), perturb: float = 0.0, seed: int = 0, window=None) -> ClusterNet:
    """Disk cut into len(areas) sectors by straight spokes from one central node.

    With three areas this is the triple bubble initializer.  Node positions are
    moved by ``perturb`` times the radius in seeded random directions.
    """
    k = len(areas)
    total = float(sum(areas))
    R = math.sqrt(total / math.pi)
    c = np.asarray(center, float)
    rng = np.random.default_rng(seed)
    angles = math.pi / 2 + 2 * math.pi * np.concatenate([[0.0], np.cumsum(areas[:-1]) / total])
    outer = c + R * np.stack([np.cos(angles), np.sin(angles)], axis=1)
    shift = perturb * R * rng.standard_normal((k + 1, 2))
    hub = c + shift[0]
    moved = outer + shift[1:]
    nodes = [Node(0, float(hub[0]), float(hub[1]))]
    nodes += [Node(j + 1, float(moved[j, 0]), float(moved[j, 1])) for j in range(k)]
    arcs = []
    for j in range(k):
        arcs.append(Arc(j, 0, j + 1, segment_points(hub, moved[j], spacing), j + 1, (j - 1) % k + 1))
    for j in range(k):
        nxt = (j + 1) % k
        pts = arc_points(outer[j], outer[nxt], c, True, spacing)
        t = np.linspace(0, 1, len(pts))[:, None]
        pts = pts + (1 - t) * shift[1 + j] + t * shift[1 + nxt]
        arcs.append(Arc(k + j, j + 1, nxt + 1, pts, j + 1, 0))
    window = window or box_window(center, 2.5 * R)
    return ClusterNet(k, tuple(nodes), tuple(arcs), tuple(float(a) for a in areas), window)


def scaled(net: ClusterNet, s: float, about=(0.0, 0.0)) -> ClusterNet:
    o = np.asarray(about, float)
    nodes = tuple(Node(n.id, float(o[0] + s * (n.x - o[0])), float(o[1] + s * (n.y - o[1]))) for n in net.nodes)
    arcs = tuple(Arc(a.id, a.from_node, a.to_node, o + s * (a.points - o), a.left, a.right) for a in net.arcs)
    return ClusterNet(net.m, nodes, arcs, net.target_areas, net.window)


def fit_scale(net: ClusterNet, field: DensityField, about=(0.0, 0.0)) -> ClusterNet:
    """Uniformly rescale ``net`` so its total weighted area matches the targets."""
    from .functionals import weighted_area

    target = sum(net.target_areas)

    def excess(s):
        return float(weighted_area(scaled(net, s, about), field).sum()) - target

    if abs(excess(1.0)) <= 1e-12 * target:
        return net
    hi = 1.0
    while excess(hi) < 0:
        hi *= 1.5
        if hi > 1e3:
            raise InvalidSpec("cannot reach the target weighted areas by rescaling")
    lo = 1.0
    while excess(lo) > 0:
        lo /= 1.5
    s = brentq(excess, lo, hi, xtol=1e-14)
    return scaled(net, s, about)


def initial_net(scenario: Scenario, spacing: float | None = None) -> tuple[ClusterNet, DensityField]:
    """Initial net and density for a scenario.  ``spacing`` defaults to window diagonal / 200."""
    field = make_density(scenario.density) if scenario.density else None
    name = scenario.name
    if name == "custom":
        with open(scenario.path, "rb") as fh:
            net = load(fh.read())
        return net, field or make_density({"kind": "constant", "c": 1.0})

    a = scenario.areas
    if name == "circle":
        net = circle_net(a[0])
        return net, field
    if name == "grushin_bubble":
        # start to the side of the singular axis
        R = math.sqrt(a[0] / math.pi)
        net = circle_net(a[0], center=(1.0, 0.0), window=box_window((0.0, 0.0), max(2.5, 3 * R)))
        return fit_scale(net, field, about=(1.0, 0.0)), field

    def spacing_for(window):
        x0, y0, x1, y1 = window
        return spacing or math.hypot(x1 - x0, y1 - y0) / 200

    if name in ("double_bubble", "gaussian_double_bubble", "grushin_double_bubble"):
        center = (1.0, 0.0) if name == "grushin_double_bubble" else (0.0, 0.0)
        probe = double_bubble_net(a[0], a[1], 1.0, center=center)
        if name == "double_bubble":
            net = double_bubble_net(a[0], a[1], spacing_for(probe.window), center=center)
            return net, field
        # pick Euclidean sizes whose weighted areas are close, then fit
        net = double_bubble_net(a[0], a[1], 1.0, center=center)
        net = fit_scale(net, field, about=center)
        s = math.sqrt(sum(_euclid(net)) / sum(a))
        window = box_window((0.0, 0.0), max(2.5, 1.6 * s * math.sqrt(sum(a)))) if name == "grushin_double_bubble" else None
        geo = double_bubble_net(a[0] * s * s, a[1] * s * s, 1.0, center=center)
        spc = spacing_for(window or geo.window)
        net = double_bubble_net(a[0] * s * s, a[1] * s * s, spc, center=center, window=window)
        net = ClusterNet(net.m, net.nodes, net.arcs, a, net.window)
        return fit_scale(net, field, about=center), field
    if name == "triple_bubble":
        probe = sector_net(a, 1.0)
        net = sector_net(a, spacing_for(probe.window), perturb=0.01, seed=scenario.seed)
        return net, field
    raise InvalidSpec(f"unhandled scenario {name}")


def _euclid(net: ClusterNet) -> np.ndarray:
    from .density import constant
    from .functionals import weighted_area

    return weighted_area(net, constant(1.0))
