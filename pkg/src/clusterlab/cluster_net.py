"""Planar m-cluster curve networks: data model, validation, loops, I/O.

A net is a set of junction nodes joined by polyline arcs.  Every arc carries
the label of the region on its left and on its right (traversing the arc
from ``from_node`` to ``to_node``).  Label 0 is the unbounded exterior.

A closed curve with no junction on it (a lone bubble, an island) is stored as
a single arc whose two ends sit on the same *anchor* node of degree 2.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np
from scipy.spatial import ConvexHull, QhullError

from .errors import OpenLoop, ParseError, SchemaVersionError

SCHEMA_VERSION = "1"
ENDPOINT_TOL = 1e-12


def _frozen(points) -> np.ndarray:
    arr = np.array(points, dtype=float).reshape(-1, 2)
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True, eq=False)
class Node:
    id: int
    x: float
    y: float

    @property
    def position(self) -> np.ndarray:
        return np.array([self.x, self.y])

    def __eq__(self, other):
        if not isinstance(other, Node):
            return NotImplemented
        return (self.id, self.x, self.y) == (other.id, other.x, other.y)

    def __hash__(self):
        return hash((self.id, self.x, self.y))


@dataclass(frozen=True, eq=False)
class Arc:
    id: int
    from_node: int
    to_node: int
    points: np.ndarray
    left: int
    right: int

    def __post_init__(self):
        object.__setattr__(self, "points", _frozen(self.points))

    @property
    def closed(self) -> bool:
        return self.from_node == self.to_node

    def __eq__(self, other):
        if not isinstance(other, Arc):
            return NotImplemented
        return (
            (self.id, self.from_node, self.to_node, self.left, self.right)
            == (other.id, other.from_node, other.to_node, other.left, other.right)
            and self.points.shape == other.points.shape
            and bool(np.array_equal(self.points, other.points))
        )

    def __hash__(self):
        return hash((self.id, self.from_node, self.to_node, self.left, self.right))

    def length(self) -> float:
        return float(np.linalg.norm(np.diff(self.points, axis=0), axis=1).sum())


@dataclass(frozen=True, eq=False)
class ClusterNet:
    """Immutable cluster network.  Build a new net to change anything."""

    m: int
    nodes: tuple[Node, ...]
    arcs: tuple[Arc, ...]
    target_areas: tuple[float, ...]
    window: tuple[float, float, float, float]
    _node_index: dict = field(init=False, repr=False, compare=False)
    _arc_index: dict = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        object.__setattr__(self, "nodes", tuple(self.nodes))
        object.__setattr__(self, "arcs", tuple(self.arcs))
        object.__setattr__(self, "target_areas", tuple(float(a) for a in self.target_areas))
        object.__setattr__(self, "window", tuple(float(w) for w in self.window))
        object.__setattr__(self, "_node_index", {n.id: k for k, n in enumerate(self.nodes)})
        object.__setattr__(self, "_arc_index", {a.id: k for k, a in enumerate(self.arcs)})

    def __eq__(self, other):
        if not isinstance(other, ClusterNet):
            return NotImplemented
        return (
            self.m == other.m
            and self.nodes == other.nodes
            and self.arcs == other.arcs
            and self.target_areas == other.target_areas
            and self.window == other.window
        )

    __hash__ = None

    def node(self, node_id: int) -> Node:
        return self.nodes[self._node_index[node_id]]

    def arc(self, arc_id: int) -> Arc:
        return self.arcs[self._arc_index[arc_id]]

    def has_node(self, node_id: int) -> bool:
        return node_id in self._node_index

    @property
    def window_diagonal(self) -> float:
        x0, y0, x1, y1 = self.window
        return math.hypot(x1 - x0, y1 - y0)

    def degree(self, node_id: int) -> int:
        return sum((a.from_node == node_id) + (a.to_node == node_id) for a in self.arcs)

    def incident_arcs(self, node_id: int) -> list[tuple[int, int]]:
        """Arc ends at a node as ``(arc_id, end)`` sorted counterclockwise.

        ``end`` is 0 when the arc leaves the node from its first point and 1
        when it arrives with its last point.  Sorting uses the direction from
        the node to the neighbouring polyline vertex.
        """
        ends = []
        for a in self.arcs:
            if a.from_node == node_id:
                d = a.points[1] - a.points[0]
                ends.append((math.atan2(d[1], d[0]), a.id, 0))
            if a.to_node == node_id:
                d = a.points[-2] - a.points[-1]
                ends.append((math.atan2(d[1], d[0]), a.id, 1))
        ends.sort()
        return [(aid, end) for _, aid, end in ends]

    def junction_ids(self) -> list[int]:
        return [n.id for n in self.nodes if self.degree(n.id) >= 3]

    def replace_points(self, updates: dict[int, np.ndarray], node_updates: dict[int, Sequence[float]] | None = None) -> "ClusterNet":
        node_updates = node_updates or {}
        nodes = tuple(
            Node(n.id, float(node_updates[n.id][0]), float(node_updates[n.id][1])) if n.id in node_updates else n
            for n in self.nodes
        )
        arcs = tuple(
            Arc(a.id, a.from_node, a.to_node, updates[a.id], a.left, a.right) if a.id in updates else a
            for a in self.arcs
        )
        return ClusterNet(self.m, nodes, arcs, self.target_areas, self.window)

    def segments(self) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        """All segments as ``(P, Q, arc_position)`` arrays."""
        if not self.arcs:
            empty = np.zeros((0, 2))
            return empty, empty, np.zeros(0, dtype=int)
        P = np.concatenate([a.points[:-1] for a in self.arcs])
        Q = np.concatenate([a.points[1:] for a in self.arcs])
        owner = np.concatenate([np.full(len(a.points) - 1, k) for k, a in enumerate(self.arcs)])
        return P, Q, owner


# ---------------------------------------------------------------------------
# validation


@dataclass(frozen=True)
class Violation:
    kind: str
    message: str
    arcs: tuple[int, ...] = ()
    nodes: tuple[int, ...] = ()


@dataclass(frozen=True)
class ValidationResult:
    violations: tuple[Violation, ...]

    @property
    def ok(self) -> bool:
        return not self.violations

    def kinds(self) -> set[str]:
        return {v.kind for v in self.violations}

    def __bool__(self):
        return self.ok


def _orient(ax, ay, bx, by, cx, cy):
    return (bx - ax) * (cy - ay) - (by - ay) * (cx - ax)


def _on_segment(px, py, qx, qy, rx, ry):
    # r collinear with pq assumed
    return (
        (np.minimum(px, qx) <= rx) & (rx <= np.maximum(px, qx))
        & (np.minimum(py, qy) <= ry) & (ry <= np.maximum(py, qy))
    )


def segments_intersect(P1, Q1, P2, Q2) -> np.ndarray:
    """Closed-segment intersection test, vectorized over rows."""
    P1, Q1, P2, Q2 = (np.asarray(a, dtype=float) for a in (P1, Q1, P2, Q2))
    o1 = _orient(*P1.T, *Q1.T, *P2.T)
    o2 = _orient(*P1.T, *Q1.T, *Q2.T)
    o3 = _orient(*P2.T, *Q2.T, *P1.T)
    o4 = _orient(*P2.T, *Q2.T, *Q1.T)
    s1, s2, s3, s4 = np.sign(o1), np.sign(o2), np.sign(o3), np.sign(o4)
    hit = (s1 * s2 < 0) & (s3 * s4 < 0)
    hit |= (s1 == 0) & _on_segment(*P1.T, *Q1.T, *P2.T)
    hit |= (s2 == 0) & _on_segment(*P1.T, *Q1.T, *Q2.T)
    hit |= (s3 == 0) & _on_segment(*P2.T, *Q2.T, *P1.T)
    hit |= (s4 == 0) & _on_segment(*P2.T, *Q2.T, *Q1.T)
    return hit


def _candidate_pairs(P: np.ndarray, Q: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Segment pairs whose bounding boxes overlap (sort-and-sweep on x)."""
    n = len(P)
    if n < 2:
        return np.zeros(0, dtype=int), np.zeros(0, dtype=int)
    xmin = np.minimum(P[:, 0], Q[:, 0])
    xmax = np.maximum(P[:, 0], Q[:, 0])
    ymin = np.minimum(P[:, 1], Q[:, 1])
    ymax = np.maximum(P[:, 1], Q[:, 1])
    order = np.argsort(xmin, kind="stable")
    xs = xmin[order]
    stop = np.searchsorted(xs, xmax[order], side="right")
    start = np.arange(n) + 1
    counts = np.maximum(stop - start, 0)
    I = np.repeat(np.arange(n), counts)
    offsets = np.arange(counts.sum()) - np.repeat(np.cumsum(counts) - counts, counts)
    J = np.repeat(start, counts) + offsets
    a, b = order[I], order[J]
    keep = (ymin[a] <= ymax[b]) & (ymin[b] <= ymax[a])
    return a[keep], b[keep]


def vertex_ids(net: ClusterNet) -> tuple[np.ndarray, np.ndarray]:
    """Global vertex ids for segment endpoints; node vertices are shared."""
    ids_p, ids_q = [], []
    nodes = {n.id: k for k, n in enumerate(net.nodes)}
    nxt = len(net.nodes)
    for a in net.arcs:
        k = len(a.points)
        vid = np.empty(k, dtype=int)
        vid[0] = nodes.get(a.from_node, -1)
        vid[-1] = nodes.get(a.to_node, -1)
        vid[1:-1] = np.arange(nxt, nxt + k - 2)
        nxt += k - 2
        ids_p.append(vid[:-1])
        ids_q.append(vid[1:])
    if not ids_p:
        return np.zeros(0, dtype=int), np.zeros(0, dtype=int)
    return np.concatenate(ids_p), np.concatenate(ids_q)


def find_crossings(net: ClusterNet) -> list[tuple[int, int]]:
    """Arc-id pairs with segments meeting anywhere except a shared vertex."""
    P, Q, owner = net.segments()
    vp, vq = vertex_ids(net)
    a, b = _candidate_pairs(P, Q)
    if len(a) == 0:
        return []
    share = (vp[a] == vp[b]) | (vp[a] == vq[b]) | (vq[a] == vp[b]) | (vq[a] == vq[b])
    hit = np.zeros(len(a), dtype=bool)
    free = ~share
    hit[free] = segments_intersect(P[a[free]], Q[a[free]], P[b[free]], Q[b[free]])
    # adjacent segments may only touch at their common vertex: flag folds
    sa, sb = a[share], b[share]
    if len(sa):
        da = Q[sa] - P[sa]
        db = Q[sb] - P[sb]
        # direction of each segment leaving the shared vertex
        from_a = np.where(((vp[sa] == vp[sb]) | (vp[sa] == vq[sb]))[:, None], da, -da)
        from_b = np.where(((vp[sb] == vp[sa]) | (vp[sb] == vq[sa]))[:, None], db, -db)
        cross = from_a[:, 0] * from_b[:, 1] - from_a[:, 1] * from_b[:, 0]
        dot = (from_a * from_b).sum(axis=1)
        both = (vp[sa] == vp[sb]) & (vq[sa] == vq[sb]) | (vp[sa] == vq[sb]) & (vq[sa] == vp[sb])
        fold = (np.abs(cross) <= 1e-15 * np.abs(dot)) & (dot > 0)
        hit[share] = fold & ~both
    pairs = set()
    arc_ids = [arc.id for arc in net.arcs]
    for i, j in zip(a[hit], b[hit]):
        x, y = arc_ids[owner[i]], arc_ids[owner[j]]
        pairs.add((min(x, y), max(x, y)))
    return sorted(pairs)


def validate(net: ClusterNet) -> ValidationResult:
    """Collect every invariant violation of ``net``; never raises."""
    out: list[Violation] = []
    m = net.m

    if m < 0:
        out.append(Violation("region_count", f"m={m} is negative"))
    if len(net.target_areas) != m:
        out.append(Violation("target_areas", f"{len(net.target_areas)} target areas for m={m}"))
    for i, t in enumerate(net.target_areas):
        if not (math.isfinite(t) and t > 0):
            out.append(Violation("target_areas", f"target area {i + 1} = {t} is not positive"))
    x0, y0, x1, y1 = net.window
    if not (x1 > x0 and y1 > y0):
        out.append(Violation("window", f"window {net.window} is empty"))

    if len({n.id for n in net.nodes}) != len(net.nodes):
        out.append(Violation("ids", "duplicate node ids"))
    if len({a.id for a in net.arcs}) != len(net.arcs):
        out.append(Violation("ids", "duplicate arc ids"))

    for n in net.nodes:
        if not (math.isfinite(n.x) and math.isfinite(n.y)):
            out.append(Violation("finite", f"node {n.id} has non-finite position", nodes=(n.id,)))

    structurally_ok = True
    for a in net.arcs:
        pts = a.points
        if len(pts) < 2:
            out.append(Violation("arc_points", f"arc {a.id} has fewer than 2 points", arcs=(a.id,)))
            structurally_ok = False
            continue
        if not np.all(np.isfinite(pts)):
            out.append(Violation("finite", f"arc {a.id} has non-finite coordinates", arcs=(a.id,)))
            structurally_ok = False
            continue
        seg = np.linalg.norm(np.diff(pts, axis=0), axis=1)
        if np.any(seg == 0):
            out.append(Violation("zero_length", f"arc {a.id} has a zero-length segment", arcs=(a.id,)))
            structurally_ok = False
        if a.closed and len(pts) < 4:
            out.append(Violation("arc_points", f"closed arc {a.id} needs at least 3 segments", arcs=(a.id,)))
            structurally_ok = False
        if a.left == a.right:
            out.append(Violation("degenerate labels", f"arc {a.id} has left = right = {a.left}", arcs=(a.id,)))
        for lab in (a.left, a.right):
            if not (0 <= lab <= m):
                out.append(Violation("labels", f"arc {a.id} uses label {lab} outside 0..{m}", arcs=(a.id,)))
        for end, nid in ((0, a.from_node), (-1, a.to_node)):
            if not net.has_node(nid):
                out.append(Violation("endpoints", f"arc {a.id} references missing node {nid}", arcs=(a.id,)))
                structurally_ok = False
                continue
            if np.max(np.abs(pts[end] - net.node(nid).position)) > ENDPOINT_TOL:
                out.append(Violation("endpoints", f"arc {a.id} endpoint does not sit on node {nid}", arcs=(a.id,), nodes=(nid,)))
                structurally_ok = False

    if not structurally_ok:
        return ValidationResult(tuple(out))

    for n in net.nodes:
        ends = [(aid, e) for aid, e in net.incident_arcs(n.id)]
        deg = len(ends)
        loop_anchor = deg == 2 and ends[0][0] == ends[1][0] and net.arc(ends[0][0]).closed
        if deg != 3 and not loop_anchor:
            out.append(Violation("valence", f"node {n.id} has degree {deg}", nodes=(n.id,)))
        # sectors between consecutive arc ends must carry one label
        for k in range(deg):
            aid, e = ends[k]
            bid, f = ends[(k + 1) % deg]
            a, b = net.arc(aid), net.arc(bid)
            # region counterclockwise of end k: left if the arc leaves, right if it arrives
            ccw_of_a = a.left if e == 0 else a.right
            cw_of_b = b.right if f == 0 else b.left
            if ccw_of_a != cw_of_b:
                out.append(Violation(
                    "label consistency",
                    f"sector between arcs {aid} and {bid} at node {n.id} has labels {ccw_of_a} and {cw_of_b}",
                    arcs=(aid, bid), nodes=(n.id,),
                ))

    for i in range(0, m + 1):
        try:
            loops = region_loops(net, i)
        except OpenLoop as exc:
            out.append(Violation("open loop", str(exc)))
            continue
        if i >= 1:
            area = sum(shoelace(l) for l in loops)
            if not area > 0:
                out.append(Violation("orientation", f"region {i} has non-positive signed area {area:.3g}"))

    for pa, pb in find_crossings(net):
        out.append(Violation("planarity", f"arcs {pa} and {pb} cross away from a shared vertex", arcs=(pa, pb)))

    return ValidationResult(tuple(out))


# ---------------------------------------------------------------------------
# loops and components


def shoelace(loop: np.ndarray) -> float:
    x, y = loop[:, 0], loop[:, 1]
    return 0.5 * float(np.dot(x, np.roll(y, -1)) - np.dot(np.roll(x, -1), y))


def region_half_edges(net: ClusterNet, i: int) -> list[list[tuple[int, bool]]]:
    """Boundary of region ``i`` as loops of ``(arc_id, forward)`` half-edges.

    Each loop keeps region ``i`` on its left.  Raises OpenLoop when the
    half-edges do not chain into closed loops.
    """
    half = [(a.id, True) for a in net.arcs if a.left == i] + [(a.id, False) for a in net.arcs if a.right == i]
    if not half:
        return []

    def start_of(h):
        a = net.arc(h[0])
        return a.from_node if h[1] else a.to_node

    def end_of(h):
        a = net.arc(h[0])
        return a.to_node if h[1] else a.from_node

    outgoing: dict[int, list[tuple[int, bool]]] = {}
    for h in half:
        outgoing.setdefault(start_of(h), []).append(h)

    def successor(h):
        v = end_of(h)
        cands = outgoing.get(v, [])
        if len(cands) == 1:
            return cands[0]
        if not cands:
            raise OpenLoop(f"region {i}: boundary stops at node {v} after arc {h[0]}")
        ring = net.incident_arcs(v)
        # the end of arc h[0] sitting at v
        twin_end = 1 if h[1] else 0
        k = ring.index((h[0], twin_end))
        aid, e = ring[(k - 1) % len(ring)]
        nxt = (aid, e == 0)
        if nxt not in cands:
            raise OpenLoop(f"region {i}: inconsistent labels at node {v}")
        return nxt

    loops = []
    used: set = set()
    for h in half:
        if h in used:
            continue
        loop = [h]
        used.add(h)
        cur = successor(h)
        guard = 0
        while cur != h:
            if cur in used:
                raise OpenLoop(f"region {i}: half-edge of arc {cur[0]} reached twice")
            loop.append(cur)
            used.add(cur)
            cur = successor(cur)
            guard += 1
            if guard > len(half):
                raise OpenLoop(f"region {i}: boundary does not close")
        loops.append(loop)
    return loops


def loop_coordinates(net: ClusterNet, loop: Iterable[tuple[int, bool]]) -> np.ndarray:
    parts = []
    for aid, fwd in loop:
        pts = net.arc(aid).points
        pts = pts if fwd else pts[::-1]
        parts.append(pts[:-1])
    return np.concatenate(parts)


def region_loops(net: ClusterNet, i: int) -> list[np.ndarray]:
    """Closed oriented boundary polylines of region ``i``, region on the left.

    Loops are returned without repeating the first point at the end.
    """
    return [loop_coordinates(net, l) for l in region_half_edges(net, i)]


def points_in_polygon(points: np.ndarray, poly: np.ndarray) -> np.ndarray:
    """Even-odd ray casting for many points against one closed polygon."""
    pts = np.atleast_2d(np.asarray(points, dtype=float))
    x, y = pts[:, 0][:, None], pts[:, 1][:, None]
    xa, ya = poly[:, 0][None, :], poly[:, 1][None, :]
    xb, yb = np.roll(poly[:, 0], -1)[None, :], np.roll(poly[:, 1], -1)[None, :]
    straddle = (ya > y) != (yb > y)
    with np.errstate(divide="ignore", invalid="ignore"):
        xint = xa + (y - ya) * (xb - xa) / (yb - ya)
    crossing = straddle & (x < xint)
    return (crossing.sum(axis=1) % 2) == 1


def region_at(net: ClusterNet, points: np.ndarray) -> np.ndarray:
    """Region label containing each point (0 when in no bounded region)."""
    pts = np.atleast_2d(np.asarray(points, dtype=float))
    labels = np.zeros(len(pts), dtype=int)
    for i in range(1, net.m + 1):
        inside = np.zeros(len(pts), dtype=bool)
        for loop in region_loops(net, i):
            inside ^= points_in_polygon(pts, loop)
        labels[inside] = i
    return labels


def _diameter(pts: np.ndarray) -> float:
    if len(pts) < 2:
        return 0.0
    try:
        pts = pts[ConvexHull(pts).vertices]
    except (QhullError, ValueError):
        pass
    d = pts[:, None, :] - pts[None, :, :]
    return float(np.sqrt((d ** 2).sum(axis=-1)).max())


@dataclass(frozen=True)
class Component:
    label: int
    area: float
    diameter: float
    outer: int | None  # index into region_loops(net, label); None when unbounded
    holes: tuple[int, ...]
    unbounded: bool = False


def components(net: ClusterNet, i: int) -> list[Component]:
    """Connected components of region ``i`` from loop containment.

    Positive loops bound components, negative loops are holes assigned to
    the smallest positive loop containing them.  For the exterior, holes
    contained in no positive loop form the unbounded component, whose area is
    clipped to the window.
    """
    loops = region_loops(net, i)
    areas = [shoelace(l) for l in loops]
    outers = [k for k, a in enumerate(areas) if a > 0]
    holes = [k for k, a in enumerate(areas) if a <= 0]
    owner: dict[int, int | None] = {}
    for h in holes:
        probe = 0.5 * (loops[h][0] + loops[h][1])
        best = None
        for o in outers:
            if points_in_polygon(probe[None, :], loops[o])[0]:
                if best is None or areas[o] < areas[best]:
                    best = o
        owner[h] = best
    comps = []
    for o in outers:
        hs = tuple(h for h in holes if owner[h] == o)
        area = areas[o] + sum(areas[h] for h in hs)
        comps.append(Component(i, area, _diameter(loops[o]), o, hs))
    if i == 0:
        hs = tuple(h for h in holes if owner[h] is None)
        x0, y0, x1, y1 = net.window
        area = (x1 - x0) * (y1 - y0) + sum(areas[h] for h in hs)
        comps.insert(0, Component(0, area, net.window_diagonal, None, hs, unbounded=True))
    return comps


# ---------------------------------------------------------------------------
# serialization


def _num(x: float) -> str:
    x = float(x)
    if not math.isfinite(x):
        raise ValueError(f"cannot serialize non-finite value {x}")
    s = format(x, ".17g")
    if s in ("0", "-0"):
        return "0.0" if s == "0" else "-0.0"
    if "e" not in s and "." not in s:
        s += ".0"
    return s


def save(net: ClusterNet) -> bytes:
    """Serialize a net to UTF-8 JSON with 17 significant digits."""
    lines = ["{", f'  "version": "{SCHEMA_VERSION}",', f'  "m": {net.m},']
    lines.append('  "window": [' + ", ".join(_num(w) for w in net.window) + "],")
    lines.append('  "nodes": [')
    nodes = [f'    {{"id": {n.id}, "x": {_num(n.x)}, "y": {_num(n.y)}}}' for n in net.nodes]
    lines.append(",\n".join(nodes))
    lines.append("  ],")
    lines.append('  "arcs": [')
    arcs = []
    for a in net.arcs:
        pts = ", ".join(f"[{_num(p[0])}, {_num(p[1])}]" for p in a.points)
        arcs.append(
            f'    {{"id": {a.id}, "from": {a.from_node}, "to": {a.to_node}, '
            f'"left": {a.left}, "right": {a.right}, "points": [{pts}]}}'
        )
    lines.append(",\n".join(arcs))
    lines.append("  ],")
    lines.append('  "target_areas": [' + ", ".join(_num(t) for t in net.target_areas) + "]")
    lines.append("}")
    return ("\n".join(lines) + "\n").encode("utf-8")


def _require(obj: dict, key: str, kind, where: str):
    if not isinstance(obj, dict) or key not in obj:
        raise ParseError(f"missing required key {key!r}", field=f"{where}{key}")
    val = obj[key]
    if kind is float:
        ok = isinstance(val, (int, float)) and not isinstance(val, bool)
    elif kind is int:
        ok = isinstance(val, int) and not isinstance(val, bool)
    else:
        ok = isinstance(val, kind)
    if not ok:
        raise ParseError(f"expected {getattr(kind, '__name__', kind)}, got {type(val).__name__}", field=f"{where}{key}")
    return val


def _point(val, where: str) -> tuple[float, float]:
    if (
        not isinstance(val, list) or len(val) != 2
        or not all(isinstance(v, (int, float)) and not isinstance(v, bool) for v in val)
    ):
        raise ParseError("expected [x, y] pair of numbers", field=where)
    return float(val[0]), float(val[1])


def load(data: bytes | str) -> ClusterNet:
    """Parse a cluster file.  Raises ParseError or SchemaVersionError."""
    if isinstance(data, bytes):
        try:
            data = data.decode("utf-8")
        except UnicodeDecodeError as exc:
            raise ParseError(f"not UTF-8: {exc}") from exc
    try:
        obj = json.loads(data)
    except json.JSONDecodeError as exc:
        raise ParseError(exc.msg, line=exc.lineno) from exc
    if not isinstance(obj, dict):
        raise ParseError("top level must be an object")
    version = _require(obj, "version", str, "")
    if version != SCHEMA_VERSION:
        raise SchemaVersionError(f"unsupported cluster file version {version!r}")
    m = _require(obj, "m", int, "")
    window = _require(obj, "window", list, "")
    if len(window) != 4 or not all(isinstance(v, (int, float)) and not isinstance(v, bool) for v in window):
        raise ParseError("window must be [xmin, ymin, xmax, ymax]", field="window")
    nodes = []
    for k, raw in enumerate(_require(obj, "nodes", list, "")):
        where = f"nodes[{k}]."
        nodes.append(Node(_require(raw, "id", int, where), float(_require(raw, "x", float, where)), float(_require(raw, "y", float, where))))
    by_id = {n.id: n for n in nodes}
    arcs = []
    for k, raw in enumerate(_require(obj, "arcs", list, "")):
        where = f"arcs[{k}]."
        aid = _require(raw, "id", int, where)
        src = _require(raw, "from", int, where)
        dst = _require(raw, "to", int, where)
        left = _require(raw, "left", int, where)
        right = _require(raw, "right", int, where)
        pts_raw = _require(raw, "points", list, where)
        if len(pts_raw) < 2:
            raise ParseError("an arc needs at least 2 points", field=f"{where}points")
        pts = np.array([_point(p, f"{where}points[{j}]") for j, p in enumerate(pts_raw)])
        for end, nid in ((0, src), (-1, dst)):
            if nid not in by_id:
                raise ParseError(f"unknown node {nid}", field=f"{where}{'from' if end == 0 else 'to'}")
            if np.max(np.abs(pts[end] - by_id[nid].position)) > ENDPOINT_TOL:
                raise ParseError(f"endpoint does not match node {nid} within {ENDPOINT_TOL}", field=f"{where}points")
        arcs.append(Arc(aid, src, dst, pts, left, right))
    targets = _require(obj, "target_areas", list, "")
    if not all(isinstance(v, (int, float)) and not isinstance(v, bool) for v in targets):
        raise ParseError("target areas must be numbers", field="target_areas")
    return ClusterNet(m, tuple(nodes), tuple(arcs), tuple(float(t) for t in targets), tuple(float(w) for w in window))
