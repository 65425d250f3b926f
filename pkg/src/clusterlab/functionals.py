"""Weighted area and perimeter of a cluster net, with vertex gradients.

The heavy lifting works on a packed representation: one vertex array ``V``
(nodes first, then arc interiors) plus integer segment tables.  Optimizers
keep the :class:`Topology` fixed and move ``V``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field as dc_field, replace

import numpy as np

from .cluster_net import Arc, ClusterNet, Node, region_half_edges
from .density import DensityField

# 2-point Gauss-Legendre on [0, 1]
_G2_T = np.array([0.5 - 0.5 / math.sqrt(3.0), 0.5 + 0.5 / math.sqrt(3.0)])
_G2_W = np.array([0.5, 0.5])
# 3-point Gauss-Legendre on [0, 1]
_G3_T = np.array([0.5 - 0.5 * math.sqrt(0.6), 0.5, 0.5 + 0.5 * math.sqrt(0.6)])
_G3_W = np.array([5.0, 8.0, 5.0]) / 18.0


def _dunavant4() -> tuple[np.ndarray, np.ndarray]:
    """Degree-4 symmetric 6-point triangle rule, weights summing to 1."""
    a, b = 0.445948490915965, 0.091576213509771
    wa, wb = 0.223381589678011, 0.109951743655322
    bary = []
    wts = []
    for (p, w) in ((a, wa), (b, wb)):
        q = 1.0 - 2.0 * p
        bary += [(p, p, q), (p, q, p), (q, p, p)]
        wts += [w, w, w]
    return np.array(bary), np.array(wts)


def _refined_rule() -> tuple[np.ndarray, np.ndarray]:
    """Degree-4 rule applied on the 4 midpoint subtriangles of a triangle."""
    base_b, base_w = _dunavant4()
    I = np.eye(3)
    m01, m12, m20 = (I[0] + I[1]) / 2, (I[1] + I[2]) / 2, (I[2] + I[0]) / 2
    subs = [(I[0], m01, m20), (m01, I[1], m12), (m20, m12, I[2]), (m12, m20, m01)]
    B, W = [], []
    for s in subs:
        S = np.array(s)  # corner barycentrics of the subtriangle
        B.append(base_b @ S)
        W.append(base_w / 4.0)
    return np.concatenate(B), np.concatenate(W)


TRI_B, TRI_W = _refined_rule()


@dataclass(eq=False)
class Topology:
    """Fixed combinatorics of a net: which vertices form which segments."""

    template: ClusterNet
    m: int
    n_vertices: int
    node_vertex: dict
    arc_vertices: list  # per arc position, vertex index array
    seg_p: np.ndarray
    seg_q: np.ndarray
    seg_left: np.ndarray
    seg_right: np.ndarray
    seg_arc: np.ndarray
    region_loops: list  # region i-1 -> list of vertex index arrays (region on the left)
    triangulations: dict = dc_field(default_factory=dict)

    @property
    def n_segments(self) -> int:
        return len(self.seg_p)


def pack(net: ClusterNet) -> tuple[Topology, np.ndarray]:
    node_vertex = {n.id: k for k, n in enumerate(net.nodes)}
    coords = [np.array([[n.x, n.y] for n in net.nodes]).reshape(-1, 2)]
    nxt = len(net.nodes)
    arc_vertices = []
    sp, sq, sl, sr, sa = [], [], [], [], []
    for k, a in enumerate(net.arcs):
        inner = len(a.points) - 2
        idx = np.empty(len(a.points), dtype=int)
        idx[0] = node_vertex[a.from_node]
        idx[-1] = node_vertex[a.to_node]
        idx[1:-1] = np.arange(nxt, nxt + inner)
        coords.append(np.asarray(a.points[1:-1]))
        nxt += inner
        arc_vertices.append(idx)
        sp.append(idx[:-1])
        sq.append(idx[1:])
        ns = len(idx) - 1
        sl.append(np.full(ns, a.left))
        sr.append(np.full(ns, a.right))
        sa.append(np.full(ns, k))
    V = np.concatenate(coords) if coords else np.zeros((0, 2))
    cat = (lambda xs: np.concatenate(xs) if xs else np.zeros(0, dtype=int))
    arc_pos = {a.id: k for k, a in enumerate(net.arcs)}
    loops = []
    for i in range(1, net.m + 1):
        region = []
        for half in region_half_edges(net, i):
            parts = []
            for aid, fwd in half:
                idx = arc_vertices[arc_pos[aid]]
                idx = idx if fwd else idx[::-1]
                parts.append(idx[:-1])
            region.append(np.concatenate(parts))
        loops.append(region)
    topo = Topology(
        net, net.m, nxt, node_vertex, arc_vertices,
        cat(sp).astype(int), cat(sq).astype(int), cat(sl).astype(int), cat(sr).astype(int), cat(sa).astype(int),
        loops,
    )
    return topo, V.astype(float)


def unpack(topo: Topology, V: np.ndarray) -> ClusterNet:
    net = topo.template
    nodes = tuple(Node(n.id, float(V[topo.node_vertex[n.id], 0]), float(V[topo.node_vertex[n.id], 1])) for n in net.nodes)
    arcs = tuple(
        Arc(a.id, a.from_node, a.to_node, V[topo.arc_vertices[k]].copy(), a.left, a.right)
        for k, a in enumerate(net.arcs)
    )
    return ClusterNet(net.m, nodes, arcs, net.target_areas, net.window)


# ---------------------------------------------------------------------------
# perimeter


def perimeter_terms(topo: Topology, V: np.ndarray, field: DensityField, grad: bool = False):
    """Per-segment weighted lengths and (optionally) dP/dV of shape (nv, 2)."""
    P0, Q0 = V[topo.seg_p], V[topo.seg_q]
    d = Q0 - P0
    L = np.sqrt((d ** 2).sum(axis=1))
    S = P0[:, None, :] + _G2_T[None, :, None] * d[:, None, :]
    hv = field.h(S)
    hbar = (hv * _G2_W).sum(axis=1)
    per_seg = L * hbar
    if not grad:
        return per_seg, None
    u = d / L[:, None]
    gh = field.grad_h(S)
    # d/dP: -u*hbar + L*sum w (1-t) grad_h ; d/dQ: u*hbar + L*sum w t grad_h
    wgh_p = (gh * (_G2_W * (1 - _G2_T))[None, :, None]).sum(axis=1)
    wgh_q = (gh * (_G2_W * _G2_T)[None, :, None]).sum(axis=1)
    dP = np.zeros((topo.n_vertices, 2))
    np.add.at(dP, topo.seg_p, -u * hbar[:, None] + L[:, None] * wgh_p)
    np.add.at(dP, topo.seg_q, u * hbar[:, None] + L[:, None] * wgh_q)
    return per_seg, dP


def perimeter_change(topo: Topology, V0: np.ndarray, V1: np.ndarray, field: DensityField) -> float:
    """P(V1) - P(V0) summed segment by segment without cancelling the totals.

    Near stationarity the change is far below the rounding error of either
    perimeter, so a line search comparing totals sees only noise.
    """
    d0 = V0[topo.seg_q] - V0[topo.seg_p]
    d1 = V1[topo.seg_q] - V1[topo.seg_p]
    L0 = np.sqrt((d0 ** 2).sum(axis=1))
    L1 = np.sqrt((d1 ** 2).sum(axis=1))
    dd = d1 - d0
    dL = (dd * (d1 + d0)).sum(axis=1) / np.maximum(L0 + L1, 1e-300)
    S0 = V0[topo.seg_p][:, None, :] + _G2_T[None, :, None] * d0[:, None, :]
    S1 = V1[topo.seg_p][:, None, :] + _G2_T[None, :, None] * d1[:, None, :]
    h0 = (field.h(S0) * _G2_W).sum(axis=1)
    h1 = (field.h(S1) * _G2_W).sum(axis=1)
    return float(math.fsum(h1 * dL + (h1 - h0) * L0))


# ---------------------------------------------------------------------------
# area via flux (div F = g)


def _split_nodes(P0: np.ndarray, Q0: np.ndarray, field: DensityField):
    """Quadrature nodes/weights on [0,1] per segment, split at the singular axis."""
    ns = len(P0)
    if not field.singular_axis:
        return np.broadcast_to(_G3_T, (ns, 3)), np.broadcast_to(_G3_W, (ns, 3))
    px, qx = P0[:, 0], Q0[:, 0]
    cross = (px * qx < 0)
    tstar = np.ones(ns)
    tstar[cross] = px[cross] / (px[cross] - qx[cross])
    T = np.concatenate([tstar[:, None] * _G3_T[None, :], tstar[:, None] + (1 - tstar)[:, None] * _G3_T[None, :]], axis=1)
    W = np.concatenate([tstar[:, None] * _G3_W[None, :], (1 - tstar)[:, None] * _G3_W[None, :]], axis=1)
    # zero-weight nodes would sit on the endpoint, which may lie on the axis
    T[~cross, 3:] = T[~cross, :3]
    return T, W


def flux_area_terms(topo: Topology, V: np.ndarray, field: DensityField, grad: bool = False):
    m = topo.m
    P0, Q0 = V[topo.seg_p], V[topo.seg_q]
    d = Q0 - P0
    n = np.stack([d[:, 1], -d[:, 0]], axis=1)  # outward normal (times length) for the left region
    T, W = _split_nodes(P0, Q0, field)
    S = P0[:, None, :] + T[:, :, None] * d[:, None, :]
    F = field.flux(S)
    contrib = ((F * n[:, None, :]).sum(axis=-1) * W).sum(axis=1)
    areas = np.zeros(m + 1)
    np.add.at(areas, topo.seg_left, contrib)
    np.add.at(areas, topo.seg_right, -contrib)
    if not grad:
        return areas[1:], None
    JF = field.flux_jacobian(S)  # (..., a, b) = dF_a/dx_b
    JtN = np.einsum("skab,sa->skb", JF, n)
    Fw = (F * W[:, :, None]).sum(axis=1)
    gp = (JtN * (W * (1 - T))[:, :, None]).sum(axis=1) + np.stack([Fw[:, 1], -Fw[:, 0]], axis=1)
    gq = (JtN * (W * T)[:, :, None]).sum(axis=1) + np.stack([-Fw[:, 1], Fw[:, 0]], axis=1)
    if field.singular_axis:
        # the split point t* = px / (px - qx) moves with the endpoints
        px, qx = P0[:, 0], Q0[:, 0]
        cross = np.flatnonzero(px * qx < 0)
        if len(cross):
            f_val = (F[cross] * n[cross, None, :]).sum(axis=-1)  # integrand at the nodes
            f_dot = (JtN[cross] * d[cross, None, :]).sum(axis=-1)  # its t-derivative
            ts = T[cross, 0] / _G3_T[0]
            lo = f_val[:, :3] @ _G3_W + ts * (f_dot[:, :3] @ (_G3_W * _G3_T))
            hi = -(f_val[:, 3:] @ _G3_W) + (1 - ts) * (f_dot[:, 3:] @ (_G3_W * (1 - _G3_T)))
            dQ_dt = lo + hi
            den = (px[cross] - qx[cross]) ** 2
            gp[cross, 0] += dQ_dt * (-qx[cross] / den)
            gq[cross, 0] += dQ_dt * (px[cross] / den)
    J = np.zeros((m + 1, topo.n_vertices, 2))
    for side, sign in ((topo.seg_left, 1.0), (topo.seg_right, -1.0)):
        np.add.at(J, (side, topo.seg_p), sign * gp)
        np.add.at(J, (side, topo.seg_q), sign * gq)
    return areas[1:], J[1:]


# ---------------------------------------------------------------------------
# area via triangulation


def _tri_area(a, b, c) -> float:
    return 0.5 * ((b[0] - a[0]) * (c[1] - a[1]) - (b[1] - a[1]) * (c[0] - a[0]))


def ear_clip(poly: np.ndarray) -> list[tuple[int, int, int]]:
    """Triangulate a simple counterclockwise polygon by ear clipping."""
    n = len(poly)
    idx = list(range(n))
    tris = []
    guard = 0
    while len(idx) > 3:
        k = len(idx)
        found = False
        pts = poly[idx]
        prv = np.roll(pts, 1, axis=0)
        nxt = np.roll(pts, -1, axis=0)
        cross = (pts[:, 0] - prv[:, 0]) * (nxt[:, 1] - prv[:, 1]) - (pts[:, 1] - prv[:, 1]) * (nxt[:, 0] - prv[:, 0])
        # collinear vertices are never clipped while a strictly convex ear exists:
        # zero-area triangles would flip under any perturbation
        flat = np.abs(cross) <= 1e-12 * np.abs(cross).max()
        reflex = np.flatnonzero((cross < 0) | flat)
        # shortest new diagonal first: keeps triangles compact for the quadrature
        diag = ((nxt - prv) ** 2).sum(axis=1)
        for j in np.argsort(diag, kind="stable"):
            if cross[j] < 0 or flat[j]:
                continue
            a, b, c = prv[j], pts[j], nxt[j]
            cand = reflex[(reflex != j) & (reflex != (j - 1) % k) & (reflex != (j + 1) % k)]
            if len(cand):
                q = pts[cand]
                d1 = (b[0] - a[0]) * (q[:, 1] - a[1]) - (b[1] - a[1]) * (q[:, 0] - a[0])
                d2 = (c[0] - b[0]) * (q[:, 1] - b[1]) - (c[1] - b[1]) * (q[:, 0] - b[0])
                d3 = (a[0] - c[0]) * (q[:, 1] - c[1]) - (a[1] - c[1]) * (q[:, 0] - c[0])
                inside = (d1 >= 0) & (d2 >= 0) & (d3 >= 0)
                if np.any(inside):
                    continue
            tris.append((idx[(j - 1) % k], idx[j], idx[(j + 1) % k]))
            del idx[j]
            found = True
            break
        if not found:
            # numerically stuck: clip the most convex vertex
            guard += 1
            j = int(np.argmax(cross))
            tris.append((idx[(j - 1) % k], idx[j], idx[(j + 1) % k]))
            del idx[j]
            if guard > n:
                break
    if len(idx) == 3:
        tris.append(tuple(idx))
    return tris


def _loop_triangles(topo: Topology, V: np.ndarray, i: int, k: int, loop: np.ndarray):
    """Cached ear-clip triangulation of one loop as (sign, vertex-id triples).

    The cache is reused while every triangle keeps its orientation, which
    keeps the area a smooth function of V between retriangulations.
    """
    key = (i, k)
    cached = topo.triangulations.get(key)
    if cached is not None:
        sgn, tv = cached
        A0, A1, A2 = V[tv[:, 0]], V[tv[:, 1]], V[tv[:, 2]]
        At = (A1[:, 0] - A0[:, 0]) * (A2[:, 1] - A0[:, 1]) - (A1[:, 1] - A0[:, 1]) * (A2[:, 0] - A0[:, 0])
        if np.all(At >= 0):
            return sgn, tv
    poly = V[loop]
    x, y = poly[:, 0], poly[:, 1]
    signed = 0.5 * (np.dot(x, np.roll(y, -1)) - np.dot(np.roll(x, -1), y))
    sgn = 1.0 if signed > 0 else -1.0
    order = loop if sgn > 0 else loop[::-1]
    tris = np.array(ear_clip(V[order]), dtype=int).reshape(-1, 3)
    tv = order[tris]
    topo.triangulations[key] = (sgn, tv)
    return sgn, tv


def triangulated_area_terms(topo: Topology, V: np.ndarray, field: DensityField, grad: bool = False):
    m = topo.m
    areas = np.zeros(m)
    J = np.zeros((m, topo.n_vertices, 2)) if grad else None
    for i, loops in enumerate(topo.region_loops):
        for k, loop in enumerate(loops):
            sgn, tv = _loop_triangles(topo, V, i, k, loop)
            if len(tv) == 0:
                continue
            A0, A1, A2 = V[tv[:, 0]], V[tv[:, 1]], V[tv[:, 2]]
            At = 0.5 * ((A1[:, 0] - A0[:, 0]) * (A2[:, 1] - A0[:, 1]) - (A1[:, 1] - A0[:, 1]) * (A2[:, 0] - A0[:, 0]))
            X = np.einsum("jk,tkd->tjd", TRI_B, np.stack([A0, A1, A2], axis=1))
            gv = field.g(X)
            mean = (gv * TRI_W).sum(axis=1)
            areas[i] += sgn * float((At * mean).sum())
            if grad:
                # dA/dv for the three corners
                dA0 = 0.5 * np.stack([A1[:, 1] - A2[:, 1], A2[:, 0] - A1[:, 0]], axis=1)
                dA1 = 0.5 * np.stack([A2[:, 1] - A0[:, 1], A0[:, 0] - A2[:, 0]], axis=1)
                dA2 = 0.5 * np.stack([A0[:, 1] - A1[:, 1], A1[:, 0] - A0[:, 0]], axis=1)
                gg = field.grad_g(X)  # (nt, nq, 2)
                for k, dA in enumerate((dA0, dA1, dA2)):
                    term = dA * mean[:, None] + At[:, None] * (gg * (TRI_W * TRI_B[:, k])[None, :, None]).sum(axis=1)
                    np.add.at(J[i], tv[:, k], sgn * term)
    return areas, J


def area_terms(topo: Topology, V: np.ndarray, field: DensityField, grad: bool = False, method: str = "auto"):
    """Weighted areas (m,) and optionally the Jacobian (m, nv, 2)."""
    if method == "auto":
        method = "flux" if field.has_flux else "triangulation"
    if method == "flux":
        if not field.has_flux:
            raise ValueError(f"density {field.name} carries no flux")
        return flux_area_terms(topo, V, field, grad)
    if method == "triangulation":
        return triangulated_area_terms(topo, V, field, grad)
    raise ValueError(f"unknown area method {method!r}")


def moment_terms(topo: Topology, V: np.ndarray, field: DensityField, grad: bool = False):
    """Weighted first moments of the union of all bounded regions, (2,), and optionally (2, nv, 2)."""
    if field.moment_fluxes is None:
        raise ValueError(f"density {field.name} carries no moment fluxes")
    M = np.zeros(2)
    J = np.zeros((2, topo.n_vertices, 2)) if grad else None
    for k, (F, DF) in enumerate(field.moment_fluxes):
        sub = replace(field, flux=F, flux_jacobian=DF, singular_axis=False)
        A, Jk = flux_area_terms(topo, V, sub, grad)
        M[k] = math.fsum(A)
        if grad:
            J[k] = Jk.sum(axis=0)
    return M, J


def area_method(field: DensityField) -> str:
    return "flux" if field.has_flux else "triangulation"


# ---------------------------------------------------------------------------
# net-level API


@dataclass(frozen=True)
class FunctionalReport:
    areas: tuple[float, ...]
    perimeter: float
    per_arc_perimeter: dict
    area_method: str

    def to_dict(self) -> dict:
        return {
            "areas": list(self.areas),
            "perimeter": self.perimeter,
            "per_arc_perimeter": {str(k): v for k, v in self.per_arc_perimeter.items()},
            "area_method": self.area_method,
        }


@dataclass(frozen=True)
class GradientPack:
    """dP has shape (nv, 2); J has shape (m, 2 nv), columns ordered x0, y0, x1, ..."""

    dP: np.ndarray
    J: np.ndarray
    topology: Topology


def weighted_area(net: ClusterNet, field: DensityField, method: str = "auto") -> np.ndarray:
    topo, V = pack(net)
    return area_terms(topo, V, field, method=method)[0]


def weighted_perimeter(net: ClusterNet, field: DensityField, method: str = "auto") -> FunctionalReport:
    topo, V = pack(net)
    per_seg, _ = perimeter_terms(topo, V, field)
    per_arc = np.zeros(len(net.arcs))
    np.add.at(per_arc, topo.seg_arc, per_seg)
    areas, _ = area_terms(topo, V, field, method=method)
    return FunctionalReport(
        tuple(float(a) for a in areas),
        float(per_arc.sum()),
        {a.id: float(per_arc[k]) for k, a in enumerate(net.arcs)},
        area_method(field) if method == "auto" else method,
    )


def region_perimeter(net: ClusterNet, field: DensityField, i: int) -> float:
    """Weighted length of the boundary of region i alone."""
    topo, V = pack(net)
    per_seg, _ = perimeter_terms(topo, V, field)
    mask = (topo.seg_left == i) | (topo.seg_right == i)
    return float(per_seg[mask].sum())


def segment_disk_interval(P0: np.ndarray, Q0: np.ndarray, center, radius: float):
    """Parameter interval [t0, t1] of each segment inside a closed disk (t0 > t1 if none)."""
    c = np.asarray(center, dtype=float)
    d = Q0 - P0
    f = P0 - c
    a = (d ** 2).sum(axis=1)
    b = 2 * (f * d).sum(axis=1)
    cc = (f ** 2).sum(axis=1) - radius ** 2
    disc = b * b - 4 * a * cc
    ok = disc > 0
    sq = np.sqrt(np.where(ok, disc, 0.0))
    t0 = np.where(ok, (-b - sq) / (2 * a), 1.0)
    t1 = np.where(ok, (-b + sq) / (2 * a), 0.0)
    return np.clip(t0, 0.0, 1.0), np.clip(t1, 0.0, 1.0)


def relative_perimeter(net: ClusterNet, field: DensityField, center, radius: float) -> float:
    """Weighted length of the net inside the open disk B(center, radius)."""
    P0, Q0, _ = net.segments()
    if len(P0) == 0:
        return 0.0
    t0, t1 = segment_disk_interval(P0, Q0, center, radius)
    keep = t1 > t0
    P0, Q0, t0, t1 = P0[keep], Q0[keep], t0[keep], t1[keep]
    A = P0 + t0[:, None] * (Q0 - P0)
    B = P0 + t1[:, None] * (Q0 - P0)
    d = B - A
    L = np.sqrt((d ** 2).sum(axis=1))
    S = A[:, None, :] + _G2_T[None, :, None] * d[:, None, :]
    return float((L * (field.h(S) * _G2_W).sum(axis=1)).sum())


def gradients(net: ClusterNet, field: DensityField, method: str = "auto") -> GradientPack:
    topo, V = pack(net)
    _, dP = perimeter_terms(topo, V, field, grad=True)
    _, J = area_terms(topo, V, field, grad=True, method=method)
    return GradientPack(dP, J.reshape(topo.m, 2 * topo.n_vertices), topo)
