"""Area-constrained weighted-perimeter minimization of cluster nets.

Projected gradient descent with exact Newton restoration of the areas after
every trial step, periodic arclength remeshing, and collapse/pop surgery for
colliding triple junctions.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field as dc_field

import numpy as np

from .cluster_net import Arc, ClusterNet, Node, find_crossings, validate
from .density import DensityField
from .errors import (
    ClusterLabError,
    LabelInconsistency,
    LineSearchFailed,
    PlanarityBroken,
    RestoreFailed,
    SingularConstraints,
)
from .functionals import Topology, area_terms, moment_terms, pack, perimeter_change, perimeter_terms, unpack

logger = logging.getLogger("clusterlab.optimizer")


@dataclass
class SolveConfig:
    max_iters: int = 20000
    grad_tol: float = 1e-8  # relative to the mean of h along the initial net
    area_tol: float = 1e-10
    remesh_every: int = 25
    target_spacing: float | None = None  # default: window diagonal / 200
    pop_length: float | None = None  # default: 2 * spacing
    shrink: float = 0.5
    armijo: float = 1e-4
    max_halvings: int = 40
    seed: int = 0
    ridge: float = 1e-12
    restore_iters: int = 20
    # largest vertex move per trial step, in units of the spacing
    max_move: float = 0.5
    # hold the weighted centroid of the cluster at the origin; None means
    # "whenever the density supplies moment fluxes" (translation-unstable densities)
    pin_centroid: bool | None = None
    # stop when P has not moved by more than rounding over this many iterations
    stall_window: int = 1000

    def __post_init__(self):
        for name in ("max_iters", "grad_tol", "area_tol", "remesh_every", "shrink", "armijo", "max_halvings", "max_move"):
            if not getattr(self, name) > 0:
                raise ValueError(f"SolveConfig.{name} must be positive")
        if self.grad_tol >= 1:
            raise ValueError("grad_tol must be below 1")
        for name in ("target_spacing", "pop_length"):
            v = getattr(self, name)
            if v is not None and not v > 0:
                raise ValueError(f"SolveConfig.{name} must be positive")

    def spacing(self, net: ClusterNet) -> float:
        return self.target_spacing or net.window_diagonal / 200.0

    def pop(self, net: ClusterNet) -> float:
        return self.pop_length or 2.0 * self.spacing(net)

    def to_dict(self) -> dict:
        return {
            "max_iters": self.max_iters, "grad_tol": self.grad_tol, "area_tol": self.area_tol,
            "remesh_every": self.remesh_every, "target_spacing": self.target_spacing,
            "pop_length": self.pop_length, "shrink": self.shrink, "armijo": self.armijo,
            "max_halvings": self.max_halvings, "seed": self.seed, "ridge": self.ridge,
            "restore_iters": self.restore_iters, "max_move": self.max_move,
            "pin_centroid": self.pin_centroid, "stall_window": self.stall_window,
        }

    def pins_centroid(self, field: DensityField) -> bool:
        if self.pin_centroid is None:
            return field.moment_fluxes is not None
        if self.pin_centroid and field.moment_fluxes is None:
            raise ValueError(f"density {field.name} cannot pin the centroid (no moment fluxes)")
        return self.pin_centroid


@dataclass
class StepInfo:
    perimeter: float
    grad_norm: float
    step: float
    halvings: int
    max_area_violation: float
    converged: bool = False


@dataclass
class SolveTrace:
    seed: int
    perimeter: list = dc_field(default_factory=list)
    area_violation: list = dc_field(default_factory=list)
    step: list = dc_field(default_factory=list)
    grad_norm: list = dc_field(default_factory=list)
    events: list = dc_field(default_factory=list)
    status: str = "max_iters"
    iterations: int = 0
    message: str = ""
    # final Lagrange multipliers: one per area, then the two moments when pinned
    multipliers: list = dc_field(default_factory=list)

    def summary(self) -> dict:
        return {
            "status": self.status,
            "iterations": self.iterations,
            "seed": self.seed,
            "initial_perimeter": self.perimeter[0] if self.perimeter else None,
            "final_perimeter": self.perimeter[-1] if self.perimeter else None,
            "final_grad_norm": self.grad_norm[-1] if self.grad_norm else None,
            "final_area_violation": self.area_violation[-1] if self.area_violation else None,
            "multipliers": list(self.multipliers),
            "events": list(self.events),
            "message": self.message,
        }


# ---------------------------------------------------------------------------
# constraint algebra


def _normal_solve(Jf: np.ndarray, rhs: np.ndarray, ridge: float) -> np.ndarray:
    M = Jf @ Jf.T
    scale = max(float(np.trace(M)) / max(len(M), 1), 1e-300)
    M = M + ridge * scale * np.eye(len(M))
    w = np.linalg.eigvalsh(M)
    if w[0] <= 1e-14 * w[-1]:
        raise SingularConstraints(f"constraint normal matrix is singular (eigenvalues {w[0]:.3e} .. {w[-1]:.3e})")
    return np.linalg.solve(M, rhs)


@dataclass(frozen=True)
class Constraints:
    """Weighted areas, optionally followed by the two first moments of the cluster (target 0)."""

    field: DensityField
    areas: np.ndarray
    moments: bool = False

    @property
    def targets(self) -> np.ndarray:
        return np.concatenate([self.areas, np.zeros(2)]) if self.moments else np.asarray(self.areas)

    @property
    def scales(self) -> np.ndarray:
        # moment rows are measured against the total area (a centroid offset)
        total = float(np.sum(self.areas))
        return np.concatenate([self.areas, [total, total]]) if self.moments else np.asarray(self.areas)

    def evaluate(self, topo: Topology, V: np.ndarray):
        A, J = area_terms(topo, V, self.field, grad=True)
        if self.moments:
            M, JM = moment_terms(topo, V, self.field, grad=True)
            A, J = np.concatenate([A, M]), np.concatenate([J, JM])
        return A, J

    def violation(self, C: np.ndarray) -> float:
        if not len(C):
            return 0.0
        return float(np.max(np.abs(self.targets - C) / self.scales))


def constraints_for(net: ClusterNet, field: DensityField, cfg: SolveConfig) -> Constraints:
    return Constraints(field, np.asarray(net.target_areas, dtype=float), net.m > 0 and cfg.pins_centroid(field))


def _restore_packed(topo: Topology, V: np.ndarray, cons: Constraints, tol: float, max_iter: int, ridge: float,
                    mask: np.ndarray | None = None):
    """Newton iterations V <- V + J^T dl with (J J^T) dl = targets - C(V)."""
    targets = cons.targets
    for it in range(max_iter + 1):
        C, J = cons.evaluate(topo, V)
        r = targets - C
        viol = cons.violation(C)
        if viol < tol:
            return V, C, viol
        if it == max_iter:
            break
        Jf = J.reshape(len(targets), -1)
        if mask is not None:
            Jf = Jf * mask.ravel()[None, :]
        dl = _normal_solve(Jf, r, ridge)
        V = V + (Jf.T @ dl).reshape(-1, 2)
        if not np.all(np.isfinite(V)):
            break
    raise RestoreFailed(f"area restoration did not reach {tol:g} in {max_iter} iterations (violation {viol:.3e})")


def free_coordinates(V: np.ndarray, field: DensityField, frozen: np.ndarray | None = None) -> np.ndarray | None:
    """(nv, 2) 0/1 mask of movable coordinates.

    Vertices sitting exactly on a singular axis of the field may only slide
    along it; ``frozen`` vertices do not move at all.
    """
    mask = np.ones_like(V)
    if field.singular_axis:
        mask[V[:, 0] == 0.0, 0] = 0.0
    if frozen is not None:
        mask[np.asarray(frozen, dtype=bool)] = 0.0
    return None if mask.all() else mask


def restore_areas(net: ClusterNet, field: DensityField, cfg: SolveConfig | None = None,
                  frozen: np.ndarray | None = None) -> ClusterNet:
    """Newton-correct vertex positions until every weighted area hits its target.

    ``frozen`` optionally marks packed vertices (see :func:`pack`) that must
    not move.
    """
    cfg = cfg or SolveConfig()
    if net.m == 0:
        return net
    topo, V = pack(net)
    mask = free_coordinates(V, field, frozen)
    V2, _, _ = _restore_packed(topo, V, constraints_for(net, field, cfg), cfg.area_tol, cfg.restore_iters,
                               cfg.ridge, mask)
    if V2 is V:
        return net
    return unpack(topo, V2)


# ---------------------------------------------------------------------------
# stepping


class _Stepper:
    """Owns the packed state of one solve between topology changes."""

    def __init__(self, net: ClusterNet, field: DensityField, cfg: SolveConfig, grad_tol_abs: float):
        self.topo, self.V = pack(net)
        self.field = field
        self.cfg = cfg
        self.cons = constraints_for(net, field, cfg)
        self.spacing = cfg.spacing(net)
        self.grad_tol = grad_tol_abs
        self.prev_x = None
        self.prev_d = None
        self.s_prev = None
        self.mask = free_coordinates(self.V, field)
        self._eval()

    def _eval(self):
        per_seg, dP = perimeter_terms(self.topo, self.V, self.field, grad=True)
        A, J = self.cons.evaluate(self.topo, self.V)
        self.P = float(per_seg.sum())
        self.A = A
        g = dP.ravel()
        N = np.ones_like(g) if self.mask is None else self.mask.ravel()
        g = g * N
        if len(A):
            Jf = J.reshape(len(A), -1) * N[None, :]
            lam = _normal_solve(Jf, Jf @ g, self.cfg.ridge)
            d = -g + Jf.T @ lam
            self.lam = lam
        else:
            d = -g
            self.lam = np.zeros(0)
        self.d = d.reshape(-1, 2)
        self.gnorm = float(np.sqrt((self.d ** 2).sum(axis=1)).max()) if len(self.d) else 0.0

    def violation(self) -> float:
        return self.cons.violation(self.A)

    def net(self) -> ClusterNet:
        return unpack(self.topo, self.V)

    def _trial_step(self) -> float:
        cap = self.cfg.max_move * self.spacing / max(self.gnorm, 1e-300)
        s = None
        if self.prev_x is not None:
            dx = (self.V - self.prev_x).ravel()
            dy = (self.prev_d - self.d).ravel()
            denom = float(dx @ dy)
            if denom > 0:
                s = float(dx @ dx) / denom
        if s is None or not math.isfinite(s) or s <= 0:
            s = self.s_prev * 2.0 if self.s_prev else cap
        return min(s, cap)

    def noise_floor(self) -> float:
        """Rounding-level uncertainty of a merit comparison."""
        eps = np.finfo(float).eps
        return 64 * eps * (abs(self.P) + float(np.abs(self.lam) @ np.abs(self.A)))

    def step(self) -> StepInfo:
        cfg = self.cfg
        if self.gnorm < self.grad_tol:
            return StepInfo(self.P, self.gnorm, 0.0, 0, self.violation(), converged=True)
        s = s0 = self._trial_step()
        dd = float((self.d ** 2).sum())
        for halvings in range(cfg.max_halvings + 1):
            V_try = self.V + s * self.d
            try:
                V_try, A_try, _ = _restore_packed(
                    self.topo, V_try, self.cons, cfg.area_tol, cfg.restore_iters, cfg.ridge, self.mask,
                )
            except (RestoreFailed, SingularConstraints):
                s *= cfg.shrink
                continue
            # Armijo on the Lagrangian P - lam.(A - targets): a restoration
            # that fixes an inherited area error shifts P by about lam.dA,
            # which would otherwise swamp small decreases
            merit = perimeter_change(self.topo, self.V, V_try, self.field) - float(self.lam @ (A_try - self.A))
            if merit <= -cfg.armijo * s * dd:
                self.prev_x, self.prev_d = self.V, self.d
                self.V = V_try
                self.s_prev = s
                self._eval()
                return StepInfo(self.P, self.gnorm, s, halvings, self.violation())
            s *= cfg.shrink
        raise LineSearchFailed(
            f"no acceptable step after {cfg.max_halvings} halvings (projected gradient {self.gnorm:.3e})",
            at_noise_floor=s0 * dd <= self.noise_floor(),
            grad_norm=self.gnorm,
        )


def project_and_step(net: ClusterNet, field: DensityField, cfg: SolveConfig | None = None):
    """One projected-gradient step with restoration; returns ``(net', StepInfo)``."""
    cfg = cfg or SolveConfig()
    st = _Stepper(net, field, cfg, cfg.grad_tol * _h_scale(net, field))
    info = st.step()
    if info.converged:
        return net, info
    return st.net(), info


def _h_scale(net: ClusterNet, field: DensityField) -> float:
    topo, V = pack(net)
    if topo.n_segments == 0:
        return 1.0
    per_seg, _ = perimeter_terms(topo, V, field)
    L = np.linalg.norm(V[topo.seg_q] - V[topo.seg_p], axis=1)
    return float(per_seg.sum() / L.sum())


# ---------------------------------------------------------------------------
# remeshing


def resample_polyline(pts: np.ndarray, n: int) -> np.ndarray:
    """n uniform-arclength segments along a polyline; endpoints kept exactly."""
    seg = np.linalg.norm(np.diff(pts, axis=0), axis=1)
    s = np.concatenate([[0.0], np.cumsum(seg)])
    t = np.linspace(0.0, s[-1], n + 1)
    out = np.stack([np.interp(t, s, pts[:, 0]), np.interp(t, s, pts[:, 1])], axis=1)
    out[0], out[-1] = pts[0], pts[-1]
    return out


def _target_segments(length: float, spacing: float) -> int:
    return max(8, int(round(length / spacing)))


def conform_to_axis(pts: np.ndarray) -> np.ndarray:
    """Put a vertex exactly on x1 = 0 wherever the polyline crosses it.

    The interior endpoint nearer to the crossing is moved there unless that
    would make two neighbouring vertices lie on the axis; otherwise the
    crossing is inserted as a new vertex.
    """
    pts = np.array(pts, dtype=float)
    k = 0
    while k < len(pts) - 1:
        p, q = pts[k], pts[k + 1]
        if p[0] * q[0] < 0:
            t = p[0] / (p[0] - q[0])
            c = np.array([0.0, p[1] + t * (q[1] - p[1])])
            order = (k, k + 1) if t <= 0.5 else (k + 1, k)
            for j in order:
                if 0 < j < len(pts) - 1 and pts[j - 1][0] != 0.0 and pts[j + 1][0] != 0.0:
                    pts[j] = c
                    break
            else:
                pts = np.insert(pts, k + 1, c, axis=0)
        k += 1
    return pts


def remesh(net: ClusterNet, cfg: SolveConfig | None = None, field: DensityField | None = None,
           spacing: float | None = None) -> ClusterNet:
    """Resample every arc to uniform spacing (at least 8 segments per arc).

    Node positions are unchanged.  Areas are re-restored when ``field`` is
    given.  For fields with a singular axis the new vertices conform to the
    axis (see :func:`conform_to_axis`).  Raises PlanarityBroken if resampling
    creates crossings at both the requested and the halved spacing.
    """
    cfg = cfg or SolveConfig()
    spacing = spacing or cfg.spacing(net)
    axis = field is not None and field.singular_axis
    for attempt, ell in enumerate((spacing, spacing / 2)):
        updates = {}
        for a in net.arcs:
            L = a.length()
            new = resample_polyline(a.points, _target_segments(L, ell))
            updates[a.id] = conform_to_axis(new) if axis else new
        out = net.replace_points(updates)
        if field is not None and out.m:
            out = restore_areas(out, field, cfg)
        if not find_crossings(out):
            return out
        logger.info("remesh at spacing %.4g created crossings; retrying", ell)
    raise PlanarityBroken("remeshing creates crossing arcs")


def needs_remesh(net: ClusterNet, spacing: float, ratio: float = 1.5, field: DensityField | None = None) -> bool:
    """Spacing far from target, uneven spacing, or (singular axis) a non-conforming crossing."""
    for a in net.arcs:
        if field is not None and field.singular_axis:
            x = a.points[:, 0]
            if np.any(x[:-1] * x[1:] < 0):
                return True
        seg = np.linalg.norm(np.diff(a.points, axis=0), axis=1)
        n_target = _target_segments(float(seg.sum()), spacing)
        if abs(len(seg) - n_target) > max(1, 0.1 * n_target):
            return True
        if seg.max() > ratio * seg.min():
            return True
    return False


# ---------------------------------------------------------------------------
# topology surgery


def _unit(v: np.ndarray) -> np.ndarray:
    n = np.linalg.norm(v)
    return v / n if n > 0 else v


def _end_polyline(arc: Arc, end: int) -> np.ndarray:
    """Arc points ordered away from the given end."""
    return arc.points if end == 0 else arc.points[::-1]


def _point_at_distance(pts: np.ndarray, dist: float) -> np.ndarray:
    seg = np.linalg.norm(np.diff(pts, axis=0), axis=1)
    s = np.concatenate([[0.0], np.cumsum(seg)])
    dist = min(dist, s[-1])
    return np.array([np.interp(dist, s, pts[:, 0]), np.interp(dist, s, pts[:, 1])])


@dataclass(frozen=True)
class PopChoice:
    index: int  # the first group is incident ends (index, index + 1) in ccw order
    pairing: tuple[tuple[int, int], tuple[int, int]]  # arc ids grouped per new node
    local_perimeter: float
    midpoint: tuple[float, float]
    labels: tuple[int, int]  # (left, right) of the new arc, oriented first group -> second


def _pop_geometry(net: ClusterNet, node_id: int, pop_length: float):
    ends = net.incident_arcs(node_id)
    if len(ends) != 4:
        raise ValueError(f"node {node_id} has degree {len(ends)}, expected 4")
    c = net.node(node_id).position
    polys = [_end_polyline(net.arc(aid), e) for aid, e in ends]
    dirs = [_unit(_point_at_distance(p, pop_length) - c) for p in polys]
    return ends, c, polys, dirs


def pop_candidates(net: ClusterNet, node_id: int, field: DensityField, pop_length: float) -> list[PopChoice]:
    """Both ways of splitting a degree-4 node, with their local weighted lengths.

    Pairings whose new arc would separate a region from itself are dropped.
    """
    ends, c, polys, dirs = _pop_geometry(net, node_id, pop_length)
    hc = float(field.h(c[None, :])[0])
    probes = [_point_at_distance(p, 2 * pop_length) for p in polys]
    sectors = []
    for aid, e in ends:
        a = net.arc(aid)
        sectors.append(a.left if e == 0 else a.right)  # counterclockwise of that end
    out = []
    for k in (0, 1):
        g1, g2 = (k, k + 1), ((k + 2) % 4, (k + 3) % 4)
        right, left = sectors[(k + 1) % 4], sectors[(k + 3) % 4]
        if left == right:
            continue
        u = _unit(dirs[g1[0]] + dirs[g1[1]] - dirs[g2[0]] - dirs[g2[1]])
        n1, n2 = c + 0.5 * pop_length * u, c - 0.5 * pop_length * u
        length = pop_length + sum(np.linalg.norm(n1 - probes[j]) for j in g1) + sum(np.linalg.norm(n2 - probes[j]) for j in g2)
        mid = 0.5 * (n1 + n2)
        out.append(PopChoice(
            k, ((ends[g1[0]][0], ends[g1[1]][0]), (ends[g2[0]][0], ends[g2[1]][0])),
            hc * float(length), (float(mid[0]), float(mid[1])), (left, right),
        ))
    return out


def pop_junction(net: ClusterNet, node_id: int, field: DensityField, pop_length: float) -> ClusterNet:
    """Replace a degree-4 node by two degree-3 nodes joined by a new short arc.

    The pairing with the smaller local weighted length wins; ties go to the
    smaller new-arc midpoint (x, then y), then to the first pairing.
    """
    cands = pop_candidates(net, node_id, field, pop_length)
    if not cands:
        raise LabelInconsistency(f"labels around node {node_id} admit no split into two junctions")
    scale = max(abs(c.local_perimeter) for c in cands) or 1.0
    choice = min(
        cands,
        key=lambda c: (round(c.local_perimeter / scale, 12), c.midpoint[0], c.midpoint[1], c.index),
    )
    ends, c, polys, dirs = _pop_geometry(net, node_id, pop_length)
    k = choice.index
    g1, g2 = (k, k + 1), ((k + 2) % 4, (k + 3) % 4)
    u = _unit(dirs[g1[0]] + dirs[g1[1]] - dirs[g2[0]] - dirs[g2[1]])
    n1, n2 = c + 0.5 * pop_length * u, c - 0.5 * pop_length * u
    new_node = max(n.id for n in net.nodes) + 1
    new_arc = max(a.id for a in net.arcs) + 1

    nodes = [Node(n.id, float(n1[0]), float(n1[1])) if n.id == node_id else n for n in net.nodes]
    nodes.append(Node(new_node, float(n2[0]), float(n2[1])))

    changed = {}
    for j in range(4):
        aid, e = ends[j]
        target_id, target_pos = (node_id, n1) if j in g1 else (new_node, n2)
        pts = polys[j]
        # drop the vertices inside the popped neighbourhood
        far = np.linalg.norm(pts - c, axis=1) > pop_length
        far[-1] = True
        pts = np.vstack([target_pos, pts[int(np.argmax(far)):]])
        a = changed.get(aid, net.arc(aid))
        if e == 0:
            changed[aid] = Arc(aid, target_id, a.to_node, pts, a.left, a.right)
        else:
            changed[aid] = Arc(aid, a.from_node, target_id, pts[::-1], a.left, a.right)
    arcs = [changed.get(a.id, a) for a in net.arcs]
    left, right = choice.labels
    arcs.append(Arc(new_arc, node_id, new_node, np.vstack([n1, n2]), left, right))
    return ClusterNet(net.m, tuple(nodes), tuple(arcs), net.target_areas, net.window)


def collapse_arc(net: ClusterNet, arc_id: int) -> tuple[ClusterNet, int]:
    """Merge the two end nodes of a short arc into one degree-4 node at its midpoint."""
    arc = net.arc(arc_id)
    u, v = arc.from_node, arc.to_node
    if u == v:
        raise ClusterLabError(f"arc {arc_id} is a closed loop: a region is vanishing")
    others = [a for a in net.arcs if a.id != arc_id and {a.from_node, a.to_node} == {u, v}]
    if others:
        raise ClusterLabError(f"collapsing arc {arc_id} would remove a two-sided region")
    mid = 0.5 * (net.node(u).position + net.node(v).position)
    nodes = [Node(u, float(mid[0]), float(mid[1])) if n.id == u else n for n in net.nodes if n.id != v]
    arcs = []
    for a in net.arcs:
        if a.id == arc_id:
            continue
        pts = np.array(a.points)
        src, dst = a.from_node, a.to_node
        if src in (u, v):
            pts[0] = mid
            src = u
        if dst in (u, v):
            pts[-1] = mid
            dst = u
        # drop interior points that now coincide with the merged node
        keep = np.ones(len(pts), dtype=bool)
        keep[1:-1] = np.linalg.norm(pts[1:-1] - mid, axis=1) > 1e-12
        arcs.append(Arc(a.id, src, dst, pts[keep], a.left, a.right))
    return ClusterNet(net.m, tuple(nodes), tuple(arcs), net.target_areas, net.window), u


def short_arcs(net: ClusterNet, threshold: float) -> list[int]:
    out = []
    for a in net.arcs:
        if a.closed:
            continue
        if net.degree(a.from_node) == 3 and net.degree(a.to_node) == 3 and a.length() < threshold:
            out.append(a.id)
    return out


# ---------------------------------------------------------------------------
# driver


def _stalled(history, events, since: int) -> bool:
    """True when P moved by no more than rounding across the window and no
    remesh or pop happened inside it."""
    if any(e["iteration"] > since for e in events):
        return False
    P0, P1 = history[0], history[-1]
    return P0 - P1 <= len(history) * np.finfo(float).eps * abs(P1)


def solve(net: ClusterNet, field: DensityField, cfg: SolveConfig | None = None):
    """Minimize weighted perimeter at fixed weighted areas.  Returns ``(net*, SolveTrace)``."""
    cfg = cfg or SolveConfig()
    trace = SolveTrace(seed=cfg.seed)
    spacing = cfg.spacing(net)
    pop = cfg.pop(net)
    max_events = 100
    try:
        for node in list(net.nodes):
            if net.degree(node.id) == 4:
                net = pop_junction(net, node.id, field, pop)
                trace.events.append({"iteration": 0, "kind": "pop", "node": node.id})
        if needs_remesh(net, spacing, field=field):
            net = remesh(net, cfg, field, spacing)
            trace.events.append({"iteration": 0, "kind": "remesh"})
        net = restore_areas(net, field, cfg)
        tol = cfg.grad_tol * _h_scale(net, field)
        st = _Stepper(net, field, cfg, tol)
        trace.perimeter.append(st.P)
        trace.area_violation.append(st.violation())
        trace.step.append(0.0)
        trace.grad_norm.append(st.gnorm)
        for it in range(1, cfg.max_iters + 1):
            info = st.step()
            trace.iterations = it
            if info.converged:
                trace.status = "converged"
                trace.iterations = it - 1
                break
            trace.perimeter.append(info.perimeter)
            trace.area_violation.append(info.max_area_violation)
            trace.step.append(info.step)
            trace.grad_norm.append(info.grad_norm)
            w = cfg.stall_window
            if w and len(trace.perimeter) > w and _stalled(trace.perimeter[-w - 1:], trace.events, it - w):
                trace.status = "converged"
                trace.message = (f"stationary to working precision (no decrease over {w} iterations, "
                                 f"projected gradient {info.grad_norm:.3e})")
                break
            if it % cfg.remesh_every == 0:
                cur = st.net()
                changed = False
                for aid in short_arcs(cur, 0.5 * pop):
                    if len(trace.events) >= max_events:
                        raise ClusterLabError("too many topology events")
                    if aid not in {a.id for a in cur.arcs}:
                        continue
                    cur, nid = collapse_arc(cur, aid)
                    cur = pop_junction(cur, nid, field, pop)
                    trace.events.append({"iteration": it, "kind": "pop", "arc": aid, "node": nid})
                    changed = True
                if changed or needs_remesh(cur, spacing, field=field):
                    cur = remesh(cur, cfg, field, spacing)
                    trace.events.append({"iteration": it, "kind": "remesh"})
                    changed = True
                elif find_crossings(cur):
                    raise PlanarityBroken("arcs crossed during descent")
                if changed:
                    st = _Stepper(cur, field, cfg, tol)
        net = st.net()
        trace.multipliers = [float(x) for x in st.lam]
    except LineSearchFailed as exc:
        net = st.net()
        trace.multipliers = [float(x) for x in st.lam]
        if exc.at_noise_floor:
            trace.status = "converged"
            trace.message = f"stationary to working precision (projected gradient {exc.grad_norm:.3e})"
        else:
            trace.status = "topology_fault"
            trace.message = f"LineSearchFailed: {exc}"
    except ClusterLabError as exc:
        trace.status = "topology_fault"
        trace.message = f"{type(exc).__name__}: {exc}"
        logger.warning("solve fault: %s", trace.message)
        return net, trace
    if trace.status != "topology_fault":
        res = validate(net)
        if not res.ok:
            trace.status = "topology_fault"
            trace.message = "; ".join(v.message for v in res.violations[:5])
    return net, trace
