"""Structural checks on converged nets.

Every predicate returns a :class:`PredicateLog` whose entries are
reproducible from the logged seed.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field as dc_field

import numpy as np

from .cluster_net import ClusterNet, components, region_half_edges, validate
from .density import DensityField, local_bounds
from .errors import MissingCertificate, RestoreFailed, SingularConstraints
from .functionals import pack, region_perimeter, weighted_area, weighted_perimeter
from .optimizer import SolveConfig, restore_areas
from .probes import EpsBetaCertificate, GrowthCertificate

JITTER = 1e-9


@dataclass(frozen=True)
class PredicateEntry:
    predicate: str
    sample: str
    measured: float
    bound: float
    passed: bool

    def to_dict(self) -> dict:
        return {"predicate": self.predicate, "sample": self.sample, "measured": self.measured,
                "bound": self.bound, "pass": self.passed}


@dataclass
class PredicateLog:
    name: str
    seed: int
    entries: list = dc_field(default_factory=list)
    notices: list = dc_field(default_factory=list)

    def add(self, sample: str, measured: float, bound: float, passed: bool):
        self.entries.append(PredicateEntry(self.name, sample, float(measured), float(bound), bool(passed)))

    @property
    def passed(self) -> bool:
        return all(e.passed for e in self.entries)

    @property
    def max_measured(self) -> float | None:
        return max((e.measured for e in self.entries), default=None)

    def failures(self) -> list[PredicateEntry]:
        return [e for e in self.entries if not e.passed]

    def to_dict(self) -> dict:
        return {"name": self.name, "seed": self.seed, "pass": self.passed, "samples": len(self.entries),
                "max_measured": self.max_measured, "failures": [e.to_dict() for e in self.failures()],
                "notices": list(self.notices)}


# ---------------------------------------------------------------------------
# helpers


def mean_spacing(net: ClusterNet) -> float:
    P, Q, _ = net.segments()
    if not len(P):
        return 0.0
    return float(np.linalg.norm(Q - P, axis=1).mean())


def _outward(net: ClusterNet, arc_id: int, end: int) -> np.ndarray:
    pts = net.arc(arc_id).points
    return pts if end == 0 else pts[::-1]


def end_tangent(pts: np.ndarray, k: int = 4) -> np.ndarray:
    """Unit tangent at pts[0], from a least-squares quadratic through the first k vertices.

    A straight fit through the same vertices leans toward the chord by about
    curvature times the window length, which at 4 vertices is a few degrees.
    """
    P = pts[:k]
    if len(P) < 3:
        d = P[-1] - P[0]
        return d / np.linalg.norm(d)
    s = np.concatenate([[0.0], np.cumsum(np.linalg.norm(np.diff(P, axis=0), axis=1))])
    deg = 2 if len(P) >= 4 else 1
    A = np.vander(s, deg + 1, increasing=True)
    coef, *_ = np.linalg.lstsq(A, P, rcond=None)
    t = coef[1]
    return t / np.linalg.norm(t)


def sample_points(net: ClusterNet, n: int, rng: np.random.Generator) -> np.ndarray:
    """n points on the net, uniform in Euclidean length."""
    P, Q, _ = net.segments()
    L = np.linalg.norm(Q - P, axis=1)
    cdf = np.cumsum(L) / L.sum()
    u = rng.random(n)
    k = np.minimum(np.searchsorted(cdf, u), len(L) - 1)
    t = rng.random(n)
    return P[k] + t[:, None] * (Q[k] - P[k])


def _junction_positions(net: ClusterNet) -> np.ndarray:
    return np.array([net.node(j).position for j in net.junction_ids()]).reshape(-1, 2)


def default_r_max(net: ClusterNet) -> float:
    """Min junction separation / 8, or the net's diameter / 16 without two junctions."""
    J = _junction_positions(net)
    if len(J) >= 2:
        d = np.linalg.norm(J[:, None] - J[None, :], axis=-1)
        return float(d[np.triu_indices(len(J), 1)].min()) / 8.0
    P, Q, _ = net.segments()
    pts = np.vstack([P, Q])
    return float(np.linalg.norm(pts.max(axis=0) - pts.min(axis=0))) / 16.0


# ---------------------------------------------------------------------------
# junctions


@dataclass(frozen=True)
class JunctionInfo:
    node_id: int
    position: tuple[float, float]
    valence: int
    angles_deg: tuple[float, ...]
    max_deviation_deg: float

    def to_dict(self) -> dict:
        return {"node": self.node_id, "position": list(self.position), "valence": self.valence,
                "angles_deg": list(self.angles_deg), "max_deviation_deg": self.max_deviation_deg}


@dataclass(frozen=True)
class JunctionReport:
    junctions: tuple[JunctionInfo, ...]
    min_separation: float | None

    @property
    def count(self) -> int:
        return len(self.junctions)

    @property
    def max_deviation_deg(self) -> float:
        return max((j.max_deviation_deg for j in self.junctions), default=0.0)

    @property
    def all_valence_3(self) -> bool:
        return all(j.valence == 3 for j in self.junctions)

    def to_dict(self) -> dict:
        return {"count": self.count, "min_separation": self.min_separation,
                "max_deviation_deg": self.max_deviation_deg, "all_valence_3": self.all_valence_3,
                "junctions": [j.to_dict() for j in self.junctions]}


def junction_report(net: ClusterNet) -> JunctionReport:
    out = []
    for nid in net.junction_ids():
        ends = net.incident_arcs(nid)
        dirs = [end_tangent(_outward(net, aid, e)) for aid, e in ends]
        ang = np.sort(np.mod([math.atan2(d[1], d[0]) for d in dirs], 2 * math.pi))
        gaps = np.diff(np.concatenate([ang, [ang[0] + 2 * math.pi]]))
        deg = tuple(float(g) for g in np.degrees(gaps))
        dev = max(abs(a - 120.0) for a in deg)
        n = net.node(nid)
        out.append(JunctionInfo(nid, (n.x, n.y), len(ends), deg, float(dev)))
    J = _junction_positions(net)
    sep = None
    if len(J) >= 2:
        d = np.linalg.norm(J[:, None] - J[None, :], axis=-1)
        sep = float(d[np.triu_indices(len(J), 1)].min())
    return JunctionReport(tuple(out), sep)


# ---------------------------------------------------------------------------
# tangent regularity


@dataclass(frozen=True)
class ArcRegularity:
    arc_id: int
    length: float
    s: np.ndarray
    theta: np.ndarray
    k_gamma: float | None
    max_turning_per_length: float
    flagged: bool

    def to_dict(self) -> dict:
        return {"arc": self.arc_id, "length": self.length, "k_gamma": self.k_gamma,
                "max_turning_per_length": self.max_turning_per_length, "flagged": self.flagged}


@dataclass(frozen=True)
class RegularityReport:
    gamma_theory: float | None
    arcs: tuple[ArcRegularity, ...]
    ceiling: float

    @property
    def flagged(self) -> list[int]:
        return [a.arc_id for a in self.arcs if a.flagged]

    def to_dict(self) -> dict:
        return {"gamma_theory": self.gamma_theory, "ceiling": self.ceiling, "flagged": self.flagged,
                "arcs": [a.to_dict() for a in self.arcs]}


def gamma_theory(growth: GrowthCertificate, epsbeta: EpsBetaCertificate, holder_h: float | None) -> float | None:
    """(1/2) min(eta*beta - 1, alpha); None when eta*beta <= 1 gives no positive exponent."""
    eb = growth.eta * epsbeta.beta - 1.0
    if eb <= 1e-12:
        return None
    alpha = holder_h if holder_h is not None else 1.0
    return 0.5 * min(eb, alpha)


def windowed_tangent_angles(pts: np.ndarray, closed: bool, window: int = 5) -> tuple[np.ndarray, np.ndarray]:
    """Arclength s and unwrapped tangent angle at every vertex.

    Tangents are principal directions of ``window`` consecutive vertices,
    oriented along the polyline; closed polylines wrap around.
    """
    if closed:
        P = pts[:-1]
    else:
        P = pts
    n = len(P)
    seg = np.linalg.norm(np.diff(pts, axis=0), axis=1)
    s = np.concatenate([[0.0], np.cumsum(seg)])[:n]
    half = window // 2
    th = np.empty(n)
    for j in range(n):
        if closed:
            idx = [(j + k) % n for k in range(-half, half + 1)]
        else:
            lo = max(0, min(j - half, n - window))
            idx = list(range(lo, min(n, lo + window)))
        W = P[idx]
        C = W - W.mean(axis=0)
        _, _, vt = np.linalg.svd(C, full_matrices=False)
        t = vt[0]
        if closed:
            ref = P[(j + 1) % n] - P[(j - 1) % n]
        else:
            ref = P[min(j + 1, n - 1)] - P[max(j - 1, 0)]
        if t @ ref < 0:
            t = -t
        th[j] = math.atan2(t[1], t[0])
    return s, np.unwrap(th)


def holder_quotient(s: np.ndarray, theta: np.ndarray, gamma: float, min_sep: float, max_sep: float) -> float:
    ds = np.abs(s[:, None] - s[None, :])
    dth = np.abs(theta[:, None] - theta[None, :])
    mask = (ds >= min_sep) & (ds <= max_sep)
    if not mask.any():
        return 0.0
    return float((dth[mask] / ds[mask] ** gamma).max())


def analytic_certificates(field: DensityField):
    from .probes import analytic_certificates as _ac

    return _ac(field)


def regularity_report(net: ClusterNet, field: DensityField, certs, ceiling: float = 50.0) -> RegularityReport:
    """Hölder quotients of the tangent angle along every arc.

    ``certs`` is a ``(GrowthCertificate, EpsBetaCertificate)`` pair.
    """
    if certs is None or len(certs) != 2 or certs[0] is None or certs[1] is None:
        raise MissingCertificate("regularity_report needs growth and eps-beta certificates")
    growth, epsbeta = certs
    gamma = gamma_theory(growth, epsbeta, field.holder_exponent_h)
    ell = mean_spacing(net)
    out = []
    for a in net.arcs:
        s, th = windowed_tangent_angles(a.points, a.closed)
        L = a.length()
        k = holder_quotient(s, th, gamma, 4 * ell, L) if gamma is not None else None
        turn = float(np.abs(np.diff(th)).max() / np.diff(s).min()) if len(s) > 1 else 0.0
        flagged = k is not None and k > ceiling
        out.append(ArcRegularity(a.id, L, s, th, k, turn, flagged))
    return RegularityReport(gamma, tuple(out), ceiling)


# ---------------------------------------------------------------------------
# ball length


def _chord_params(P: np.ndarray, Q: np.ndarray, center, r: float):
    """Parameters t0 <= t1 where each segment's line meets the circle, and a validity mask.

    Uses the foot of the perpendicular from the center, which avoids the
    cancellation of the textbook discriminant for short chords on long segments.
    """
    c = np.asarray(center, float)
    d = Q - P
    f = P - c
    a = (d ** 2).sum(axis=1)
    safe = np.where(a > 0, a, 1.0)
    tc = -(f * d).sum(axis=1) / safe
    foot = f + tc[:, None] * d
    h2 = r * r - (foot ** 2).sum(axis=1)
    ok = (h2 > 0) & (a > 0)
    half = np.sqrt(np.where(ok, h2, 0.0) / safe)
    return tc - half, tc + half, ok, a


def length_in_disk(P: np.ndarray, Q: np.ndarray, center, r: float) -> float:
    """Euclidean length of the segments inside the closed disk (exact clipping)."""
    t0, t1, ok, a = _chord_params(P, Q, center, r)
    t0 = np.clip(np.where(ok, t0, 1.0), 0.0, 1.0)
    t1 = np.clip(np.where(ok, t1, 0.0), 0.0, 1.0)
    frac = np.maximum(t1 - t0, 0.0)
    return float((frac * np.sqrt(a)).sum())


def _centers(net: ClusterNet, n: int, seed: int) -> list[tuple[str, np.ndarray, bool]]:
    rng = np.random.default_rng(seed)
    out = [(f"junction {j}", net.node(j).position, True) for j in net.junction_ids()]
    pts = sample_points(net, n, rng) if n > 0 else np.zeros((0, 2))
    out += [(f"boundary point {k}", p, False) for k, p in enumerate(pts)]
    return out


def ball_length_check(net: ClusterNet, n: int = 64, r_max: float | None = None, seed: int = 0,
                      n_radii: int = 6, bound: float = 6.5) -> PredicateLog:
    """H1(boundary inside B(x, r)) / r on seeded centers and a geometric radius grid."""
    r_max = r_max or default_r_max(net)
    P, Q, _ = net.segments()
    radii = r_max * 2.0 ** -np.arange(n_radii)[::-1]
    log = PredicateLog("ball_length", seed)
    for label, c, _ in _centers(net, n, seed):
        for r in radii:
            ratio = length_in_disk(P, Q, c, r) / r
            log.add(f"{label} at ({c[0]:.6g}, {c[1]:.6g}), r={r:.6g}", ratio, bound, ratio < bound)
    return log


# ---------------------------------------------------------------------------
# circle crossings


def circle_crossings(P: np.ndarray, Q: np.ndarray, center, rho: float) -> int:
    """Transversal crossings of the polyline segments with a circle.

    Roots are counted on [0, 1) of each segment so shared vertices count once.
    """
    t0, t1, ok, _ = _chord_params(P, Q, center, rho)
    count = 0
    for t in (t0, t1):
        count += int((ok & (t >= 0) & (t < 1)).sum())
    return count


def circle_crossing_check(net: ClusterNet, n: int = 32, c2_sample: float = 14.0, seed: int = 0,
                          r_max: float | None = None, n_radii: int = 3, grid: int = 64) -> PredicateLog:
    """Some radius in (r/C2, r) meets the net at most 3 times; at junctions some
    radius in (24r/25, r) meets it exactly 3 times."""
    r_max = r_max or default_r_max(net)
    P, Q, _ = net.segments()
    rng = np.random.default_rng(seed + 1)
    radii = r_max * 2.0 ** -np.arange(n_radii)[::-1]
    log = PredicateLog("circle_crossing", seed)
    for label, c, is_junction in _centers(net, n, seed):
        for r in radii:
            rhos = np.linspace(r / c2_sample, r, grid + 2)[1:-1]
            rhos = rhos * (1 + JITTER * rng.uniform(-1, 1, len(rhos)))
            counts = [circle_crossings(P, Q, c, rho) for rho in rhos]
            best = min(counts)
            ok = best <= 3
            log.add(f"{label} r={r:.6g}: min crossings in (r/{c2_sample:g}, r)", best, 3, ok)
            if is_junction:
                near = np.linspace(24 * r / 25, r, grid + 2)[1:-1]
                near = near * (1 + JITTER * rng.uniform(-1, 1, len(near)))
                three = sum(circle_crossings(P, Q, c, rho) == 3 for rho in near)
                log.add(f"{label} r={r:.6g}: radii in (24r/25, r) with exactly 3", three, 1, three >= 1)
    return log


# ---------------------------------------------------------------------------
# islands


def island_check(net: ClusterNet, min_diameter: float | None = None, seed: int = 0) -> PredicateLog:
    """Fail on any small component enclosed by a single other region."""
    min_diameter = min_diameter if min_diameter is not None else 4 * mean_spacing(net)
    log = PredicateLog("no_island", seed)
    for i in range(net.m + 1):
        loops = region_half_edges(net, i)
        for k, comp in enumerate(components(net, i)):
            if comp.unbounded:
                continue
            outer = loops[comp.outer]
            neighbours = set()
            for aid, fwd in outer:
                a = net.arc(aid)
                neighbours.add(a.right if fwd else a.left)
            enclosed = len(neighbours) == 1
            small = comp.diameter < min_diameter
            log.add(
                f"region {i} component {k} (diameter {comp.diameter:.6g}, neighbours {sorted(neighbours)})",
                comp.diameter, min_diameter, not (small and enclosed),
            )
    return log


# ---------------------------------------------------------------------------
# isoperimetric inequality


def isoperimetric_check(net: ClusterNet, field: DensityField, growth_cert: GrowthCertificate | None,
                        seed: int = 0) -> PredicateLog:
    """P(E_i) >= (h_min / C_vol^(1/eta)) |E_i|^(1/eta) for every region, h_min over the window disk."""
    if growth_cert is None:
        raise MissingCertificate("isoperimetric_check needs a growth certificate")
    x0, y0, x1, y1 = net.window
    center = ((x0 + x1) / 2, (y0 + y1) / 2)
    hb = local_bounds(field, center, 0.5 * net.window_diagonal, seed=seed)
    eta, cvol = growth_cert.eta, growth_cert.c_vol
    areas = weighted_area(net, field)
    log = PredicateLog("isoperimetric", seed)
    for i in range(1, net.m + 1):
        P = region_perimeter(net, field, i)
        bound = hb.h_min / cvol ** (1 / eta) * float(areas[i - 1]) ** (1 / eta)
        log.add(f"region {i}: P={P:.6g}", P, bound, P >= bound)
    return log


# ---------------------------------------------------------------------------
# competitors


def _crossing_out(pts: np.ndarray, c: np.ndarray, r: float):
    """First exit of a polyline (starting inside the disk) through the circle.

    Returns (segment index, point) or None if it never leaves.
    """
    inside = np.linalg.norm(pts - c, axis=1) < r
    for k in range(len(pts) - 1):
        if inside[k] and not inside[k + 1]:
            p, q = pts[k], pts[k + 1]
            d, f = q - p, p - c
            a, b, cc = d @ d, 2 * f @ d, f @ f - r * r
            t = (-b + math.sqrt(max(b * b - 4 * a * cc, 0.0))) / (2 * a)
            return k, p + t * d
    return None


def _circle_path(c, r, a0, a1, ccw: bool, spacing: float) -> np.ndarray:
    if ccw:
        sweep = (a1 - a0) % (2 * math.pi)
    else:
        sweep = -((a0 - a1) % (2 * math.pi))
    n = max(2, int(math.ceil(abs(sweep) * r / spacing)))
    th = a0 + sweep * np.linspace(0, 1, n + 1)
    return c + r * np.stack([np.cos(th), np.sin(th)], axis=1)


def ball_fill(net: ClusterNet, center, r: float, fill_left: bool, spacing: float) -> ClusterNet | None:
    """Competitor where one side's region absorbs the whole disk.

    Needs exactly one open arc crossing the disk once, with no node inside.
    Returns None when the configuration does not apply.
    """
    c = np.asarray(center, float)
    if any(np.linalg.norm(n.position - c) <= r for n in net.nodes):
        return None
    hits = []
    for a in net.arcs:
        inside = np.linalg.norm(a.points - c, axis=1) < r
        if inside.any():
            hits.append((a, inside))
    if len(hits) != 1:
        return None
    a, inside = hits[0]
    idx = np.flatnonzero(inside)
    if idx[-1] - idx[0] + 1 != len(idx) or idx[0] == 0 or idx[-1] == len(inside) - 1:
        return None
    pts = a.points
    i0, i1 = idx[0], idx[-1]
    # entry: segment (i0-1, i0) crosses inward
    p, q = pts[i0 - 1], pts[i0]
    d, f = q - p, p - c
    aa, bb, cc = d @ d, 2 * f @ d, f @ f - r * r
    t_in = (-bb - math.sqrt(max(bb * bb - 4 * aa * cc, 0.0))) / (2 * aa)
    entry = p + t_in * d
    p, q = pts[i1], pts[i1 + 1]
    d, f = q - p, p - c
    aa, bb, cc = d @ d, 2 * f @ d, f @ f - r * r
    t_out = (-bb + math.sqrt(max(bb * bb - 4 * aa * cc, 0.0))) / (2 * aa)
    exit_ = p + t_out * d
    a0 = math.atan2(*(entry - c)[::-1])
    a1 = math.atan2(*(exit_ - c)[::-1])
    # filling with the left region moves the interface around the right side: ccw
    path = _circle_path(c, r, a0, a1, ccw=fill_left, spacing=spacing)
    new = np.vstack([pts[:i0], path, pts[i1 + 1:]])
    return net.replace_points({a.id: new})


def spider(net: ClusterNet, node_id: int, center, r: float, spacing: float) -> ClusterNet | None:
    """Replace the net inside B(center, r) by straight segments from center to the exits."""
    c = np.asarray(center, float)
    ends = net.incident_arcs(node_id)
    if len(ends) != 3 or np.linalg.norm(net.node(node_id).position - c) >= r:
        return None
    updates = {}
    for aid, e in ends:
        a = net.arc(aid)
        if a.closed:
            return None
        pts = _outward(net, aid, e)
        hit = _crossing_out(pts, c, r)
        if hit is None:
            return None
        k, y = hit
        if np.any(np.linalg.norm(pts[k + 1:] - c, axis=1) < r):
            return None  # arc re-enters the disk
        n = max(2, int(math.ceil(r / spacing)))
        leg = c + np.linspace(0, 1, n + 1)[:, None] * (y - c)
        new = np.vstack([leg, pts[k + 1:]])
        updates[aid] = new if e == 0 else new[::-1]
    for other in net.arcs:
        if other.id not in updates and np.any(np.linalg.norm(other.points - c, axis=1) < r):
            return None
    return net.replace_points(updates, {node_id: (float(c[0]), float(c[1]))})


def _restore_outside(comp: ClusterNet, field: DensityField, center, r: float, cfg: SolveConfig) -> ClusterNet:
    topo, V = pack(comp)
    frozen = np.linalg.norm(V - np.asarray(center), axis=1) <= r * (1 + 1e-9)
    return restore_areas(comp, field, cfg, frozen=frozen)


def local_optimality_probe(net: ClusterNet, field: DensityField, n: int = 16, seed: int = 0,
                           r: float | None = None, rel_tol: float = 1e-6) -> PredicateLog:
    """Ball-fill and spider competitors must not beat the converged perimeter.

    Competitors agree with the net outside the ball up to the area
    restoration, which only moves vertices outside the ball.
    """
    ell = mean_spacing(net)
    r = r or min(default_r_max(net), 6 * ell)
    spacing = ell / 2
    cfg = SolveConfig(area_tol=1e-10)
    P0 = weighted_perimeter(net, field).perimeter
    tol = rel_tol * P0
    log = PredicateLog("local_optimality", seed)
    rng = np.random.default_rng(seed + 2)

    def judge(label, comp, c):
        if comp is None:
            log.notices.append(f"{label}: competitor not applicable")
            return
        if not validate(comp).ok:
            log.notices.append(f"{label}: competitor invalid, skipped")
            return
        try:
            comp = _restore_outside(comp, field, c, r, cfg)
        except (RestoreFailed, SingularConstraints) as exc:
            log.notices.append(f"{label}: {type(exc).__name__}, skipped")
            return
        Pc = weighted_perimeter(comp, field).perimeter
        log.add(label, Pc - P0, -tol, Pc >= P0 - tol)

    for k, c in enumerate(sample_points(net, n, rng)):
        for fill_left in (True, False):
            side = "left" if fill_left else "right"
            judge(f"ball-fill {side} at boundary point {k}", ball_fill(net, c, r, fill_left, spacing), c)
    # balls missing the net entirely: the competitor is the net itself
    x0, y0, x1, y1 = net.window
    P, Q, _ = net.segments()
    for k in range(4):
        c = np.array([rng.uniform(x0 + r, x1 - r), rng.uniform(y0 + r, y1 - r)])
        if length_in_disk(P, Q, c, r) == 0:
            log.add(f"empty ball {k}", 0.0, -tol, True)
    for j in net.junction_ids():
        c = net.node(j).position + 0.05 * r * rng.uniform(-1, 1, 2)
        judge(f"spider at junction {j}", spider(net, j, c, r, spacing), c)
    return log
