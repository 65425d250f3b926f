"""Empirical certificates for the density hypotheses.

growth_probe fits the volume growth exponent of small balls, eps_beta_probe
measures the perimeter price of small volume adjustments made away from a
protected ball, and dini_test classifies moduli of continuity by their tail.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field as dc_field

import numpy as np
from scipy.optimize import brentq

from .cluster_net import ClusterNet
from .density import DensityField, weighted_disk_volume
from .errors import InsufficientSamples, MissingCertificate, NoEligibleArc
from .functionals import weighted_area, weighted_perimeter

HOLDOUT_SEED_OFFSET = 1000


@dataclass(frozen=True)
class GrowthCertificate:
    eta: float
    c_vol: float
    r_eta: float
    fit_residual: float = 0.0
    source: str = "probe"
    slopes: tuple[float, ...] = ()
    holdout_ok: bool | None = None

    def __post_init__(self):
        if not (self.eta >= 1 and self.c_vol > 0 and self.r_eta > 0):
            raise ValueError(f"invalid growth certificate: eta={self.eta}, c_vol={self.c_vol}, r_eta={self.r_eta}")

    def bound(self, r):
        return self.c_vol * np.asarray(r, dtype=float) ** self.eta

    def to_dict(self) -> dict:
        return {"eta": self.eta, "c_vol": self.c_vol, "r_eta": self.r_eta, "fit_residual": self.fit_residual,
                "source": self.source, "holdout_ok": self.holdout_ok}


@dataclass(frozen=True)
class EpsBetaCertificate:
    """Upper-bound witness for the perimeter price of volume adjustments."""

    beta: float
    c_per: float | None = None
    t_grid: tuple[float, ...] = ()
    cper_curve: tuple[float, ...] = ()
    eps_bar: float | None = None
    r_beta: float | None = None
    beta_fit: float | None = None
    fit_residual: float = 0.0
    source: str = "probe"
    kind: str = "witness"

    def __post_init__(self):
        if not 0 < self.beta <= 1:
            raise ValueError(f"beta must lie in (0, 1], got {self.beta}")

    def to_dict(self) -> dict:
        return {"beta": self.beta, "beta_fit": self.beta_fit, "c_per": self.c_per, "t_grid": list(self.t_grid),
                "cper_curve": list(self.cper_curve), "eps_bar": self.eps_bar, "r_beta": self.r_beta,
                "fit_residual": self.fit_residual, "source": self.source, "kind": self.kind}


def analytic_certificates(field: DensityField) -> tuple[GrowthCertificate, EpsBetaCertificate]:
    """Closed-form certificates for the built-in densities."""
    if field.kind == "constant":
        c = field.params["c"]
        return GrowthCertificate(2.0, math.pi * c, math.inf, source="analytic"), EpsBetaCertificate(1.0, source="analytic", kind="analytic")
    if field.kind == "gaussian":
        return GrowthCertificate(2.0, 0.5, math.inf, source="analytic"), EpsBetaCertificate(1.0, source="analytic", kind="analytic")
    if field.kind == "grushin":
        a = field.params["alpha"]
        eta = (a + 2) / (a + 1)
        cvol = 4 * (1 + a) ** (1 / (1 + a))  # square [-r, r]^2 about an axis point
        return GrowthCertificate(eta, cvol, math.inf, source="analytic"), EpsBetaCertificate(1.0, source="analytic", kind="analytic")
    raise MissingCertificate(f"no analytic certificates for density {field.name}")


# ---------------------------------------------------------------------------
# growth


def _loglog_fit(x: np.ndarray, y: np.ndarray) -> tuple[float, float, float]:
    """Slope, intercept and RMS residual of a least-squares line."""
    A = np.stack([x, np.ones_like(x)], axis=1)
    coef, *_ = np.linalg.lstsq(A, y, rcond=None)
    res = y - A @ coef
    return float(coef[0]), float(coef[1]), float(np.sqrt(np.mean(res ** 2)))


def _growth_centers(field: DensityField, window, n: int, margin: float, rng: np.random.Generator) -> np.ndarray:
    x0, y0, x1, y1 = window
    xs = rng.uniform(x0 + margin, x1 - margin, n)
    ys = rng.uniform(y0 + margin, y1 - margin, n)
    if field.singular_axis:
        # the singular line is where small balls are heaviest
        xs[: n // 2] = 0.0
    return np.stack([xs, ys], axis=1)


def growth_probe(field: DensityField, window, n_centers: int = 16, r_grid=None, seed: int = 0,
                 n_holdout: int = 16) -> GrowthCertificate:
    """Fit |B(x, r)| ~ C r^eta over seeded centers.

    eta is the smallest fitted slope over centers, so the worst center
    governs; C_vol is the largest |B|/r^eta seen, with a 1e-6 safety margin.
    """
    x0, y0, x1, y1 = window
    size = min(x1 - x0, y1 - y0)
    if r_grid is None:
        r_eta = 0.1 * size
        r_grid = r_eta * 2.0 ** -np.arange(10)[::-1]
    r_grid = np.asarray(r_grid, dtype=float)
    r_eta = float(r_grid.max())
    if 2 * r_eta >= size:
        raise ValueError("radius grid does not fit in the window")
    rng = np.random.default_rng(seed)
    centers = _growth_centers(field, window, n_centers, r_eta, rng)
    vols = np.array([[weighted_disk_volume(field, c, r) for r in r_grid] for c in centers])
    fits = [_loglog_fit(np.log(r_grid), np.log(v)) for v in vols]
    slopes = tuple(f[0] for f in fits)
    eta = max(1.0, min(slopes))
    c_vol = float((vols / r_grid ** eta).max()) * (1 + 1e-6)
    resid = max(f[2] for f in fits)

    hold_rng = np.random.default_rng(seed + HOLDOUT_SEED_OFFSET)
    hold = _growth_centers(field, window, n_holdout, r_eta, hold_rng)
    r_hold = hold_rng.uniform(r_grid.min(), r_eta, n_holdout)
    ok = all(weighted_disk_volume(field, c, r) <= c_vol * r ** eta for c, r in zip(hold, r_hold))
    return GrowthCertificate(eta, c_vol, r_eta, resid, "probe", slopes, ok)


# ---------------------------------------------------------------------------
# eps-beta


def _bump(u: np.ndarray) -> np.ndarray:
    """C-infinity bump supported on |u| < 1/2, peak 1 at 0."""
    out = np.zeros_like(u)
    inside = np.abs(u) < 0.5
    v = 2 * u[inside]
    out[inside] = np.exp(1.0 - 1.0 / (1.0 - v * v))
    return out


def _vertex_normals(pts: np.ndarray) -> np.ndarray:
    """Right-hand unit normals at interior vertices (zeros at the ends)."""
    n = np.zeros_like(pts)
    t = pts[2:] - pts[:-2]
    t /= np.linalg.norm(t, axis=1)[:, None]
    n[1:-1] = np.stack([t[:, 1], -t[:, 0]], axis=1)
    return n


@dataclass(frozen=True)
class _BumpSite:
    region: int
    arc_id: int
    profile: np.ndarray  # per-vertex displacement for unit amplitude, growing the region


def _find_site(net: ClusterNet, i: int, center: np.ndarray, r_beta: float, width: float) -> _BumpSite:
    best = None
    for a in net.arcs:
        if {a.left, a.right} != {i, 0}:
            continue
        pts = a.points
        seg = np.linalg.norm(np.diff(pts, axis=0), axis=1)
        s = np.concatenate([[0.0], np.cumsum(seg)])
        L = s[-1]
        if L <= width:
            continue
        dist = np.linalg.norm(pts - center, axis=1)
        for k in range(1, len(pts) - 1):
            sc = s[k]
            if sc - width / 2 <= 0 or sc + width / 2 >= L:
                continue
            support = np.abs(s - sc) <= width / 2
            clearance = float(dist[support].min()) - r_beta
            if clearance <= width / 4:
                continue
            key = (clearance, -a.id, -k)
            if best is None or key > best[0]:
                best = (key, a, s, sc)
    if best is None:
        raise NoEligibleArc(f"region {i} has no boundary arc against the exterior outside the protected ball")
    _, a, s, sc = best
    closed = a.closed
    prof = _bump((s - sc) / width)[:, None] * _vertex_normals(a.points)
    if closed:
        prof[0] = prof[-1] = 0.0
    # right normal points away from a left-hand region
    sign = 1.0 if a.left == i else -1.0
    return _BumpSite(i, a.id, sign * prof)


def _apply(net: ClusterNet, sites: list[_BumpSite], amps) -> ClusterNet:
    return net.replace_points({st.arc_id: net.arc(st.arc_id).points + a * st.profile for st, a in zip(sites, amps)})


def volume_patterns(m: int) -> list[np.ndarray]:
    """Unit patterns: +-e_i and the normalized all-sign combinations."""
    pats = []
    for i in range(m):
        for sgn in (1.0, -1.0):
            e = np.zeros(m)
            e[i] = sgn
            pats.append(e)
    if m > 1:
        for code in range(2 ** m):
            signs = np.array([1.0 if (code >> k) & 1 else -1.0 for k in range(m)])
            pats.append(signs / math.sqrt(m))
    return pats


def adjust_volumes(net: ClusterNet, field: DensityField, sites: list[_BumpSite], eps: np.ndarray,
                   base: np.ndarray, tol: float = 1e-10) -> ClusterNet:
    """Bump amplitudes solved one region at a time so that areas become base + eps."""
    amps = []
    for st, target in zip(sites, eps):
        if target == 0:
            amps.append(0.0)
            continue
        i = st.region

        def f(a, st=st, i=i, target=target):
            return float(weighted_area(_apply(net, [st], [a]), field)[i - 1] - base[i - 1]) - target

        # area change is about amplitude * (bump area): bracket from there
        lo, hi = 0.0, 0.0
        step = abs(target) / max(float(np.abs(st.profile).sum()), 1e-300)
        sgn = 1.0 if target > 0 else -1.0
        hi = sgn * step
        while f(hi) * sgn < 0:
            hi *= 2.0
        a = brentq(f, min(lo, hi), max(lo, hi), xtol=1e-300, rtol=4 * np.finfo(float).eps, maxiter=200)
        if abs(f(a)) > tol:
            raise ArithmeticError(f"volume adjustment missed target by {abs(f(a)):.3e}")
        amps.append(a)
    return _apply(net, sites, amps)


def eps_beta_probe(net: ClusterNet, field: DensityField, protected_center, r_beta: float,
                   t_grid=None, seed: int = 0) -> EpsBetaCertificate:
    """Perimeter price of exact volume changes |eps| = t made outside B(center, r_beta)."""
    c = np.asarray(protected_center, dtype=float)
    P0_, Q0_, _ = net.segments()
    ell = float(np.linalg.norm(Q0_ - P0_, axis=1).mean())
    width = 20 * ell
    sites = [_find_site(net, i, c, r_beta, width) for i in range(1, net.m + 1)]
    if t_grid is None:
        amin = min(net.target_areas)
        # small enough that the bump's own quadratic length cost stays negligible
        t_grid = amin * np.geomspace(1e-7, 1e-4, 10)
    t_grid = np.sort(np.asarray(t_grid, dtype=float))
    base = weighted_area(net, field)
    P0 = weighted_perimeter(net, field).perimeter
    pats = volume_patterns(net.m)
    dP = np.empty((len(t_grid), len(pats)))
    for a, t in enumerate(t_grid):
        for b, p in enumerate(pats):
            comp = adjust_volumes(net, field, sites, t * p, base)
            dP[a, b] = weighted_perimeter(comp, field).perimeter - P0
    worst = dP.max(axis=1)
    if np.any(worst <= 0):
        raise ArithmeticError("volume adjustment lowered the perimeter for every pattern: net is not stationary")
    beta_fit, _, resid = _loglog_fit(np.log(t_grid), np.log(worst))
    beta = min(1.0, max(beta_fit, 1e-6))
    ratio = worst / t_grid ** beta
    curve = np.maximum.accumulate(ratio)
    return EpsBetaCertificate(
        beta=beta, c_per=float(curve[-1]), t_grid=tuple(float(t) for t in t_grid),
        cper_curve=tuple(float(v) for v in curve), eps_bar=float(t_grid[-1]), r_beta=float(r_beta),
        beta_fit=beta_fit, fit_residual=resid,
    )


# ---------------------------------------------------------------------------
# Dini


# fitted log exponents this close to the harmonic case count as divergent
LOG_BORDER_TOL = 1e-3


@dataclass(frozen=True, eq=False)
class ModulusSamples:
    t: np.ndarray
    phi: np.ndarray
    ratio: float
    model: str = "auto"

    def __post_init__(self):
        t = np.asarray(self.t, dtype=float)
        phi = np.asarray(self.phi, dtype=float)
        object.__setattr__(self, "t", t)
        object.__setattr__(self, "phi", phi)
        if t.shape != phi.shape or t.ndim != 1:
            raise ValueError("t and phi must be 1-d arrays of equal length")
        if not self.ratio > 1:
            raise ValueError("grid ratio must exceed 1")
        if np.any(np.diff(t) >= 0) or t[0] > 1 or t[-1] <= 0:
            raise ValueError("t must decrease inside (0, 1]")
        if np.any(phi < 0):
            raise ValueError("phi must be non-negative")
        if np.any(np.diff(phi) > 1e-15 * max(phi.max(), 1e-300)):
            raise ValueError("phi must be non-decreasing in t")
        if len(phi) > 1 and phi[0] > 0 and not phi[-1] < phi[0]:
            raise ValueError("phi does not decay toward t = 0")

    @classmethod
    def from_function(cls, phi, t0: float = 1.0, ratio: float = 2.0, n: int = 64, model: str = "auto"):
        t = t0 * ratio ** -np.arange(n, dtype=float)
        return cls(t, np.asarray([phi(x) for x in t], dtype=float), ratio, model)

    def __len__(self):
        return len(self.t)


@dataclass(frozen=True)
class DiniResult:
    verdict: str
    variant: str
    partial_sums: tuple[float, ...]
    estimate: float
    power_fit: dict
    log_fit: dict

    def to_dict(self) -> dict:
        return {"verdict": self.verdict, "variant": self.variant, "partial_sum": self.partial_sums[-1],
                "estimate": self.estimate, "power_fit": self.power_fit, "log_fit": self.log_fit}


def dini_test(samples: ModulusSamples, variant: str = "dini", min_samples: int = 32, residual_tol: float = 0.05) -> DiniResult:
    """Classify sum over n of phi(C^-n) (or its square root) by fitting the tail."""
    if variant not in ("dini", "half_dini"):
        raise ValueError(f"unknown variant {variant!r}")
    if len(samples) < min_samples:
        raise InsufficientSamples(f"need at least {min_samples} samples, got {len(samples)}")
    v = samples.phi if variant == "dini" else np.sqrt(samples.phi)
    t = samples.t
    partial = np.cumsum(v)
    if np.all(v == 0):
        return DiniResult("converges", variant, tuple(partial), 0.0, {}, {})
    tail = slice(len(v) // 2, None)
    tt, vv = t[tail], v[tail]
    pos = (vv > 0) & (tt < 1)
    if pos.sum() < 4:
        # the modulus vanishes along the tail: only finitely many non-zero terms
        return DiniResult("converges", variant, tuple(partial), float(partial[-1]), {}, {})
    tt, vv = tt[pos], vv[pos]
    b, loga, _ = _loglog_fit(np.log(tt), np.log(vv))
    pw = np.exp(loga) * tt ** b
    pres = float(np.sqrt(np.mean(((pw - vv) / vv) ** 2)))
    # logarithmic tail a / log(1/t)^p; terms then decay like n^-p
    ll = np.log(np.log(1.0 / tt))
    mp, loga_l, _ = _loglog_fit(ll, np.log(vv))
    p = -mp
    lw = np.exp(loga_l) * np.log(1.0 / tt) ** -p
    lres = float(np.sqrt(np.mean(((lw - vv) / vv) ** 2)))
    power = {"a": float(np.exp(loga)), "b": b, "residual": pres}
    logf = {"a": float(np.exp(loga_l)), "p": p, "residual": lres}
    if pres <= lres:
        if b > 0 and pres < residual_tol:
            q = samples.ratio ** -b
            est = float(partial[-1] + np.exp(loga) * t[-1] ** b * q / (1 - q))
            return DiniResult("converges", variant, tuple(partial), est, power, logf)
        return DiniResult("inconclusive", variant, tuple(partial), float("nan"), power, logf)
    if lres >= residual_tol:
        return DiniResult("inconclusive", variant, tuple(partial), float("nan"), power, logf)
    if p <= 1.0 + LOG_BORDER_TOL:
        return DiniResult("diverges", variant, tuple(partial), float("inf"), power, logf)
    if p >= 1.1:
        # integral bound for the remaining sum of a (n ln C)^-p
        n_last = math.log(1.0 / t[-1]) / math.log(samples.ratio)
        est = float(partial[-1] + np.exp(loga_l) * math.log(samples.ratio) ** -p * n_last ** (1 - p) / (p - 1))
        return DiniResult("converges", variant, tuple(partial), est, power, logf)
    return DiniResult("inconclusive", variant, tuple(partial), float("nan"), power, logf)
