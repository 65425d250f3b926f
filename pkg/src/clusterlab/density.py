"""Double-density fields: g weights area, h weights length.

All callables take an ``(..., 2)`` array of points and are vectorized.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import Callable, Optional

import numpy as np
from scipy.special import erf

from .errors import InvalidSpec

Field = Callable[[np.ndarray], np.ndarray]

FD_STEP_FRACTION = 1e-6
SQRT_PI_2 = math.sqrt(math.pi / 2.0)
INV_2PI = 1.0 / (2.0 * math.pi)


@dataclass(frozen=True, eq=False)
class DensityField:
    kind: str
    params: dict
    g: Field
    h: Field
    grad_h: Field
    grad_g: Field
    flux: Optional[Field] = None
    flux_jacobian: Optional[Field] = None
    holder_exponent_h: Optional[float] = None
    name: str = ""
    # x1 = 0 is a singular line of g (grushin); quadrature splits there
    singular_axis: bool = False
    # ((F1, DF1), (F2, DF2)) with div Fk = x_k g, for first moments
    moment_fluxes: Optional[tuple] = None

    @property
    def has_flux(self) -> bool:
        return self.flux is not None

    def spec(self) -> dict:
        return {"kind": self.kind, **self.params}


@dataclass(frozen=True)
class LocalBounds:
    h_min: float
    h_max: float
    center: tuple[float, float]
    radius: float


def _pts(x) -> np.ndarray:
    return np.asarray(x, dtype=float)


def fd_gradient(f: Field, step: float) -> Field:
    """Central finite-difference gradient of a scalar field."""

    def grad(x):
        x = _pts(x)
        ex = np.zeros(2)
        ex[0] = step
        ey = np.zeros(2)
        ey[1] = step
        gx = (f(x + ex) - f(x - ex)) / (2 * step)
        gy = (f(x + ey) - f(x - ey)) / (2 * step)
        return np.stack([gx, gy], axis=-1)

    return grad


def constant(c: float = 1.0) -> DensityField:
    if not (c > 0 and math.isfinite(c)):
        raise InvalidSpec(f"constant density needs c > 0, got {c}")
    c = float(c)

    def val(x):
        return np.full(_pts(x).shape[:-1], c)

    def zero_grad(x):
        return np.zeros(_pts(x).shape)

    def flux(x):
        x = _pts(x)
        return np.stack([c * x[..., 0], np.zeros(x.shape[:-1])], axis=-1)

    def flux_jac(x):
        x = _pts(x)
        J = np.zeros(x.shape[:-1] + (2, 2))
        J[..., 0, 0] = c
        return J

    return DensityField("constant", {"c": c}, val, val, zero_grad, zero_grad, flux, flux_jac, 1.0, f"constant({c:g})")


def gaussian() -> DensityField:
    def val(x):
        x = _pts(x)
        return INV_2PI * np.exp(-0.5 * (x ** 2).sum(axis=-1))

    def grad(x):
        x = _pts(x)
        return -x * val(x)[..., None]

    def flux(x):
        x = _pts(x)
        f1 = INV_2PI * np.exp(-0.5 * x[..., 1] ** 2) * SQRT_PI_2 * erf(x[..., 0] / math.sqrt(2.0))
        return np.stack([f1, np.zeros(x.shape[:-1])], axis=-1)

    def flux_jac(x):
        x = _pts(x)
        J = np.zeros(x.shape[:-1] + (2, 2))
        J[..., 0, 0] = val(x)
        J[..., 0, 1] = -x[..., 1] * flux(x)[..., 0]
        return J

    # x_k g = -d_k g, so F = -g e_k has divergence x_k g
    def mflux(k):
        def F(x):
            x = _pts(x)
            out = np.zeros(x.shape)
            out[..., k] = -val(x)
            return out

        def DF(x):
            x = _pts(x)
            J = np.zeros(x.shape[:-1] + (2, 2))
            J[..., k, :] = -grad(x)
            return J

        return F, DF

    return DensityField("gaussian", {}, val, val, grad, grad, flux, flux_jac, 1.0, "gaussian",
                        moment_fluxes=(mflux(0), mflux(1)))


def grushin(alpha: float) -> DensityField:
    if not (alpha >= 0 and math.isfinite(alpha)):
        raise InvalidSpec(f"grushin density needs alpha >= 0, got {alpha}")
    a = float(alpha)
    expo = -a / (1.0 + a)

    def g(x):
        x = _pts(x)
        with np.errstate(divide="ignore"):
            return np.abs((1.0 + a) * x[..., 0]) ** expo

    def h(x):
        return np.ones(_pts(x).shape[:-1])

    def grad_h(x):
        return np.zeros(_pts(x).shape)

    def grad_g(x):
        x = _pts(x)
        out = np.zeros(x.shape)
        with np.errstate(divide="ignore", invalid="ignore"):
            out[..., 0] = expo * g(x) / x[..., 0]
        return out

    def flux(x):
        x = _pts(x)
        f1 = np.sign(x[..., 0]) * np.abs((1.0 + a) * x[..., 0]) ** (1.0 / (1.0 + a))
        return np.stack([f1, np.zeros(x.shape[:-1])], axis=-1)

    def flux_jac(x):
        x = _pts(x)
        J = np.zeros(x.shape[:-1] + (2, 2))
        J[..., 0, 0] = g(x)
        return J

    return DensityField(
        "grushin", {"alpha": a}, g, h, grad_h, grad_g, flux, flux_jac, 1.0, f"grushin({a:g})", singular_axis=True
    )


def radial_power(p: float) -> DensityField:
    """g = h = |x|^p.  No analytic flux is attached, so areas use triangulation."""
    if not (p >= 0 and math.isfinite(p)):
        raise InvalidSpec(f"radial_power density needs p >= 0, got {p}")
    p = float(p)

    def val(x):
        x = _pts(x)
        return np.hypot(x[..., 0], x[..., 1]) ** p

    def grad(x):
        x = _pts(x)
        r2 = (x ** 2).sum(axis=-1)
        with np.errstate(divide="ignore", invalid="ignore"):
            fac = np.where(r2 > 0, p * r2 ** (0.5 * p - 1.0), 0.0)
        return x * fac[..., None]

    holder = min(1.0, p) if p > 0 else 1.0
    return DensityField("radial_power", {"p": p}, val, val, grad, grad, None, None, holder, f"radial_power({p:g})")


def make_density(spec: dict) -> DensityField:
    """Build a field from ``{"kind": ..., "c"|"alpha"|"p": ...}``."""
    if not isinstance(spec, dict) or "kind" not in spec:
        raise InvalidSpec(f"density spec must be an object with 'kind': {spec!r}")
    kind = spec["kind"]
    if kind == "constant":
        return constant(spec.get("c", 1.0))
    if kind == "gaussian":
        return gaussian()
    if kind == "grushin":
        if "alpha" not in spec:
            raise InvalidSpec("grushin density needs 'alpha'")
        return grushin(spec["alpha"])
    if kind == "radial_power":
        if "p" not in spec:
            raise InvalidSpec("radial_power density needs 'p'")
        return radial_power(spec["p"])
    raise InvalidSpec(f"unknown density kind {kind!r}")


def with_fd_gradients(field: DensityField, scale: float) -> DensityField:
    """Copy of ``field`` whose gradients come from central differences."""
    step = FD_STEP_FRACTION * scale
    return replace(field, grad_h=fd_gradient(field.h, step), grad_g=fd_gradient(field.g, step), name=field.name + "[fd]")


def without_flux(field: DensityField) -> DensityField:
    return replace(field, flux=None, flux_jacobian=None)


# ---------------------------------------------------------------------------


def local_bounds(field: DensityField, center, radius: float, seed: int = 0) -> LocalBounds:
    """Bounds of h on a closed disk."""
    c = np.asarray(center, dtype=float)
    r = float(radius)
    dist = float(np.hypot(*c))
    near, far = max(0.0, dist - r), dist + r
    kind = field.kind
    if kind == "constant":
        v = field.params["c"]
        lo, hi = v, v
    elif kind == "grushin":
        lo, hi = 1.0, 1.0
    elif kind == "gaussian":
        lo, hi = INV_2PI * math.exp(-0.5 * far ** 2), INV_2PI * math.exp(-0.5 * near ** 2)
    elif kind == "radial_power":
        p = field.params["p"]
        lo, hi = near ** p, far ** p
    else:
        rng = np.random.default_rng(seed)
        n_in = 4096 - 256
        rad = r * np.sqrt(rng.random(n_in))
        ang = 2 * np.pi * rng.random(n_in)
        t = np.linspace(0, 2 * np.pi, 256, endpoint=False)
        pts = np.concatenate([
            c + np.stack([rad * np.cos(ang), rad * np.sin(ang)], axis=-1),
            c + r * np.stack([np.cos(t), np.sin(t)], axis=-1),
        ])
        vals = field.h(pts)
        lo, hi = 0.99 * float(vals.min()), 1.01 * float(vals.max())
    return LocalBounds(float(lo), float(hi), (float(c[0]), float(c[1])), r)


def _axis_crossings(cx: float, r: float) -> list[float]:
    """Angles where the circle of radius r about (cx, .) meets x1 = 0."""
    if abs(cx) >= r:
        return []
    base = math.acos(-cx / r)
    return sorted([base, 2 * math.pi - base])


def weighted_disk_volume(field: DensityField, center, r: float, order: int = 64, panels: int = 8) -> float:
    """Integral of g over the disk B(center, r).

    With a flux F (div F = g) the boundary integral of F.n is evaluated by
    composite Gauss-Legendre in the angle, split where the circle crosses a
    singular axis.  Otherwise a polar tensor rule (64 radial x 128 angular
    points) is used.
    """
    if not r > 0:
        raise ValueError("radius must be positive")
    c = np.asarray(center, dtype=float)
    if field.has_flux:
        breaks = [0.0, 2 * math.pi]
        if field.singular_axis:
            cross = _axis_crossings(float(c[0]), r)
            if cross:
                breaks = [cross[0], cross[1], cross[0] + 2 * math.pi]
        xg, wg = np.polynomial.legendre.leggauss(order)
        total = 0.0
        for a, b in zip(breaks[:-1], breaks[1:]):
            if field.singular_axis and len(breaks) == 3:
                # F has a root-type kink at the axis: grade panels toward both ends
                edges = np.unique(np.concatenate([[a], a + (b - a) * _graded(panels), [b]]))
            else:
                edges = np.linspace(a, b, panels + 1)
            lo, hi = edges[:-1, None], edges[1:, None]
            th = 0.5 * (hi - lo) * xg[None, :] + 0.5 * (hi + lo)
            w = 0.5 * (hi - lo) * wg[None, :]
            nrm = np.stack([np.cos(th), np.sin(th)], axis=-1)
            F = field.flux(c + r * nrm)
            total += float(((F * nrm).sum(axis=-1) * w).sum()) * r
        return total
    xr, wr = np.polynomial.legendre.leggauss(64)
    xt, wt = np.polynomial.legendre.leggauss(128)
    rho = 0.5 * r * (xr + 1)
    wrho = 0.5 * r * wr
    th = np.pi * (xt + 1)
    wth = np.pi * wt
    R, T = np.meshgrid(rho, th, indexing="ij")
    pts = c + np.stack([R * np.cos(T), R * np.sin(T)], axis=-1)
    return float((field.g(pts) * R * wrho[:, None] * wth[None, :]).sum())


def _graded(panels: int) -> np.ndarray:
    """Interior panel breakpoints on (0, 1), refined geometrically at both ends."""
    half = max(panels // 2, 2)
    left = 0.5 * 0.25 ** np.arange(half)
    pts = np.concatenate([left, 1 - left])
    pts = pts[(pts > 0) & (pts < 1)]
    return np.unique(pts)
