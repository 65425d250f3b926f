"""Fermat point, Steiner tripods and the isoceles length ratio L(theta)."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DegenerateTriangle, DomainError

TWO_PI_3 = 2.0 * math.pi / 3.0


@dataclass(frozen=True)
class Tripod:
    fermat_point: np.ndarray
    terminals: tuple[np.ndarray, np.ndarray, np.ndarray]
    total_euclidean_length: float

    @property
    def legs(self) -> list[tuple[np.ndarray, np.ndarray]]:
        """Segments from the Fermat point to each terminal, zero-length legs dropped."""
        return [(self.fermat_point, t) for t in self.terminals if np.linalg.norm(t - self.fermat_point) > 0]


def _angle_at(p, q, r) -> float:
    """Interior angle at p of triangle pqr."""
    u, v = q - p, r - p
    c = float(np.dot(u, v) / (np.linalg.norm(u) * np.linalg.norm(v)))
    return math.acos(max(-1.0, min(1.0, c)))


def _sum_dist(w, pts) -> float:
    return float(sum(np.linalg.norm(w - p) for p in pts))


def fermat_point(a, b, c, tol: float = 1e-12, max_iter: int = 1000) -> Tripod:
    """Point minimizing the summed distance to a, b, c.

    When an angle reaches 2*pi/3 the minimizer is that vertex.  Otherwise the
    first isogonic centre is placed in closed form and polished by Weiszfeld
    iterations.
    """
    pts = [np.asarray(p, dtype=float) for p in (a, b, c)]
    scale = max(np.linalg.norm(pts[i] - pts[j]) for i in range(3) for j in range(i + 1, 3))
    if scale == 0 or min(np.linalg.norm(pts[i] - pts[j]) for i in range(3) for j in range(i + 1, 3)) <= 1e-14 * scale:
        raise DegenerateTriangle("two or more terminals coincide")
    angles = [_angle_at(pts[k], pts[(k + 1) % 3], pts[(k + 2) % 3]) for k in range(3)]
    big = int(np.argmax(angles))
    if angles[big] >= TWO_PI_3 - 1e-14:
        w = pts[big].copy()
        return Tripod(w, tuple(pts), _sum_dist(w, pts))

    # barycentric a*csc(A + pi/3) : b*csc(B + pi/3) : c*csc(C + pi/3)
    sides = [np.linalg.norm(pts[(k + 1) % 3] - pts[(k + 2) % 3]) for k in range(3)]
    lam = np.array([sides[k] / math.sin(angles[k] + math.pi / 3) for k in range(3)])
    lam /= lam.sum()
    w = lam[0] * pts[0] + lam[1] * pts[1] + lam[2] * pts[2]
    for _ in range(max_iter):
        d = np.array([np.linalg.norm(w - p) for p in pts])
        if np.any(d <= 1e-15 * scale):
            break
        inv = 1.0 / d
        w_new = sum(p * s for p, s in zip(pts, inv)) / inv.sum()
        step = np.linalg.norm(w_new - w)
        w = w_new
        if step <= tol * scale:
            break
    return Tripod(w, tuple(pts), _sum_dist(w, pts))


def l_theta(theta: float) -> float:
    """Steiner length of the isoceles triple with unit legs and apex angle theta."""
    if not (0.0 <= theta <= TWO_PI_3):
        raise DomainError(f"theta={theta} outside [0, 2*pi/3]")
    return math.cos(theta / 2) + math.sqrt(3.0) * math.sin(theta / 2)


def isoceles(theta: float, s: float = 1.0):
    """Apex x at the origin, y and z at distance s with angle theta between them."""
    x = np.zeros(2)
    y = s * np.array([math.cos(-theta / 2), math.sin(-theta / 2)])
    z = s * np.array([math.cos(theta / 2), math.sin(theta / 2)])
    return x, y, z


def tripod_polylines(a, b, c, spacing: float) -> list[np.ndarray]:
    """Legs of the Steiner tripod, each from the Fermat point to a terminal."""
    if not spacing > 0:
        raise ValueError("spacing must be positive")
    tri = fermat_point(a, b, c)
    out = []
    for w, t in tri.legs:
        L = float(np.linalg.norm(t - w))
        n = max(1, int(math.ceil(L / spacing)))
        s = np.linspace(0.0, 1.0, n + 1)[:, None]
        pts = w + s * (t - w)
        pts[0], pts[-1] = w, t
        out.append(pts)
    return out
