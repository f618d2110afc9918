"""Circle and disk quadrature adapted to a jump set."""
from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy.integrate import quad_vec
from scipy.special import roots_legendre

from .geometry import Disk

TWO_PI = 2.0 * np.pi


@lru_cache(maxsize=64)
def gauss_legendre(n: int):
    """Nodes and weights on [-1, 1] (cached, read-only)."""
    x, w = roots_legendre(n)
    x.flags.writeable = False
    w.flags.writeable = False
    return x, w


@dataclass(frozen=True)
class QuadInfo:
    nodes: int
    error: float


def circle_arcs(center, radius, points) -> list[tuple[float, float]]:
    """Angular arcs of the circle between consecutive crossing points."""
    if len(points) == 0:
        return [(0.0, TWO_PI)]
    ang = np.sort(np.mod([np.arctan2(*(np.asarray(p) - center)[::-1]) for p in points], TWO_PI))
    ends = np.append(ang[1:], ang[0] + TWO_PI)
    return [(a, b) for a, b in zip(ang, ends) if b - a > 1e-14]


def _circle_frame(center, radius, phi):
    n = np.stack([np.cos(phi), np.sin(phi)], axis=-1)
    t = np.stack([-np.sin(phi), np.cos(phi)], axis=-1)
    return center + radius * n, n, t


def circle_integral(fun, center, radius, crossing_points=(), n0=16, rtol=1e-13, nmax=4096, exclude=0.0):
    """Integrate fun(points, normals, tangents) over the circle with respect to arclength.

    Each arc between crossings gets its own Gauss-Legendre rule, doubled until
    two successive results agree to ``rtol``.  With ``exclude`` > 0 an angular
    strip of that half-width is cut at both ends of every arc and filled by
    constant extrapolation of the nearest retained value.
    """
    center = np.asarray(center, dtype=float)
    arcs = circle_arcs(center, radius, crossing_points)
    prev = None
    n = n0
    while True:
        total = 0.0
        for a, b in arcs:
            w_ex = min(exclude, 0.25 * (b - a))
            a1, b1 = a + w_ex, b - w_ex
            x, w = gauss_legendre(n)
            phi = 0.5 * (b1 - a1) * x + 0.5 * (a1 + b1)
            pts, nn, tt = _circle_frame(center, radius, phi)
            vals = np.asarray(fun(pts, nn, tt), dtype=float)
            wts = 0.5 * (b1 - a1) * w * radius
            total = total + np.tensordot(wts, vals, axes=(0, 0))
            if w_ex > 0:
                pe, ne, te = _circle_frame(center, radius, np.array([a1, b1]))
                ve = np.asarray(fun(pe, ne, te), dtype=float)
                total = total + w_ex * radius * (ve[0] + ve[1])
        if prev is not None:
            err = float(np.max(np.abs(np.asarray(total) - prev)))
            scale = max(1.0, float(np.max(np.abs(total))))
            if err <= rtol * scale or 2 * n > nmax:
                return total, QuadInfo(nodes=n * len(arcs), error=err)
        prev = np.asarray(total)
        n *= 2


def ray_chord(pole, disk: Disk, phi):
    """Radial interval [rho0, rho1] of the ray pole + rho e(phi) inside the disk."""
    e = np.stack([np.cos(phi), np.sin(phi)], axis=-1)
    w = np.asarray(pole, dtype=float) - disk.center
    s = e @ w
    c = w @ w - disk.radius**2
    disc = s * s - c
    sq = np.sqrt(np.clip(disc, 0.0, None))
    r1 = -s + sq
    r0 = np.where(c <= 0, 0.0, -s - sq)
    bad = (disc <= 0) | (r1 <= 0)
    r0 = np.where(bad, 0.0, np.clip(r0, 0.0, None))
    r1 = np.where(bad, 0.0, r1)
    return r0, r1


def disk_breakpoints(pole, disk: Disk, extra=()) -> list[float]:
    """Angles (in [0, 2pi]) where the polar integrand around pole changes character."""
    w = disk.center - np.asarray(pole, dtype=float)
    dist = np.linalg.norm(w)
    pts = [np.mod(a, TWO_PI) for a in extra]
    if dist > disk.radius:
        beta = np.arctan2(w[1], w[0])
        half = np.arcsin(disk.radius / dist)
        pts += [np.mod(beta - half, TWO_PI), np.mod(beta + half, TWO_PI)]
    return sorted(p for p in set(pts) if 1e-14 < p < TWO_PI - 1e-14)


def disk_integral(fun, disk: Disk, pole=None, breaks=(), n_inner=24, epsabs=1e-13, epsrel=1e-11, shape=()):
    """Integral of fun(points) over the disk in polar coordinates around ``pole``.

    The radial rule is Gauss-Legendre in s with rho = rho1 s^2 when the pole
    is inside the disk, which absorbs integrands behaving like rho^{-1/2}.
    ``breaks`` lists angles (around the pole) where fun jumps, e.g. arms of K.
    """
    pole = disk.center if pole is None else np.asarray(pole, dtype=float)
    xg, wg = gauss_legendre(n_inner)
    s = 0.5 * (xg + 1.0)
    ws = 0.5 * wg

    def inner(phi):
        r0, r1 = ray_chord(pole, disk, np.array([phi]))
        r0, r1 = float(r0[0]), float(r1[0])
        if r1 <= r0:
            return np.zeros(shape)
        if r0 == 0.0:
            rho = r1 * s * s
            jac = 2.0 * r1 * s
        else:
            rho = r0 + (r1 - r0) * s
            jac = np.full_like(s, r1 - r0)
        e = np.array([np.cos(phi), np.sin(phi)])
        pts = pole + rho[:, None] * e
        vals = np.asarray(fun(pts), dtype=float)
        return np.tensordot(ws * jac * rho, vals, axes=(0, 0))

    pts = disk_breakpoints(pole, disk, breaks)
    val, err = quad_vec(inner, 0.0, TWO_PI, epsabs=epsabs, epsrel=epsrel, points=pts or None, limit=400)
    return val, err
