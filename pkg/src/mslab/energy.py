"""Mumford-Shah energy on disks, for analytic models and grid fields."""
from __future__ import annotations

import csv
import io
from dataclasses import dataclass, field

import numpy as np
from scipy.integrate import quad

from .errors import NotAJumpArc
from .geometry import Disk, circle_crossings, length_in_disk, point_segment_distance
from .pairs import PairView
from .quadrature import disk_breakpoints, disk_integral, gauss_legendre, ray_chord

TWO_PI = 2.0 * np.pi
SUBCELL = 6  # sub-samples per cell side for partial and cut cells


@dataclass(frozen=True)
class EnergyReport:
    dirichlet: float
    length: float
    fidelity: float
    lam: float
    r: float
    upper_bound: float
    bound_ok: bool

    @property
    def total(self) -> float:
        return self.dirichlet + self.length + self.lam * self.fidelity

    @property
    def d(self) -> float:
        return self.dirichlet / self.r

    @property
    def F(self) -> float:
        return 2.0 * self.d + self.length / self.r

    def as_dict(self) -> dict:
        return {"dirichlet": self.dirichlet, "length": self.length, "fidelity": self.fidelity,
                "lambda": self.lam, "r": self.r, "total": self.total, "d": self.d, "F": self.F,
                "upper_bound": self.upper_bound, "bound_ok": self.bound_ok}


@dataclass
class RadialProfile:
    center: np.ndarray
    r: np.ndarray
    d: np.ndarray
    ell_over_r: np.ndarray
    F: np.ndarray
    N: np.ndarray
    d_decreasing: np.ndarray = field(default=None)
    F_decreasing: np.ndarray = field(default=None)

    def decreasing_intervals(self, which="F") -> list[tuple[float, float]]:
        """Maximal radius intervals on which the sampled quantity strictly decreases."""
        flags = self.F_decreasing if which == "F" else self.d_decreasing
        out, start = [], None
        for k, f in enumerate(flags):
            if f and start is None:
                start = k
            if not f and start is not None:
                out.append((float(self.r[start]), float(self.r[k])))
                start = None
        if start is not None:
            out.append((float(self.r[start]), float(self.r[-1])))
        return out

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["r", "d", "ell_over_r", "F", "N", "violation_flag"])
        for k in range(len(self.r)):
            flag = int(bool(self.F_decreasing[k]) or bool(self.d_decreasing[k]))
            w.writerow([f"{self.r[k]:.12g}", f"{self.d[k]:.12g}", f"{self.ell_over_r[k]:.12g}",
                        f"{self.F[k]:.12g}", int(self.N[k]), flag])
        return buf.getvalue()


# analytic models ------------------------------------------------------------

def _cracktip_dirichlet(model, disk: Disk) -> float:
    """|grad u|^2 = b^2/(4 rho) around the tip, so D = (b^2/4) * integral of chord lengths."""
    b2 = model.params["b"] ** 2
    tip = model.center

    def chord(phi):
        r0, r1 = ray_chord(tip, disk, np.array([phi]))
        return float(r1[0] - r0[0])

    pts = disk_breakpoints(tip, disk)
    val, _ = quad(chord, 0.0, TWO_PI, points=pts or None, limit=400, epsabs=1e-14, epsrel=1e-13)
    return 0.25 * b2 * val


def _model_fidelity(p: PairView, disk: Disk) -> float:
    m = p.model

    def f(pts):
        u, _ = m.eval(pts)
        return (u - p.g_at(pts)) ** 2

    if m.kind == "constant":
        return float(disk_integral(f, disk)[0])
    arms = np.asarray(m.arm_angles) + m.theta
    return float(disk_integral(f, disk, pole=m.center, breaks=arms)[0])


# grid fields ----------------------------------------------------------------

def _cells_in_disk(fld, disk: Disk):
    ny, nx = fld.shape
    c = (disk.center - fld.origin) / fld.h
    rr = disk.radius / fld.h
    i0, i1 = max(int(np.floor(c[0] - rr)) - 1, 0), min(int(np.ceil(c[0] + rr)) + 1, nx - 2)
    j0, j1 = max(int(np.floor(c[1] - rr)) - 1, 0), min(int(np.ceil(c[1] + rr)) + 1, ny - 2)
    I, J = np.meshgrid(np.arange(i0, i1 + 1), np.arange(j0, j1 + 1))
    return I.ravel(), J.ravel()


def _subcell_offsets(m=SUBCELL):
    t = (np.arange(m) + 0.5) / m
    X, Y = np.meshgrid(t, t)
    return np.stack([X.ravel(), Y.ravel()], axis=1)


def _grid_dirichlet(p: PairView, disk: Disk) -> float:
    fld = p.u
    h = fld.h
    I, J = _cells_in_disk(fld, disk)
    corners = fld.origin + h * np.stack([I, J], axis=1)
    centers = corners + 0.5 * h
    # classify cells by how much of them lies in the disk
    dc = np.linalg.norm(centers - disk.center, axis=1)
    half_diag = h * np.sqrt(0.5)
    inside = dc <= disk.radius - half_diag
    partial = (~inside) & (dc < disk.radius + half_diag)
    segs = p.K.segments()
    if len(segs):
        dK, _ = point_segment_distance(centers, segs)
    else:
        dK = np.full(len(centers), np.inf)
    v = fld.values
    special = dK < half_diag * 1.0001
    if fld.mask is not None:
        m = fld.mask
        special |= m[J, I] | m[J, I + 1] | m[J + 1, I] | m[J + 1, I + 1]
    # clean cells: exact integral of the bilinear interpolant's gradient
    a = v[J, I + 1] - v[J, I]
    b = v[J + 1, I + 1] - v[J + 1, I]
    c = v[J + 1, I] - v[J, I]
    d = v[J + 1, I + 1] - v[J, I + 1]
    q1 = (a * a + a * b + b * b + c * c + c * d + d * d) / 3.0
    total = float(q1[inside & ~special].sum())
    offs = _subcell_offsets()
    # partial clean cells: the same integrand over the exact cell-disk intersection
    sel = np.flatnonzero(partial & ~special)
    if len(sel):
        total += _partial_cells(corners[sel], h, a[sel], b[sel], c[sel], d[sel], disk)
    # cut or masked cells: one-sided gradients on each side of K
    sel = np.flatnonzero((inside | partial) & special)
    if len(sel):
        sub = corners[sel, None, :] + h * offs[None, :, :]
        w = np.linalg.norm(sub - disk.center, axis=-1) <= disk.radius
        cell = np.repeat(np.arange(len(sel)), len(offs))[w.ravel()]
        pts = sub.reshape(-1, 2)[w.ravel()]
        grads = _one_sided_gradients(p, centers[sel], np.stack([I[sel], J[sel]], 1), cell, pts, segs)
        total += float((grads**2).sum() * h * h / len(offs))
    return total


def _partial_cells(corners, h, a, b, c, d, disk: Disk, n_gauss=6) -> float:
    """Integral of the bilinear interpolant's |grad|^2 over each cell intersected with the disk.

    With gx = (a + (b - a) fy) / h and gy = (c + (d - c) fx) / h the y-integral
    is done exactly between the circle's chord limits; the x-integral uses
    Gauss-Legendre panels split wherever those limits have a kink.
    """
    cx, cy = disk.center
    R = disk.radius
    x0, y0 = corners[:, 0], corners[:, 1]
    x1, y1 = x0 + h, y0 + h
    with np.errstate(invalid="ignore"):
        half = lambda y: np.sqrt(R * R - (y - cy) ** 2)  # noqa: E731
        kinks = np.stack([x0, x1, cx - R + 0 * x0, cx + R + 0 * x0, cx - half(y0), cx + half(y0),
                          cx - half(y1), cx + half(y1)], axis=1)
    kinks = np.sort(np.clip(np.nan_to_num(kinks, nan=x0[:, None]), x0[:, None], x1[:, None]), axis=1)
    xg, wg = gauss_legendre(n_gauss)
    lo, hi = kinks[:, :-1, None], kinks[:, 1:, None]
    x = 0.5 * (hi - lo) * xg + 0.5 * (hi + lo)  # (cells, panels, nodes)
    w = 0.5 * (hi - lo) * wg
    s = np.sqrt(np.clip(R * R - (x - cx) ** 2, 0.0, None))
    t1 = np.clip(cy - s, y0[:, None, None], y1[:, None, None]) - y0[:, None, None]
    t2 = np.clip(cy + s, y0[:, None, None], y1[:, None, None]) - y0[:, None, None]
    al = (a / h)[:, None, None]
    be = ((b - a) / (h * h))[:, None, None]
    cc, dd = c[:, None, None], d[:, None, None]
    gy = (cc + (dd - cc) * (x - x0[:, None, None]) / h) / h
    inner = (al * al + gy * gy) * (t2 - t1) + al * be * (t2**2 - t1**2) + be * be * (t2**3 - t1**3) / 3.0
    return float((w * inner).sum())


def _one_sided_gradients(p: PairView, centers, cells, cell, pts, segs):
    """Gradient at each point, fitted from unmasked nodes on the point's side of K.

    ``cell[n]`` indexes the grid cell (row of ``centers`` and ``cells``) that
    point n belongs to.  One fit is made per cell, nearest segment and side;
    fits are memoised on the pair so nested disks reuse them.
    """
    h = p.u.h
    if len(segs):
        dist, idx = point_segment_distance(pts, segs)
        a, b = segs[idx, 0], segs[idx, 1]
        t = b - a
        s = np.clip(((pts - a) * t).sum(1) / (t * t).sum(1), 0.0, 1.0)
        foot = a + s[:, None] * t
        tn = t / np.linalg.norm(t, axis=1)[:, None]
        nu = np.stack([-tn[:, 1], tn[:, 0]], axis=1)
        side = np.where(((pts - foot) * nu).sum(1) >= 0, 1, -1)
        far = dist > 3 * h
    else:
        idx = np.zeros(len(pts), dtype=int)
        foot = nu = pts
        side = np.zeros(len(pts), dtype=int)
        far = np.ones(len(pts), dtype=bool)
    side[far] = 0
    key = np.where(far, -1, idx) * 3 + side + 1
    groups, first, inverse = np.unique(np.stack([cell, key], 1), axis=0, return_index=True, return_inverse=True)
    G = np.empty((len(groups), 2))
    for g, ((c, k), n) in enumerate(zip(groups, first)):
        ck = (int(cells[c, 0]), int(cells[c, 1]), int(k))
        if ck not in p._fits:
            try:
                if side[n] == 0:
                    grad = p._side_fit(centers[c], centers[c], None, 0)[1]
                else:
                    grad = p._side_fit(centers[c], foot[n], nu[n], side[n])[1]
            except NotAJumpArc:
                grad = np.zeros(2)
            p._fits[ck] = grad
        G[g] = p._fits[ck]
    return G[inverse.ravel()]


def _grid_fidelity(p: PairView, disk: Disk) -> float:
    fld = p.u
    h = fld.h
    I, J = _cells_in_disk(fld, disk)
    corners = fld.origin + h * np.stack([I, J], axis=1)
    offs = _subcell_offsets(2)
    sub = (corners[:, None, :] + h * offs[None]).reshape(-1, 2)
    w = np.linalg.norm(sub - disk.center, axis=1) <= disk.radius
    sub = sub[w]
    return float(((fld.interpolate(sub) - p.g_at(sub)) ** 2).sum() * h * h / len(offs))


# public operations ----------------------------------------------------------

def dirichlet(p: PairView, D: Disk) -> float:
    """Dirichlet energy of u on D minus K."""
    p.check_domain(D)
    if p.is_model:
        return _cracktip_dirichlet(p.model, D) if p.model.kind == "cracktip" else 0.0
    return _grid_dirichlet(p, D)


def fidelity(p: PairView, D: Disk) -> float:
    p.check_domain(D)
    if p.is_model:
        return _model_fidelity(p, D)
    return _grid_fidelity(p, D)


def upper_bound(p: PairView, D: Disk) -> float:
    return TWO_PI * D.radius + p.lam * np.pi * p.g_sup(D) ** 2 * D.radius**2


def energy_total(p: PairView, D: Disk) -> EnergyReport:
    dr = dirichlet(p, D)
    ln = length_in_disk(p.jumpset(D), D)
    fid = fidelity(p, D) if p.lam > 0 else 0.0
    ub = upper_bound(p, D)
    total = dr + ln + p.lam * fid
    return EnergyReport(dirichlet=dr, length=ln, fidelity=fid, lam=p.lam, r=D.radius,
                        upper_bound=ub, bound_ok=bool(total <= ub))


def radial_profile(p: PairView, x, r_grid, rtol=1e-6) -> RadialProfile:
    """d, l/r and F = 2d + l/r on increasing radii, with decrease annotations.

    A sample is flagged when the quantity dropped from the previous radius by
    more than ``rtol`` relative.
    """
    r = np.asarray(r_grid, dtype=float)
    if np.any(r <= 0) or np.any(np.diff(r) <= 0):
        raise ValueError("radii must be positive and strictly increasing")
    x = np.asarray(x, dtype=float)
    d = np.empty(len(r))
    ell = np.empty(len(r))
    N = np.zeros(len(r), dtype=int)
    for k, rk in enumerate(r):
        D = Disk(x, rk)
        d[k] = dirichlet(p, D) / rk
        K = p.jumpset(D)
        ell[k] = length_in_disk(K, D) / rk
        try:
            N[k] = len(circle_crossings(K, D))
        except Exception:
            N[k] = -1
    F = 2.0 * d + ell
    dd = np.zeros(len(r), dtype=bool)
    dF = np.zeros(len(r), dtype=bool)
    dd[1:] = np.diff(d) < -rtol * np.maximum(np.abs(d[:-1]), 1e-300)
    dF[1:] = np.diff(F) < -rtol * np.maximum(np.abs(F[:-1]), 1e-300)
    return RadialProfile(center=x, r=r, d=d, ell_over_r=ell, F=F, N=N, d_decreasing=dd, F_decreasing=dF)
