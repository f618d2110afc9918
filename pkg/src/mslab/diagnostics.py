"""Flatness, excess and closeness to the elementary cones; point classification."""
from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np
from scipy.spatial import cKDTree

from .energy import dirichlet
from .errors import EmptyIntersection
from .geometry import Disk, JumpSet, clip_segments, sample_segments
from .pairs import PairView

TWO_PI = 2.0 * np.pi
EPS_THRESHOLD = 0.05
D_MIN = 0.1

# arm angles of the posed model sets, relative to theta
_CLASS_ARMS = {"j": (0.0, np.pi), "t": (0.0, TWO_PI / 3, 2 * TWO_PI / 3), "c": (0.0,)}


@dataclass(frozen=True)
class FlatnessReport:
    beta: float
    line_point: np.ndarray
    line_direction: np.ndarray
    excess: float
    excess_direction: np.ndarray
    length: float
    r: float


@dataclass(frozen=True)
class ClosenessReport:
    cls: str
    theta: float
    hausdorff: float
    dirichlet: float

    @property
    def omega(self) -> float:
        return self.hausdorff + self.dirichlet


@dataclass
class Classification:
    point: np.ndarray
    scales: list
    omega_j: list = field(default_factory=list)
    omega_t: list = field(default_factory=list)
    omega_c: list = field(default_factory=list)
    d: list = field(default_factory=list)
    label: str = "unknown"

    def as_dict(self) -> dict:
        fin = lambda xs: [None if not np.isfinite(v) else float(v) for v in xs]  # noqa: E731
        return {"point": [float(c) for c in self.point], "scales": [float(s) for s in self.scales],
                "omega_j": fin(self.omega_j), "omega_t": fin(self.omega_t), "omega_c": fin(self.omega_c),
                "d": fin(self.d), "label": self.label}

    def to_json(self) -> str:
        return json.dumps(self.as_dict(), sort_keys=True, indent=2)


def _clipped(J: JumpSet, D: Disk) -> np.ndarray:
    segs = clip_segments(J.segments(), D)
    if len(segs) == 0:
        raise EmptyIntersection("K does not meet the disk")
    return segs


def _second_moment(segs, centroid):
    """Exact integral of (y - c)(y - c)^T over the segments with respect to length."""
    L = np.linalg.norm(segs[:, 1] - segs[:, 0], axis=1)
    d0 = segs[:, 0] - centroid
    d1 = segs[:, 1] - centroid
    M = (np.einsum("k,ki,kj->ij", L, d0, d0) + np.einsum("k,ki,kj->ij", L, d1, d1)
         + 0.5 * (np.einsum("k,ki,kj->ij", L, d0, d1) + np.einsum("k,ki,kj->ij", L, d1, d0)))
    return M / 3.0


def line_moment(segs, normal, offset) -> float:
    """Integral of dist^2 to the line {y . normal = offset} over the segments."""
    L = np.linalg.norm(segs[:, 1] - segs[:, 0], axis=1)
    f0 = segs[:, 0] @ normal - offset
    f1 = segs[:, 1] @ normal - offset
    return float((L * (f0 * f0 + f0 * f1 + f1 * f1)).sum() / 3.0)


def brute_force_flatness(J: JumpSet, D: Disk, n_angle=360, n_offset=100) -> float:
    """Grid minimum of the flatness functional over (angle, offset) lines meeting the disk."""
    segs = _clipped(J, D)
    best = np.inf
    for a in np.linspace(0.0, np.pi, n_angle, endpoint=False):
        nrm = np.array([-np.sin(a), np.cos(a)])
        c0 = D.center @ nrm
        for off in np.linspace(-D.radius, D.radius, n_offset):
            best = min(best, line_moment(segs, nrm, c0 + off))
    return best / D.radius**3


def mean_flatness(J: JumpSet, D: Disk) -> FlatnessReport:
    """beta(x, r) and the excess, each with its optimal line or direction.

    For a fixed direction the best offset passes through the length-weighted
    centroid, and the best direction is then the principal axis of the
    second-moment matrix, so the minimum over all lines is exact.
    """
    segs = _clipped(J, D)
    L = np.linalg.norm(segs[:, 1] - segs[:, 0], axis=1)
    ell = float(L.sum())
    centroid = (L[:, None] * 0.5 * (segs[:, 0] + segs[:, 1])).sum(0) / ell
    w, V = np.linalg.eigh(_second_moment(segs, centroid))
    beta = max(float(w[0]), 0.0) / D.radius**3
    exc, vdir = _excess(segs, D.radius, None)
    return FlatnessReport(beta=beta, line_point=centroid, line_direction=V[:, 1], excess=exc,
                          excess_direction=vdir, length=ell, r=D.radius)


def _excess(segs, r, V):
    t = segs[:, 1] - segs[:, 0]
    L = np.linalg.norm(t, axis=1)
    e = t / L[:, None]
    if V is None:
        # the optimal direction maximises sum L (e.V)^2: top eigenvector of the tangent tensor
        T = np.einsum("k,ki,kj->ij", L, e, e)
        _, vecs = np.linalg.eigh(T)
        V = vecs[:, 1]
    V = np.asarray(V, dtype=float)
    V = V / np.linalg.norm(V)
    cos2 = (e @ V) ** 2
    return float((L * (2.0 - 2.0 * cos2)).sum() / r), V


def excess(J: JumpSet, D: Disk, V=None) -> FlatnessReport:
    segs = _clipped(J, D)
    rep = mean_flatness(J, D)
    exc, vdir = _excess(segs, D.radius, V)
    return FlatnessReport(beta=rep.beta, line_point=rep.line_point, line_direction=rep.line_direction,
                          excess=exc, excess_direction=vdir, length=rep.length, r=D.radius)


# closeness -------------------------------------------------------------------

def _arm_dirs(cls, theta):
    a = np.asarray(_CLASS_ARMS[cls])[None, :] + np.atleast_1d(theta)[:, None]
    return np.stack([np.cos(a), np.sin(a)], axis=-1)  # (n_theta, n_arms, 2)


def _posed_samples(cls, theta, R, spacing):
    """Points of the posed cone (relative to x) inside the closed disk of radius R."""
    n = max(2, int(np.ceil(R / spacing)) + 1)
    t = np.linspace(0.0, R, n)
    dirs = _arm_dirs(cls, theta)
    pts = t[None, None, :, None] * dirs[:, :, None, :]
    return pts.reshape(len(dirs), -1, 2)


def _dist_to_cone(y, cls, theta, R):
    """Exact distance from points y (relative to x) to the cone clipped at radius R."""
    dirs = _arm_dirs(cls, theta)  # (T, A, 2)
    s = np.clip(np.einsum("ni,tai->tan", y, dirs), 0.0, R)
    diff = y[None, None, :, :] - s[..., None] * dirs[:, :, None, :]
    return np.linalg.norm(diff, axis=-1).min(axis=1)  # (T, n)


class _ConeDistance:
    def __init__(self, segs, x, R, spacing):
        self.y = sample_segments(segs, spacing) - x
        self.tree = cKDTree(self.y)
        self.R = R
        self.spacing = spacing

    def __call__(self, cls, theta, chunk=48):
        theta = np.atleast_1d(theta)
        if len(theta) > chunk:
            return np.concatenate([self(cls, theta[i:i + chunk]) for i in range(0, len(theta), chunk)])
        d_k = _dist_to_cone(self.y, cls, theta, self.R).max(axis=1)
        pts = _posed_samples(cls, theta, self.R, self.spacing)
        d_m = self.tree.query(pts.reshape(-1, 2))[0].reshape(len(theta), -1).max(axis=1)
        return np.maximum(d_k, d_m)


def _golden(f, a, b, tol=1e-13):
    """Golden-section minimum of f on [a, b] down to an absolute bracket width tol."""
    g = 0.5 * (np.sqrt(5.0) - 1.0)
    c, d = b - g * (b - a), a + g * (b - a)
    fc, fd = f(c), f(d)
    while b - a > tol:
        if fc <= fd:
            b, d, fd = d, c, fc
            c = b - g * (b - a)
            fc = f(c)
        else:
            a, c, fc = c, d, fd
            d = a + g * (b - a)
            fd = f(d)
    return (c, fc) if fc <= fd else (d, fd)


def closeness(p: PairView, x, r: float, cls: str, n_grid: int = 720, spacing: float | None = None) -> ClosenessReport:
    """Omega^j, Omega^t or Omega^c at (x, r), minimised over the pose angle."""
    if cls not in _CLASS_ARMS:
        raise ValueError("class must be one of 'j', 't', 'c'")
    x = np.asarray(x, dtype=float)
    D2 = Disk(x, 2.0 * r)
    p.check_domain(D2)
    dir_part = 0.0 if cls == "c" else dirichlet(p, D2) / r
    segs = clip_segments(p.jumpset(D2).segments(), D2)
    if len(segs) == 0:
        return ClosenessReport(cls=cls, theta=0.0, hausdorff=np.inf, dirichlet=dir_part)
    if spacing is None:
        spacing = 0.5 * p.h if not p.is_model else 2.0 * r / 1000
    R = 2.0 * r
    # coarse sweep on the 0.5 degree grid (one symmetry period suffices) ...
    period = {"j": np.pi, "t": TWO_PI / 3, "c": TWO_PI}[cls]
    step = TWO_PI / n_grid
    grid = np.arange(0.0, period - 1e-12, step)
    coarse_h = max(spacing, R / 64)
    coarse = _ConeDistance(segs, x, R, coarse_h)(cls, grid)
    # ... then refine every grid angle that the sampling error cannot rule out
    fine = _ConeDistance(segs, x, R, spacing)
    local_min = (coarse <= np.roll(coarse, 1)) & (coarse <= np.roll(coarse, -1))
    cand = np.flatnonzero(local_min & (coarse <= coarse.min() + 2.0 * coarse_h))
    cand = cand[np.argsort(coarse[cand], kind="stable")][:6]
    best_t, best_v = grid[cand[0]], np.inf
    for k in cand:
        v0 = float(fine(cls, grid[k])[0])
        t, v = _golden(lambda t: float(fine(cls, t)[0]), grid[k] - step, grid[k] + step)
        t, v = (t, v) if v < v0 else (grid[k], v0)
        if v < best_v:
            best_t, best_v = t, v
    return ClosenessReport(cls=cls, theta=float(np.mod(best_t, TWO_PI)), hausdorff=float(best_v) / r,
                           dirichlet=dir_part)


def classify_point(p: PairView, x, scales, eps_thr: float = EPS_THRESHOLD, d_min: float = D_MIN) -> Classification:
    scales = [float(s) for s in scales]
    if len(scales) < 3:
        raise ValueError("classification needs at least three scales")
    x = np.asarray(x, dtype=float)
    out = Classification(point=x, scales=scales)
    for r in scales:
        out.omega_j.append(closeness(p, x, r, "j").omega)
        out.omega_t.append(closeness(p, x, r, "t").omega)
        out.omega_c.append(closeness(p, x, r, "c").omega)
        out.d.append(dirichlet(p, Disk(x, r)) / r)
    below = lambda xs: all(v < eps_thr for v in xs)  # noqa: E731
    if below(out.omega_j):
        out.label = "jump"
    elif below(out.omega_t):
        out.label = "triple"
    elif below(out.omega_c) and min(out.d) >= d_min:
        out.label = "loose-end"
    return out
