"""Variational identities of critical pairs, evaluated as numerical residuals."""
from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np
from scipy.integrate import quad

from .errors import NotAJumpArc, OnJumpSet, TooCloseToK, WrongCrossingCount
from .geometry import Disk, clip_segments, circle_crossings, curvature_profile, JumpSet, length_in_disk, perp, vertex_tangents
from .models import ModelMinimizer
from .pairs import PairView
from .quadrature import circle_integral, gauss_legendre, disk_breakpoints, disk_integral, ray_chord

TWO_PI = 2.0 * np.pi


@dataclass
class IdentityResidual:
    name: str
    lhs: float
    rhs: float
    terms: dict = field(default_factory=dict)
    nodes: int = 0
    quad_error: float = 0.0

    @property
    def residual(self) -> float:
        return self.lhs - self.rhs

    def as_dict(self) -> dict:
        return {"identity": self.name, "lhs": self.lhs, "rhs": self.rhs, "residual": self.residual,
                "terms": {k: float(v) for k, v in self.terms.items()}, "nodes": self.nodes,
                "quad_error": self.quad_error}

    def to_json(self) -> str:
        return json.dumps(self.as_dict(), sort_keys=True, indent=2)


# shared pieces ----------------------------------------------------------------

def _setup(p: PairView, y, r):
    y = np.asarray(y, dtype=float)
    D = Disk(y, r)
    p.check_domain(D)
    if p.is_model and p.model.kind == "cracktip":
        if abs(np.linalg.norm(p.model.center - y) - r) <= 1e-9 * max(1.0, r):
            # |grad u|^2 ~ 1/|x| is not integrable along a circle through the tip
            raise OnJumpSet("the circle passes through the crack tip")
    K = p.jumpset(D)
    cr = circle_crossings(K, D)
    return y, D, K, cr


def _exclusion(p: PairView, r):
    return 0.0 if p.is_model else min(2.0 * p.h / r, 0.05)


def _boundary(p: PairView, D: Disk, cr, fun):
    """Circle integral of fun(u, grad, points, n, tau) over the circle minus K."""
    def f(pts, n, t):
        u, g = p.eval(pts)
        return fun(u, g, pts, n, t)

    return circle_integral(f, D.center, D.radius, [c.point for c in cr], exclude=_exclusion(p, D.radius))


def _bulk_lambda(p: PairView, D: Disk, field_fn):
    """2 lambda * integral over D minus K of (u - g) grad u . field_fn(x)."""
    if p.lam == 0.0:
        return 0.0

    def f(pts):
        u, g = p.eval(pts)
        return (u - p.g_at(pts)) * np.einsum("ni,ni->n", g, field_fn(pts))

    if p.is_model:
        m = p.model
        if m.kind == "constant":
            return 0.0
        val = disk_integral(f, D, pole=m.center, breaks=np.asarray(m.arm_angles) + m.theta)[0]
    else:
        val = _grid_bulk(p, D, f)
    return 2.0 * p.lam * float(val)


def _grid_bulk(p: PairView, D: Disk, f):
    h = p.u.h
    n = int(np.ceil(2 * D.radius / h)) * 2
    t = (np.arange(n) + 0.5) / n
    X, Y = np.meshgrid(D.center[0] - D.radius + 2 * D.radius * t, D.center[1] - D.radius + 2 * D.radius * t)
    pts = np.stack([X.ravel(), Y.ravel()], axis=1)
    pts = pts[np.linalg.norm(pts - D.center, axis=1) < D.radius]
    segs = p.K.segments()
    if len(segs):
        from .geometry import point_segment_distance

        keep = point_segment_distance(pts, segs)[0] > 1e-9
        pts = pts[keep]
    return f(pts).sum() * (2 * D.radius / n) ** 2


def _K_lambda(p: PairView, D: Disk, K: JumpSet, field_fn, n_gauss=8):
    """lambda * integral over K in D of (|u+ - g|^2 - |u- - g|^2) field_fn(x) . nu."""
    if p.lam == 0.0:
        return 0.0
    segs = clip_segments(K.segments(), D)
    if len(segs) == 0:
        return 0.0
    xg, wg = gauss_legendre(n_gauss)
    s = 0.5 * (xg + 1.0)
    total = 0.0
    for a, b in segs:
        L = np.linalg.norm(b - a)
        e = (b - a) / L
        nu = perp(e)
        pts = a + s[:, None] * (b - a)
        up, _, um, _ = p.trace(pts, nu)
        gK = p.g_at(pts)
        vals = ((up - gK) ** 2 - (um - gK) ** 2) * (field_fn(pts) @ nu)
        total += 0.5 * L * float(wg @ vals)
    return p.lam * total


# identities -------------------------------------------------------------------

def dlms_residual(p: PairView, y, r: float) -> IdentityResidual:
    y, D, K, cr = _setup(p, y, r)
    (un2, ut2), info = _boundary(p, D, cr, lambda u, g, x, n, t: np.stack(
        [np.einsum("ni,ni->n", g, n) ** 2, np.einsum("ni,ni->n", g, t) ** 2], axis=-1))
    ell = length_in_disk(K, D)
    cross = sum(float(c.tangent @ ((c.point - y) / r)) for c in cr)
    radial = lambda x: (x - y) / r  # noqa: E731
    bulk = _bulk_lambda(p, D, radial)
    kterm = _K_lambda(p, D, K, radial)
    rhs = ut2 - ell / r + cross + bulk + kterm
    return IdentityResidual("dlms", float(un2), float(rhs),
                            {"boundary_normal": un2, "boundary_tangential": ut2, "length_over_r": ell / r,
                             "crossings": cross, "lambda_bulk": bulk, "lambda_jump": kterm},
                            info.nodes, info.error)


def boundary_identity_residual(p: PairView, y, r: float, kind: str = "translation", v=(1.0, 0.0)) -> IdentityResidual:
    """Translation (constant field v) or rotation ((x - y)^perp / r) boundary identity.

    Written as lhs = boundary integral, rhs = -(crossing sum + lambda terms).
    """
    y, D, K, cr = _setup(p, y, r)
    if kind == "translation":
        v = np.asarray(v, dtype=float)
        fld = lambda x: np.broadcast_to(v, np.shape(x))  # noqa: E731
        bnd, info = _boundary(p, D, cr, lambda u, g, x, n, t: (g * g).sum(1) * (n @ v)
                              - 2.0 * np.einsum("ni,ni->n", g, n) * (g @ v))
        cross = sum(float(c.tangent @ v) for c in cr)
    elif kind == "rotation":
        fld = lambda x: perp(x - y) / r  # noqa: E731
        bnd, info = _boundary(p, D, cr, lambda u, g, x, n, t: -2.0 * np.einsum("ni,ni->n", g, n)
                              * np.einsum("ni,ni->n", g, t))
        cross = sum(float(c.tangent @ perp((c.point - y) / r)) for c in cr)
    else:
        raise ValueError("kind must be 'translation' or 'rotation'")
    bulk = _bulk_lambda(p, D, fld)
    kterm = _K_lambda(p, D, K, fld)
    rhs = -(cross + bulk + kterm)
    return IdentityResidual(kind, float(bnd), float(rhs),
                            {"boundary": bnd, "crossings": cross, "lambda_bulk": bulk, "lambda_jump": kterm},
                            info.nodes, info.error)


def am_identity_residual(p: PairView, r: float, y=None) -> IdentityResidual:
    """Loose-end identity: translation along tau(p) minus rotation, for a single crossing p."""
    if y is None:
        y = p.model.center if p.is_model else np.zeros(2)
    y, D, K, cr = _setup(p, y, r)
    if len(cr) != 1:
        raise WrongCrossingCount(len(cr))
    tp = perp((cr[0].point - y) / r)

    def integrand(u, g, x, n, t):
        un = np.einsum("ni,ni->n", g, n)
        return (g * g).sum(1) * (n @ tp) + 2.0 * un * np.einsum("ni,ni->n", g, t - tp)

    bnd, info = _boundary(p, D, cr, integrand)
    # lambda terms: translation(tau(p)) minus rotation
    bulk = _bulk_lambda(p, D, lambda x: tp - perp(x - y) / r)
    kterm = _K_lambda(p, D, K, lambda x: tp - perp(x - y) / r)
    rhs = -(bulk + kterm)
    return IdentityResidual("am", float(bnd), float(rhs),
                            {"boundary": bnd, "lambda_bulk": bulk, "lambda_jump": kterm},
                            info.nodes, info.error)


@dataclass(frozen=True)
class CracktipFactor:
    b: float
    b2: float
    error: float
    nodes: int


def cracktip_factor_solve(nodes: int = 2048, sign: int = 1) -> CracktipFactor:
    """Solve the translation identity on the unit disk for the cracktip amplitude.

    With u = b u1 the identity reads b^2 J + 1 = 0, J being the boundary
    integral for u1 = sqrt(rho) cos(phi/2); J is computed by Gauss-Legendre
    quadrature on the arc (0, 2 pi) cut at the crossing (1, 0).
    """
    unit = ModelMinimizer.cracktip(b=1.0)
    v = np.array([1.0, 0.0])
    x, w = gauss_legendre(nodes)
    phi = np.pi * (x + 1.0)
    n = np.stack([np.cos(phi), np.sin(phi)], axis=1)
    _, g = unit.eval(n)
    J = np.pi * float(w @ ((g * g).sum(1) * (n @ v) - 2.0 * (g @ v) * np.einsum("ni,ni->n", g, n)))
    crossing = 1.0  # e(p) . v at p = (1, 0)
    b2 = -crossing / J
    b = (1 if sign >= 0 else -1) * np.sqrt(b2)
    return CracktipFactor(b=float(b), b2=float(b2), error=abs(b2 - 2.0 / np.pi), nodes=nodes)


# magic formula ---------------------------------------------------------------

def _graded_edges(length, first):
    """Panel edges on [0, length] with widths doubling from ``first``."""
    edges = [0.0]
    w = first
    while edges[-1] < length:
        edges.append(min(length, edges[-1] + w))
        w *= 2.0
    return np.asarray(edges)


def _ray_integral(c, e, z0, T, n_gauss=20):
    """int_0^T dt / (c + t e - z0)^2 by Gauss-Legendre panels graded away from the point nearest z0."""
    tstar = float(np.clip(((z0 - c) * np.conj(e)).real, 0.0, T))
    first = max(abs(c + tstar * e - z0), 1e-12)
    xg, wg = gauss_legendre(n_gauss)
    total = 0.0 + 0.0j
    for length, sgn in ((T - tstar, 1.0), (tstar, -1.0)):
        if length <= 0:
            continue
        edges = _graded_edges(length, first)
        lo, hi = edges[:-1, None], edges[1:, None]
        s = 0.5 * (hi - lo) * xg + 0.5 * (hi + lo)
        total += np.sum(0.5 * (hi - lo) * wg / (c + (tstar + sgn * s) * e - z0) ** 2)
    return total


def magic_formula_residual(m: ModelMinimizer, z0: complex, R: float = 1e4) -> IdentityResidual:
    """(du/dz)^2(z0) against -(1/8 pi) int_K dH^1(w) / (w - z0)^2.

    K is integrated numerically on its part inside B_R(0) and the rest of each
    ray is added in closed form, 1 / (e (c + T e - z0)).
    """
    z0 = complex(z0)
    p0 = np.array([z0.real, z0.imag])
    if m.kind != "constant" and float(m.distance_to_K(p0)[0]) <= 1e-6:
        raise TooCloseToK(f"z0 = {z0} is within 1e-6 of K")
    if not R > 10 * abs(z0):
        raise ValueError("the truncation radius must exceed 10 |z0|")
    _, g = m.eval(p0)
    dudz = 0.5 * complex(g[0], -g[1])
    lhs = dudz * dudz
    c = complex(*m.center)
    trunc = 0.0 + 0.0j
    tail = 0.0 + 0.0j
    trunc2 = 0.0 + 0.0j
    for d in m.arm_directions():
        e = complex(*d)
        # T such that |c + T e| = R
        b = (c * np.conj(e)).real
        T = -b + np.sqrt(b * b - abs(c) ** 2 + R * R)
        T2 = -b + np.sqrt(b * b - abs(c) ** 2 + 4 * R * R)
        I = _ray_integral(c, e, z0, T)
        trunc += I
        trunc2 += I + _ray_integral(c + T * e, e, z0, T2 - T)
        tail += 1.0 / (e * (c + T * e - z0))
    bound = 2.0 / (8 * np.pi * (R - abs(z0)))
    change = abs(trunc2 - trunc) / (8 * np.pi)
    if not change <= bound:
        raise AssertionError(f"truncation change {change:.3e} exceeds the analytic tail bound {bound:.3e}")
    rhs = -(trunc + tail) / (8 * np.pi)
    res = IdentityResidual("magic", 0.0, 0.0, {"truncated": -trunc / (8 * np.pi), "tail": -tail / (8 * np.pi),
                                               "doubling_change": change, "tail_bound": bound})
    res.lhs, res.rhs = lhs, rhs
    return res


# Euler-Lagrange ----------------------------------------------------------------

@dataclass
class ELResiduals:
    points: np.ndarray
    curvature: np.ndarray
    bulk: np.ndarray  # (n, 2): + and - side
    neumann: np.ndarray  # (n, 2)
    curvature_residual: np.ndarray

    @property
    def max_neumann(self) -> float:
        return float(np.max(np.abs(self.neumann)))

    @property
    def max_curvature(self) -> float:
        return float(np.max(np.abs(self.curvature_residual)))

    @property
    def max_bulk(self) -> float:
        return float(np.max(np.abs(self.bulk)))


def _grid_laplacian_near(p: PairView, q, nu, side):
    """Five-point Laplacian at the closest node whose stencil stays on one side and unmasked."""
    f = p.u
    h = f.h
    ny, nx = f.shape
    c = np.round((q - f.origin) / h).astype(int)
    best = None
    for dj in range(-4, 5):
        for di in range(-4, 5):
            i, j = c[0] + di, c[1] + dj
            if not (1 <= i < nx - 1 and 1 <= j < ny - 1):
                continue
            st = [(j, i), (j, i + 1), (j, i - 1), (j + 1, i), (j - 1, i)]
            P = np.array([f.origin + h * np.array([b, a]) for a, b in st])
            if np.any(side * ((P - q) @ nu) <= 1e-9 * h):
                continue
            if f.mask is not None and any(f.mask[a, b] for a, b in st):
                continue
            dist = np.linalg.norm(P[0] - q)
            if best is None or dist < best[0]:
                best = (dist, st, P[0])
    if best is None:
        raise NotAJumpArc("no one-sided Laplacian stencil near the arc")
    _, st, x = best
    v = f.values
    (j, i) = st[0]
    lap = (v[j, i + 1] + v[j, i - 1] + v[j + 1, i] + v[j - 1, i] - 4 * v[j, i]) / h**2
    return lap, v[j, i], x


def euler_lagrange_residuals(p: PairView, arc) -> ELResiduals:
    """Residuals of the bulk, Neumann and curvature conditions at interior arc vertices."""
    arc = np.asarray(arc, dtype=float)
    if len(arc) < 3:
        raise NotAJumpArc("an arc needs at least three vertices")
    kappa = curvature_profile(JumpSet((arc,)))[0][1:-1]
    e = vertex_tangents(arc)[1:-1]
    nu = perp(e)
    q = arc[1:-1]
    up, gp, um, gm = p.trace(q, nu)
    if not (np.all(np.isfinite(gp)) and np.all(np.isfinite(gm))):
        raise NotAJumpArc("one-sided gradients are singular on the arc")
    neumann = np.stack([np.einsum("ni,ni->n", gp, nu), np.einsum("ni,ni->n", gm, nu)], axis=1)
    gK = p.g_at(q)
    curv_res = kappa + ((gp**2).sum(1) - (gm**2).sum(1)) + p.lam * ((up - gK) ** 2 - (um - gK) ** 2)
    bulk = np.zeros((len(q), 2))
    for k in range(len(q)):
        for s, side in enumerate((1, -1)):
            if p.is_model:
                x = q[k] + side * 1e-3 * nu[k]
                try:
                    u, _ = p.model.eval(x)
                except OnJumpSet:
                    continue
                bulk[k, s] = 0.0 - p.lam * (u - p.g_at(x)[0])
            else:
                lap, u, x = _grid_laplacian_near(p, q[k], nu[k], side)
                bulk[k, s] = lap - p.lam * (u - p.g_at(x)[0])
    return ELResiduals(points=q, curvature=kappa, bulk=bulk, neumann=neumann, curvature_residual=curv_res)


# weak L4 -----------------------------------------------------------------------

@dataclass
class LWeakProfile:
    M: np.ndarray
    measure: np.ndarray

    @property
    def product(self) -> np.ndarray:
        return self.M * self.measure

    @property
    def sup(self) -> float:
        return float(self.product.max()) if len(self.M) else 0.0


def lweak_profile(p: PairView, U: Disk, M_grid) -> LWeakProfile:
    """Areas of the superlevel sets {|grad u|^4 >= M} inside U."""
    M = np.asarray(M_grid, dtype=float)
    if p.is_model:
        m = p.model
        if m.kind != "cracktip":
            return LWeakProfile(M, np.zeros(len(M)))
        # |grad u|^4 = b^4 / (16 rho^2) is radial about the tip
        b4 = m.params["b"] ** 4
        meas = np.empty(len(M))
        pts = disk_breakpoints(m.center, U)
        for k, Mk in enumerate(M):
            rho_m = np.sqrt(b4 / (16.0 * Mk)) if Mk > 0 else np.inf

            def area(phi):
                r0, r1 = ray_chord(m.center, U, np.array([phi]))
                lo, hi = min(r0[0], rho_m), min(r1[0], rho_m)
                return 0.5 * (hi * hi - lo * lo)

            meas[k] = quad(area, 0.0, TWO_PI, points=pts or None, limit=400, epsabs=1e-15, epsrel=1e-12)[0]
        return LWeakProfile(M, meas)
    p.check_domain(U)
    h = p.u.h
    n = int(np.ceil(2 * U.radius / h)) * 2
    t = (np.arange(n) + 0.5) / n
    X, Y = np.meshgrid(U.center[0] - U.radius + 2 * U.radius * t, U.center[1] - U.radius + 2 * U.radius * t)
    pts = np.stack([X.ravel(), Y.ravel()], axis=1)
    pts = pts[np.linalg.norm(pts - U.center, axis=1) < U.radius]
    try:
        _, g = p.eval(pts)
    except OnJumpSet:
        from .geometry import point_segment_distance

        pts = pts[point_segment_distance(pts, p.K.segments())[0] > 1e-9]
        _, g = p.eval(pts)
    g4 = ((g**2).sum(1)) ** 2
    cell = (2 * U.radius / n) ** 2
    meas = np.array([(g4 >= Mk).sum() * cell for Mk in M])
    return LWeakProfile(M, meas)
