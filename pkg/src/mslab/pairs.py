"""Admissible pairs (K, u) with fidelity datum g and weight lambda."""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Union

import numpy as np

from .errors import NotAJumpArc, OnJumpSet
from .fields import ScalarField
from .geometry import Disk, JumpSet, perp, point_segment_distance
from .models import ModelMinimizer

Datum = Union[float, ScalarField, Callable]

# nodes closer than this (in units of h) to K never enter a plain bilinear stencil
NEAR_K_CELLS = 1.5


@dataclass(frozen=True, eq=False)
class PairView:
    """Either an analytic model or a grid field with an explicit jump set."""

    model: ModelMinimizer | None = None
    u: ScalarField | None = None
    K: JumpSet | None = None
    g: Datum = 0.0
    lam: float = 0.0
    strict: bool = field(default=True, repr=False)
    _fits: dict = field(default_factory=dict, init=False, repr=False, compare=False)

    def __post_init__(self):
        if (self.model is None) == (self.u is None):
            raise ValueError("give exactly one of a model or a grid field")
        if self.u is not None and self.K is None:
            object.__setattr__(self, "K", JumpSet.empty())
        lam = float(self.lam)
        if lam < 0 or (self.strict and lam > 1):
            raise ValueError(f"lambda must lie in [0, 1], got {lam}")
        object.__setattr__(self, "lam", lam)
        if isinstance(self.g, (int, float, np.floating)):
            if not np.isfinite(self.g):
                raise ValueError("the datum g must be bounded")
            object.__setattr__(self, "g", float(self.g))

    @classmethod
    def of_model(cls, model: ModelMinimizer, g: Datum = 0.0, lam: float = 0.0) -> "PairView":
        return cls(model=model, g=g, lam=lam)

    @classmethod
    def of_field(cls, u: ScalarField, K: JumpSet, g: Datum = 0.0, lam: float = 0.0) -> "PairView":
        return cls(u=u, K=K, g=g, lam=lam)

    @property
    def is_model(self) -> bool:
        return self.model is not None

    @property
    def h(self) -> float:
        return 0.0 if self.is_model else self.u.h

    # geometry
    def jumpset(self, disk: Disk | None = None) -> JumpSet:
        if not self.is_model:
            return self.K
        if self.model.kind == "constant":
            return JumpSet.empty()
        reach = 10.0 if disk is None else np.linalg.norm(disk.center - self.model.center) + disk.radius + 1.0
        return self.model.jumpset(reach)

    def check_domain(self, disk: Disk):
        if not self.is_model:
            self.u.require_disk(disk.center, disk.radius)

    # datum
    def g_at(self, p) -> np.ndarray:
        p = np.atleast_2d(np.asarray(p, dtype=float))
        if isinstance(self.g, float):
            return np.full(len(p), self.g)
        if isinstance(self.g, ScalarField):
            return self.g.interpolate(p)
        return np.asarray(self.g(p), dtype=float).reshape(len(p))

    def g_sup(self, disk: Disk | None = None) -> float:
        if isinstance(self.g, float):
            return abs(self.g)
        if isinstance(self.g, ScalarField):
            return float(np.abs(self.g.values).max())
        # callable datum: sup sampled on a fine polar grid of the disk
        disk = disk or Disk((0.0, 0.0), 1.0)
        r, t = np.meshgrid(np.linspace(0, disk.radius, 201), np.linspace(0, 2 * np.pi, 401))
        pts = disk.center + np.stack([r.ravel() * np.cos(t.ravel()), r.ravel() * np.sin(t.ravel())], axis=1)
        return float(np.abs(self.g_at(pts)).max())

    # evaluation
    def eval(self, p):
        """u and grad u at points off K (vectorised over rows)."""
        if self.is_model:
            v, gr = self.model.eval(np.atleast_2d(p))
            return v, gr
        return self._field_eval(np.atleast_2d(np.asarray(p, dtype=float)))

    def trace(self, p, nu):
        """One-sided limits (u+, grad u+, u-, grad u-) on K; + is the side nu points to."""
        if self.is_model:
            return self.model.trace(p, nu)
        pts = np.atleast_2d(np.asarray(p, dtype=float))
        nus = np.broadcast_to(np.asarray(nu, dtype=float), pts.shape)
        up = np.empty(len(pts))
        um = np.empty(len(pts))
        gp = np.empty((len(pts), 2))
        gm = np.empty((len(pts), 2))
        for k, (q, n) in enumerate(zip(pts, nus)):
            up[k], gp[k] = self._side_fit(q, q, n, +1)
            um[k], gm[k] = self._side_fit(q, q, n, -1)
        return up, gp, um, gm

    def _field_eval(self, pts):
        f = self.u
        vals = f.interpolate(pts)
        grads = f.interpolate_gradient(pts)
        segs = self.K.segments()
        if len(segs):
            dist, idx = point_segment_distance(pts, segs)
        else:
            dist, idx = np.full(len(pts), np.inf), np.full(len(pts), -1)
        special = (dist < NEAR_K_CELLS * f.h) | ~f.cell_is_clean(pts)
        for k in np.flatnonzero(special):
            q = pts[k]
            if idx[k] >= 0 and dist[k] < 4 * f.h:
                a, b = segs[idx[k]]
                if dist[k] <= 1e-12 * max(1.0, f.h):
                    raise OnJumpSet("evaluation point lies on the jump set")
                t = b - a
                s = np.clip((q - a) @ t / (t @ t), 0.0, 1.0)
                foot = a + s * t
                nu = perp(t / np.linalg.norm(t))
                side = 1 if (q - foot) @ nu >= 0 else -1
                vals[k], grads[k] = self._side_fit(q, foot, nu, side)
            else:
                vals[k], grads[k] = self._side_fit(q, None, None, 0)
        return vals, grads

    def _side_fit(self, center, foot, nu, side):
        """Least-squares affine fit from unmasked nodes on one side of the local chord."""
        f = self.u
        h = f.h
        ny, nx = f.shape
        c = (center - f.origin) / h
        for reach in (2.5, 3.5, 5.0, 7.0):
            i0, i1 = int(np.floor(c[0] - reach)), int(np.ceil(c[0] + reach))
            j0, j1 = int(np.floor(c[1] - reach)), int(np.ceil(c[1] + reach))
            i0, j0 = max(i0, 0), max(j0, 0)
            i1, j1 = min(i1, nx - 1), min(j1, ny - 1)
            if i1 < i0 or j1 < j0:
                break
            I, J = np.meshgrid(np.arange(i0, i1 + 1), np.arange(j0, j1 + 1))
            P = f.origin + h * np.stack([I.ravel(), J.ravel()], axis=1)
            keep = np.linalg.norm(P - center, axis=1) <= reach * h
            if f.mask is not None:
                keep &= ~f.mask[J.ravel(), I.ravel()]
            if side != 0:
                keep &= side * ((P - foot) @ nu) > 1e-9 * h
            if keep.sum() >= 4:
                D = (P[keep] - center) / h
                A = np.column_stack([np.ones(len(D)), D])
                coef, _, rank, _ = np.linalg.lstsq(A, f.values[J.ravel(), I.ravel()][keep], rcond=None)
                if rank == 3:
                    return coef[0], coef[1:] / h
        raise NotAJumpArc("no one-sided stencil available near this point")

    # transformations
    def rescale(self, x, r: float) -> "PairView":
        """Blow-up (K_{x,r}, u_{x,r}); lambda becomes lambda r^2 and g becomes r^{-1/2} g(x + r .)."""
        x = np.asarray(x, dtype=float)
        s = r ** -0.5
        lam = self.lam * r * r
        if isinstance(self.g, float):
            g = s * self.g
        elif isinstance(self.g, ScalarField):
            g = ScalarField((self.g.origin - x) / r, self.g.h / r, s * self.g.values, self.g.mask)
        else:
            g0 = self.g
            g = lambda y: s * np.asarray(g0(x + r * np.atleast_2d(y)))  # noqa: E731
        if self.is_model:
            return PairView(model=self.model.rescale(x, r), g=g, lam=lam, strict=False)
        u = ScalarField((self.u.origin - x) / r, self.u.h / r, s * self.u.values, self.u.mask)
        K = self.K.transformed(0.0, -x / r, 1.0 / r) if not self.K.is_empty else self.K
        return PairView(u=u, K=K, g=g, lam=lam, strict=False)

    def moved(self, theta=0.0, translation=(0.0, 0.0)) -> "PairView":
        """Rigid motion of a model pair (the datum is transported along)."""
        if not self.is_model:
            raise NotImplementedError("rigid motions are only exact for analytic models")
        from .geometry import rotation

        R = rotation(theta)
        t = np.asarray(translation, dtype=float)
        g = self.g
        if callable(g) and not isinstance(g, (float, ScalarField)):
            g0 = g
            g = lambda y: g0((np.atleast_2d(y) - t) @ R)  # noqa: E731
        return PairView(model=self.model.moved(theta, t), g=g, lam=self.lam, strict=self.strict)


def as_pair(obj, g: Datum = 0.0, lam: float = 0.0) -> PairView:
    if isinstance(obj, PairView):
        return obj
    if isinstance(obj, ModelMinimizer):
        return PairView(model=obj, g=g, lam=lam)
    raise TypeError(f"cannot build a pair from {type(obj).__name__}")
