"""Elementary global minimizers in closed form.

Every model is stored in a canonical frame and moved by a pose (rotation
angle ``theta`` and a ``center``).  Canonical frames:

* ``pure-jump``: K is the x-axis, sector 0 is the upper half plane.
* ``triple-junction``: three arms at angles 0, 2pi/3, 4pi/3; sector i lies
  between arm i and arm i+1.
* ``cracktip``: K is the positive x-axis with the tip at the origin and
  u = b sqrt(rho) cos(phi/2), phi in (0, 2pi).
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

from .errors import OnJumpSet
from .geometry import JumpSet, perp, rotation

KINDS = ("constant", "pure-jump", "triple-junction", "cracktip")
CRACKTIP_B = float(np.sqrt(2.0 / np.pi))
ON_K_TOL = 1e-12
TWO_PI = 2.0 * np.pi

_ARMS = {
    "constant": (),
    "pure-jump": (0.0, np.pi),
    "triple-junction": (0.0, TWO_PI / 3.0, 2.0 * TWO_PI / 3.0),
    "cracktip": (0.0,),
}

_DEFAULT_PARAMS = {
    "constant": {"value": 0.0},
    "pure-jump": {"values": [1.0, 0.0]},
    "triple-junction": {"values": [0.0, 1.0, 2.0]},
    "cracktip": {"b": CRACKTIP_B, "sign": 1, "critical": True},
}


@dataclass(frozen=True, eq=False)
class ModelMinimizer:
    kind: str
    theta: float = 0.0
    center: np.ndarray = field(default_factory=lambda: np.zeros(2))
    params: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown model kind {self.kind!r}; expected one of {KINDS}")
        params = dict(_DEFAULT_PARAMS[self.kind])
        params.update(self.params or {})
        if self.kind == "cracktip":
            params["sign"] = 1 if params.get("sign", 1) >= 0 else -1
            if params.get("critical", False) and not np.isclose(params["b"] ** 2, 2.0 / np.pi, rtol=1e-12):
                raise ValueError("a critical cracktip needs b^2 = 2/pi")
        object.__setattr__(self, "params", params)
        object.__setattr__(self, "center", np.asarray(self.center, dtype=float).reshape(2))
        object.__setattr__(self, "theta", float(self.theta) % TWO_PI)

    # construction helpers
    @classmethod
    def cracktip(cls, theta=0.0, center=(0.0, 0.0), sign=1, b=None):
        params = {"sign": sign}
        if b is not None:
            params.update(b=float(b), critical=bool(np.isclose(b * b, 2 / np.pi, rtol=1e-12)))
        return cls("cracktip", theta, np.asarray(center, float), params)

    @classmethod
    def pure_jump(cls, theta=0.0, center=(0.0, 0.0), values=(1.0, 0.0)):
        return cls("pure-jump", theta, np.asarray(center, float), {"values": list(values)})

    @classmethod
    def triple_junction(cls, theta=0.0, center=(0.0, 0.0), values=(0.0, 1.0, 2.0)):
        return cls("triple-junction", theta, np.asarray(center, float), {"values": list(values)})

    @classmethod
    def constant(cls, value=0.0):
        return cls("constant", 0.0, np.zeros(2), {"value": float(value)})

    # frames
    @property
    def arm_angles(self) -> tuple:
        """Local angles of the rays forming K."""
        return _ARMS[self.kind]

    def arm_directions(self) -> np.ndarray:
        a = np.asarray(self.arm_angles) + self.theta
        return np.stack([np.cos(a), np.sin(a)], axis=-1).reshape(-1, 2)

    def to_local(self, p) -> np.ndarray:
        p = np.asarray(p, dtype=float)
        return (p - self.center) @ rotation(self.theta)

    def polar(self, p):
        y = self.to_local(p)
        rho = np.hypot(y[..., 0], y[..., 1])
        phi = np.mod(np.arctan2(y[..., 1], y[..., 0]), TWO_PI)
        return rho, phi

    def distance_to_K(self, p) -> np.ndarray:
        y = np.atleast_2d(self.to_local(p))
        if self.kind == "constant":
            return np.full(len(y), np.inf)
        d = np.full(len(y), np.inf)
        for a in self.arm_angles:
            e = np.array([np.cos(a), np.sin(a)])
            s = np.clip(y @ e, 0.0, None)
            d = np.minimum(d, np.linalg.norm(y - s[:, None] * e, axis=1))
        return d

    def on_jump_set(self, p, tol=ON_K_TOL) -> np.ndarray:
        return self.distance_to_K(p) <= tol

    # evaluation
    def _sector_values(self):
        if self.kind == "constant":
            return np.array([self.params["value"]], dtype=float)
        return np.asarray(self.params["values"], dtype=float)

    def _local_eval(self, rho, phi):
        """Value and local-frame gradient given exact polar data."""
        rho = np.asarray(rho, dtype=float)
        phi = np.asarray(phi, dtype=float)
        if self.kind == "cracktip":
            b = self.params["sign"] * self.params["b"]
            sq = np.sqrt(rho)
            val = b * sq * np.cos(phi / 2)
            with np.errstate(divide="ignore", invalid="ignore"):
                amp = b / (2.0 * sq)
                grad = amp[..., None] * np.stack([np.cos(phi / 2), np.sin(phi / 2)], axis=-1)
            return val, grad
        vals = self._sector_values()
        if self.kind == "constant":
            idx = np.zeros(np.shape(phi), dtype=int)
        else:
            bounds = np.asarray(self.arm_angles)
            idx = (np.searchsorted(bounds, phi, side="right") - 1) % len(bounds)
        return vals[idx], np.zeros(np.shape(phi) + (2,))

    def eval(self, p):
        """Exact u and gradient at points off K; raises OnJumpSet on K."""
        p = np.asarray(p, dtype=float)
        single = p.ndim == 1
        pts = np.atleast_2d(p)
        if np.any(self.on_jump_set(pts)):
            raise OnJumpSet("evaluation point lies on the jump set")
        rho, phi = self.polar(pts)
        val, g = self._local_eval(rho, phi)
        g = g @ rotation(self.theta).T
        return (val[0], g[0]) if single else (val, g)

    def sample(self, p) -> np.ndarray:
        """u at arbitrary points, for grid sampling.

        Points on K get the limit from the counter-clockwise side of the arm
        (polar angle just above the arm's), so no point is rejected.
        """
        rho, phi = self.polar(np.atleast_2d(np.asarray(p, dtype=float)))
        return self._local_eval(rho, phi)[0]

    def value(self, p):
        return self.eval(p)[0]

    def gradient(self, p):
        return self.eval(p)[1]

    def laplacian(self, p):
        """All models are harmonic off K."""
        self.eval(p)
        return np.zeros(np.shape(np.atleast_2d(p))[0]) if np.ndim(p) > 1 else 0.0

    def trace(self, p, nu):
        """One-sided limits (u+, grad u+, u-, grad u-) at points of K.

        The + side is the one ``nu`` points to.
        """
        pts = np.atleast_2d(np.asarray(p, dtype=float))
        nus = np.broadcast_to(np.asarray(nu, dtype=float), pts.shape)
        rho, phi = self.polar(pts)
        nu_loc = nus @ rotation(self.theta)
        arms = np.asarray(self.arm_angles)
        phi_plus = phi.copy()
        phi_minus = phi.copy()
        for i in range(len(pts)):
            if self.kind == "constant":
                continue
            k = int(np.argmin(np.abs(np.angle(np.exp(1j * (phi[i] - arms))))))
            a = arms[k]
            left = nu_loc[i] @ np.array([-np.sin(a), np.cos(a)]) > 0
            after = a  # limit from the sector starting at arm k
            before = a if a > 0 else TWO_PI  # limit from the sector ending at arm k
            if self.kind != "cracktip":
                # sector index chosen by nudging inside the sector
                after, before = a + 1e-9, (a if a > 0 else TWO_PI) - 1e-9
            phi_plus[i], phi_minus[i] = (after, before) if left else (before, after)
        R = rotation(self.theta).T
        up, gp = self._local_eval(rho, phi_plus)
        um, gm = self._local_eval(rho, phi_minus)
        return up, gp @ R, um, gm @ R

    # derived objects
    def jumpset(self, radius: float) -> JumpSet:
        """K clipped to the closed disk of the given radius around the center."""
        chains = []
        dirs = self.arm_directions()
        if self.kind == "pure-jump":
            chains.append(np.array([self.center - radius * dirs[0], self.center + radius * dirs[0]]))
        else:
            for d in dirs:
                chains.append(np.array([self.center, self.center + radius * d]))
        return JumpSet(tuple(chains))

    def ray_segments(self, radius: float) -> np.ndarray:
        dirs = self.arm_directions()
        return np.stack([np.broadcast_to(self.center, dirs.shape), self.center + radius * dirs], axis=1)

    def moved(self, theta=0.0, translation=(0.0, 0.0)) -> "ModelMinimizer":
        """Image under x -> R_theta x + translation."""
        c = rotation(theta) @ self.center + np.asarray(translation, float)
        return ModelMinimizer(self.kind, self.theta + theta, c, dict(self.params))

    def rescale(self, x, r: float) -> "ModelMinimizer":
        """Pair (K_{x,r}, u_{x,r}) with u_{x,r}(y) = r^{-1/2} u(x + r y)."""
        if not r > 0:
            raise ValueError("rescaling radius must be positive")
        c = (self.center - np.asarray(x, float)) / r
        params = dict(self.params)
        s = r ** -0.5
        if self.kind == "constant":
            params["value"] = s * params["value"]
        elif self.kind in ("pure-jump", "triple-junction"):
            params["values"] = [s * v for v in params["values"]]
        # the cracktip is 1/2-homogeneous about its tip: b is unchanged
        return ModelMinimizer(self.kind, self.theta, c, params)

    def conjugate(self) -> "HarmonicConjugate":
        return HarmonicConjugate(self)

    # serialization
    def to_dict(self) -> dict:
        return {"kind": self.kind, "theta": self.theta, "center": self.center.tolist(), "params": self.params}

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True)

    @classmethod
    def from_dict(cls, doc: dict) -> "ModelMinimizer":
        return cls(doc["kind"], doc.get("theta", 0.0), np.asarray(doc.get("center", (0.0, 0.0)), float),
                   dict(doc.get("params", {})))

    @classmethod
    def from_json(cls, text: str) -> "ModelMinimizer":
        return cls.from_dict(json.loads(text))


@dataclass(frozen=True, eq=False)
class HarmonicConjugate:
    """The conjugate v with grad v = (grad u)^perp, normalised by v = 0 on K near the tip."""

    model: ModelMinimizer

    def eval(self, p):
        m = self.model
        p = np.asarray(p, dtype=float)
        single = p.ndim == 1
        pts = np.atleast_2d(p)
        if m.kind != "cracktip":
            # piecewise constant models: u is locally constant, so v is too
            v, g = np.zeros(len(pts)), np.zeros((len(pts), 2))
        else:
            rho, phi = m.polar(pts)
            if np.any(rho <= ON_K_TOL):
                raise OnJumpSet("the conjugate is not differentiable at the tip")
            b = m.params["sign"] * m.params["b"]
            v = b * np.sqrt(rho) * np.sin(phi / 2)
            _, g = m._local_eval(rho, phi)
            g = perp(g) @ rotation(m.theta).T
        return (v[0], g[0]) if single else (v, g)

    def value(self, p):
        return self.eval(p)[0]

    def gradient(self, p):
        return self.eval(p)[1]
