"""Polyline jump sets and the elementary measurements made on them."""
from __future__ import annotations

import json
from dataclasses import dataclass
from typing import Sequence

import numpy as np
from scipy.spatial import cKDTree

from .errors import EmptySet, TangentialCrossing

TANGENTIAL_TOL = 1e-6


def rotation(theta: float) -> np.ndarray:
    c, s = np.cos(theta), np.sin(theta)
    return np.array([[c, -s], [s, c]])


def perp(v: np.ndarray) -> np.ndarray:
    """Counterclockwise rotation by 90 degrees (last axis)."""
    v = np.asarray(v, dtype=float)
    return np.stack([-v[..., 1], v[..., 0]], axis=-1)


@dataclass(frozen=True)
class Disk:
    center: np.ndarray
    radius: float

    def __post_init__(self):
        object.__setattr__(self, "center", np.asarray(self.center, dtype=float).reshape(2))
        if not self.radius > 0:
            raise ValueError(f"disk radius must be positive, got {self.radius}")
        object.__setattr__(self, "radius", float(self.radius))

    def contains(self, pts, closed=True) -> np.ndarray:
        d = np.linalg.norm(np.atleast_2d(pts) - self.center, axis=-1)
        return d <= self.radius if closed else d < self.radius

    def scaled(self, factor: float) -> "Disk":
        return Disk(self.center, self.radius * factor)


@dataclass(frozen=True)
class CircleCrossing:
    point: np.ndarray
    tangent: np.ndarray
    cosine: float
    chain: int = -1


@dataclass(frozen=True, eq=False)
class JumpSet:
    """Finite union of polyline chains; the discrete stand-in for K."""

    chains: tuple
    closed: tuple = ()

    def __post_init__(self):
        chains = tuple(np.asarray(c, dtype=float).reshape(-1, 2) for c in self.chains)
        closed = tuple(bool(c) for c in self.closed) if self.closed else (False,) * len(chains)
        if len(closed) != len(chains):
            raise ValueError("one closed flag per chain is required")
        for c in chains:
            if len(c) < 2:
                raise ValueError("every chain needs at least two vertices")
            if np.any(np.linalg.norm(np.diff(c, axis=0), axis=1) == 0.0):
                raise ValueError("consecutive vertices must be distinct")
        object.__setattr__(self, "chains", chains)
        object.__setattr__(self, "closed", closed)

    @classmethod
    def empty(cls) -> "JumpSet":
        return cls(chains=(), closed=())

    @classmethod
    def from_segments(cls, segments: np.ndarray) -> "JumpSet":
        segments = np.asarray(segments, dtype=float).reshape(-1, 2, 2)
        keep = np.linalg.norm(segments[:, 1] - segments[:, 0], axis=1) > 0
        return cls(chains=tuple(s for s in segments[keep]))

    def __len__(self):
        return len(self.chains)

    @property
    def is_empty(self) -> bool:
        return len(self.chains) == 0

    def segments(self) -> np.ndarray:
        """All segments as an (m, 2, 2) array, closing segments included."""
        out = []
        for c, cl in zip(self.chains, self.closed):
            pts = np.vstack([c, c[:1]]) if cl else c
            out.append(np.stack([pts[:-1], pts[1:]], axis=1))
        if not out:
            return np.zeros((0, 2, 2))
        return np.concatenate(out, axis=0)

    def segment_chain_index(self) -> np.ndarray:
        idx = []
        for i, (c, cl) in enumerate(zip(self.chains, self.closed)):
            idx.extend([i] * (len(c) if cl else len(c) - 1))
        return np.asarray(idx, dtype=int)

    @property
    def length(self) -> float:
        s = self.segments()
        return float(np.linalg.norm(s[:, 1] - s[:, 0], axis=1).sum())

    def transformed(self, theta=0.0, translation=(0.0, 0.0), scale=1.0) -> "JumpSet":
        """Image under y -> scale * R_theta y + translation."""
        R = rotation(theta)
        t = np.asarray(translation, dtype=float)
        return JumpSet(tuple(scale * c @ R.T + t for c in self.chains), self.closed)

    def points(self, spacing: float) -> np.ndarray:
        return sample_segments(self.segments(), spacing)

    def to_json(self) -> str:
        return json.dumps(
            {"chains": [c.tolist() for c in self.chains], "closed": list(self.closed)},
            sort_keys=True,
        )

    @classmethod
    def from_json(cls, text: str) -> "JumpSet":
        doc = json.loads(text)
        return cls(chains=tuple(doc["chains"]), closed=tuple(doc.get("closed", ())))


def _segment_circle_params(A, B, center, radius):
    """Roots s of |A + s(B-A) - c|^2 = r^2 for each segment (nan if none)."""
    d = B - A
    f = A - center
    a = np.einsum("ij,ij->i", d, d)
    b = 2.0 * np.einsum("ij,ij->i", f, d)
    c = np.einsum("ij,ij->i", f, f) - radius**2
    disc = b * b - 4 * a * c
    sq = np.sqrt(np.where(disc >= 0, disc, np.nan))
    # cancellation-free form of the two roots
    q = -0.5 * (b + np.copysign(sq, b))
    with np.errstate(divide="ignore", invalid="ignore"):
        r1 = q / a
        r2 = c / q
    lo = np.fmin(r1, r2)
    hi = np.fmax(r1, r2)
    both_nan = np.isnan(sq)
    lo[both_nan] = np.nan
    hi[both_nan] = np.nan
    return lo, hi


def clip_segments(segments: np.ndarray, disk: Disk) -> np.ndarray:
    """Exact clipping of segments to the closed disk."""
    segments = np.asarray(segments, dtype=float).reshape(-1, 2, 2)
    if len(segments) == 0:
        return segments
    A, B = segments[:, 0], segments[:, 1]
    lo, hi = _segment_circle_params(A, B, disk.center, disk.radius)
    s0 = np.clip(lo, 0.0, 1.0)
    s1 = np.clip(hi, 0.0, 1.0)
    keep = np.isfinite(lo) & (s1 > s0)
    d = B - A
    P0 = A[keep] + s0[keep, None] * d[keep]
    P1 = A[keep] + s1[keep, None] * d[keep]
    return np.stack([P0, P1], axis=1)


def sample_segments(segments: np.ndarray, spacing: float) -> np.ndarray:
    """Points on every segment, endpoints included, gaps no larger than ``spacing``."""
    segments = np.asarray(segments, dtype=float).reshape(-1, 2, 2)
    if len(segments) == 0:
        return np.zeros((0, 2))
    out = []
    for a, b in segments:
        n = max(1, int(np.ceil(np.linalg.norm(b - a) / spacing)))
        t = np.linspace(0.0, 1.0, n + 1)[:, None]
        out.append(a + t * (b - a))
    return np.concatenate(out, axis=0)


def length_in_disk(J: JumpSet, D: Disk) -> float:
    """H^1(K ∩ D) by exact segment clipping."""
    clipped = clip_segments(J.segments(), D)
    if len(clipped) == 0:
        return 0.0
    return float(np.linalg.norm(clipped[:, 1] - clipped[:, 0], axis=1).sum())


def circle_crossings(J: JumpSet, D: Disk, tol: float = TANGENTIAL_TOL) -> list[CircleCrossing]:
    """Transversal intersections of K with the circle bounding D."""
    crossings: list[CircleCrossing] = []
    chain_idx = J.segment_chain_index()
    segs = J.segments()
    if len(segs) == 0:
        return crossings
    A, B = segs[:, 0], segs[:, 1]
    lo, hi = _segment_circle_params(A, B, D.center, D.radius)
    # last segment of an open chain owns its final vertex
    last = np.zeros(len(segs), dtype=bool)
    pos = 0
    for c, cl in zip(J.chains, J.closed):
        n = len(c) if cl else len(c) - 1
        if not cl:
            last[pos + n - 1] = True
        pos += n
    for i in range(len(segs)):
        d = B[i] - A[i]
        L = np.linalg.norm(d)
        e = d / L
        for s in (lo[i], hi[i]):
            if not np.isfinite(s):
                continue
            if s < 0.0 or s > 1.0 or (s == 1.0 and not last[i]):
                continue
            p = A[i] + s * d
            n = (p - D.center) / D.radius
            cos = float(e @ n)
            if abs(cos) < tol:
                raise TangentialCrossing(
                    f"segment {i} meets the circle of radius {D.radius} at incidence {cos:.2e}"
                )
            t = e if cos > 0 else -e
            crossings.append(CircleCrossing(point=p, tangent=t, cosine=abs(cos), chain=int(chain_idx[i])))
    return crossings


def hausdorff_distance(A, B) -> float:
    A = np.asarray(A, dtype=float).reshape(-1, 2)
    B = np.asarray(B, dtype=float).reshape(-1, 2)
    if len(A) == 0 or len(B) == 0:
        raise EmptySet("Hausdorff distance needs two non-empty samples")
    dab = cKDTree(B).query(A)[0].max()
    dba = cKDTree(A).query(B)[0].max()
    return float(max(dab, dba))


def curvature_profile(J: JumpSet, collinear_tol: float = 1e-12, check_spacing: bool = True) -> list[np.ndarray]:
    """Three-point (circumscribed circle) curvature at every interior vertex.

    The sign follows the normal obtained by rotating the chain tangent by +90
    degrees, so a counterclockwise circle has positive curvature. Open chains
    get ``nan`` at their two endpoints; collinear triples give 0.
    """
    out = []
    for c, cl in zip(J.chains, J.closed):
        if cl:
            p0, p1, p2 = np.roll(c, 1, axis=0), c, np.roll(c, -1, axis=0)
        else:
            p0, p1, p2 = c[:-2], c[1:-1], c[2:]
        a = p1 - p0
        b = p2 - p1
        la = np.linalg.norm(a, axis=1)
        lb = np.linalg.norm(b, axis=1)
        if check_spacing and len(la):
            ratio = la / lb
            if np.any((ratio < 0.2) | (ratio > 5.0)):
                raise ValueError("curvature needs roughly equispaced vertices (adjacent ratio in [0.2, 5])")
        lc = np.linalg.norm(p2 - p0, axis=1)
        cross = a[:, 0] * b[:, 1] - a[:, 1] * b[:, 0]
        denom = la * lb * lc
        k = np.zeros(len(p1))
        ok = np.abs(cross) > collinear_tol * la * lb
        k[ok] = 2.0 * cross[ok] / denom[ok]
        if not cl:
            k = np.concatenate([[np.nan], k, [np.nan]])
        out.append(k)
    return out


def vertex_tangents(chain: np.ndarray, closed: bool = False) -> np.ndarray:
    """Unit tangents at vertices (central chord, one-sided at open ends)."""
    chain = np.asarray(chain, dtype=float)
    if closed:
        t = np.roll(chain, -1, axis=0) - np.roll(chain, 1, axis=0)
    else:
        t = np.empty_like(chain)
        t[1:-1] = chain[2:] - chain[:-2]
        t[0] = chain[1] - chain[0]
        t[-1] = chain[-1] - chain[-2]
    return t / np.linalg.norm(t, axis=1, keepdims=True)


def point_segment_distance(points: np.ndarray, segments: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Distance from each point to the union of segments and the index of the nearest one."""
    points = np.atleast_2d(np.asarray(points, dtype=float))
    segments = np.asarray(segments, dtype=float).reshape(-1, 2, 2)
    if len(segments) == 0:
        return np.full(len(points), np.inf), np.full(len(points), -1)
    A = segments[None, :, 0]
    d = segments[None, :, 1] - A
    w = points[:, None, :] - A
    dd = np.einsum("ijk,ijk->ij", d, d)
    s = np.clip(np.einsum("ijk,ijk->ij", w, d) / dd, 0.0, 1.0)
    diff = w - s[..., None] * d
    dist = np.linalg.norm(diff, axis=-1)
    j = np.argmin(dist, axis=1)
    return dist[np.arange(len(points)), j], j


def polyline(points: Sequence) -> JumpSet:
    return JumpSet(chains=(np.asarray(points, dtype=float),))
