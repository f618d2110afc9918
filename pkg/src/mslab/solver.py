"""Phase-field (Ambrosio-Tortorelli) approximation of Mumford-Shah minimizers on images.

The discrete energy on an ny x nx node grid with spacing h is

    E_h(u, z) = sum_edges ((z_i^2 + z_j^2)/2 + delta) (u_i - u_j)^2
              + lam h^2 sum (u - g)^2
              + eps sum_edges (z_i - z_j)^2 + h^2/(4 eps) sum (1 - z)^2,

with natural (Neumann) boundary conditions.  It is quadratic in u for fixed
z and in z for fixed u, so alternating minimisation decreases it.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp
from scipy.ndimage import binary_dilation, label
from scipy.sparse.linalg import LinearOperator, cg
from skimage.measure import approximate_polygon
from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.utils.validation import check_is_fitted

from .errors import DomainTooSmall, NonmonotoneEnergy
from .fields import ScalarField
from .geometry import JumpSet

log = logging.getLogger(__name__)

DELTA_FACTOR = 1e-6  # delta = DELTA_FACTOR * eps
CG_RTOL = 1e-8
ENERGY_SLACK = 1e-12
MIN_CHAIN = 4.0  # extracted chains shorter than this many h are dropped


@dataclass
class PhaseFieldState:
    u: ScalarField
    z: ScalarField
    g: ScalarField
    eps: float
    lam: float
    energy_log: list = field(default_factory=list)
    sweeps: int = 0

    @property
    def h(self) -> float:
        return self.u.h

    @property
    def energy(self) -> float:
        return self.energy_log[-1]


# grid operators ------------------------------------------------------------------

def _edges(shape):
    """Index pairs (i, j) of horizontal and vertical grid edges."""
    ny, nx = shape
    idx = np.arange(ny * nx).reshape(ny, nx)
    a = np.concatenate([idx[:, :-1].ravel(), idx[:-1, :].ravel()])
    b = np.concatenate([idx[:, 1:].ravel(), idx[1:, :].ravel()])
    return a, b


def _weighted_laplacian(a, b, w, n):
    """Matrix of sum_e w_e (x_a - x_b)^2 / 2 ... i.e. the graph Laplacian with weights w."""
    data = np.concatenate([w, w, -w, -w])
    rows = np.concatenate([a, b, a, b])
    cols = np.concatenate([a, b, b, a])
    return sp.csr_matrix((data, (rows, cols)), shape=(n, n))


def _pcg(A, rhs, x0, rtol=CG_RTOL):
    d = A.diagonal()
    M = LinearOperator(A.shape, matvec=lambda r: r / d, dtype=float)
    x, info = cg(A, rhs, x0=x0, rtol=rtol, atol=0.0, maxiter=20 * A.shape[0], M=M)
    if info > 0:
        log.warning("CG stopped after %d iterations without reaching rtol=%g", info, rtol)
    return x


def discrete_energy(u, z, g, h, lam, eps, edges=None) -> float:
    a, b = edges if edges is not None else _edges(np.shape(g))
    u, z, g = (np.asarray(v, dtype=float).ravel() for v in (u, z, g))
    delta = DELTA_FACTOR * eps
    du = u[a] - u[b]
    dz = z[a] - z[b]
    return float((((z[a] ** 2 + z[b] ** 2) / 2 + delta) * du * du).sum()
                 + lam * h * h * ((u - g) ** 2).sum()
                 + eps * (dz * dz).sum() + h * h / (4 * eps) * ((1 - z) ** 2).sum())


def at_minimize(g: ScalarField, lam: float, eps: float, sweeps: int = 200, z0=None, u0=None,
                rtol: float = CG_RTOL, stop_tol: float = 0.0) -> PhaseFieldState:
    """Alternating exact minimisation in z and u, starting from u = g.

    Each sweep solves the z-problem and then the u-problem with conjugate
    gradients warm-started at the current iterate, so every step lowers the
    energy.  With ``stop_tol`` > 0 the sweeps stop once the relative energy
    decrease of a sweep falls below it.
    """
    h = g.h
    ny, nx = g.shape
    if not 0 < lam <= 1:
        raise ValueError(f"lambda must lie in (0, 1], got {lam}")
    if sweeps < 1:
        raise ValueError("need at least one sweep")
    if eps < 2 * h * (1 - 1e-12):
        raise ValueError("the phase-field width must be at least 2h")
    if min(nx, ny) < 8 or min(nx - 1, ny - 1) * h < 4 * eps:
        raise DomainTooSmall("the image must span at least 8 nodes and 4 phase-field widths")
    n = nx * ny
    gv = g.values.ravel()
    gmin, gmax = float(gv.min()), float(gv.max())
    a, b = _edges(g.shape)
    delta = DELTA_FACTOR * eps
    c = h * h / (4 * eps)
    L = _weighted_laplacian(a, b, np.ones(len(a)), n)
    u = gv.copy() if u0 is None else np.asarray(u0, dtype=float).ravel().copy()
    z = np.ones(n) if z0 is None else np.asarray(z0, dtype=float).ravel().copy()
    E = [discrete_energy(u, z, gv, h, lam, eps, (a, b))]
    done = 0
    for it in range(sweeps):
        # z-step: (diag(s) + eps L + c I) z = c
        du2 = (u[a] - u[b]) ** 2
        s = 0.5 * (np.bincount(a, du2, n) + np.bincount(b, du2, n))
        Az = (sp.diags(s + c) + eps * L).tocsr()
        z = np.clip(_pcg(Az, np.full(n, c), z, rtol), 0.0, 1.0)
        # u-step: (L_w + lam h^2 I) u = lam h^2 g
        w = 0.5 * (z[a] ** 2 + z[b] ** 2) + delta
        Au = (_weighted_laplacian(a, b, w, n) + sp.diags(np.full(n, lam * h * h))).tocsr()
        u = np.clip(_pcg(Au, lam * h * h * gv, u, rtol), gmin, gmax)
        E.append(discrete_energy(u, z, gv, h, lam, eps, (a, b)))
        done = it + 1
        if E[-1] > E[-2] + ENERGY_SLACK * max(1.0, abs(E[-2])):
            raise NonmonotoneEnergy(f"energy rose from {E[-2]!r} to {E[-1]!r} in sweep {done}")
        if stop_tol > 0 and E[-2] - E[-1] <= stop_tol * abs(E[-2]):
            break
    if np.abs(u).max() > np.abs(gv).max() + 1e-9:
        raise NonmonotoneEnergy("maximum principle violated by the u-step")
    U = ScalarField(g.origin, h, u.reshape(ny, nx))
    Z = ScalarField(g.origin, h, z.reshape(ny, nx))
    return PhaseFieldState(u=U, z=Z, g=g, eps=eps, lam=lam, energy_log=E, sweeps=done)


# jump set extraction -------------------------------------------------------------

# neighbour offsets, clockwise from the upper-left corner; bit k of a code is neighbour k
_NBRS = [(-1, -1), (-1, 0), (-1, 1), (0, 1), (1, 1), (1, 0), (1, -1), (0, -1)]


def _simple_point_tables():
    """Per 8-neighbourhood code: is the centre a simple point, and how many neighbours it has."""
    four = np.zeros((3, 3), dtype=bool)
    four[0, 1] = four[1, 0] = four[1, 2] = four[2, 1] = True
    simple = np.zeros(256, dtype=bool)
    count = np.zeros(256, dtype=int)
    for code in range(256):
        fg = np.zeros((3, 3), dtype=bool)
        for k, (dy, dx) in enumerate(_NBRS):
            fg[1 + dy, 1 + dx] = bool(code >> k & 1)
        count[code] = int(fg.sum())
        _, n8 = label(fg, structure=np.ones((3, 3)))
        bg = ~fg
        bg[1, 1] = False
        lab4, _ = label(bg)
        n4 = len(set(lab4[four].tolist()) - {0})
        simple[code] = n8 == 1 and n4 == 1
    return simple, count


_SIMPLE, _COUNT = _simple_point_tables()


def _code(B, r, c):
    code = 0
    for k, (dy, dx) in enumerate(_NBRS):
        if B[r + dy, c + dx]:
            code |= 1 << k
    return code


def ordered_thinning(band, z):
    """Homotopic thinning of ``band`` that removes high-z pixels first.

    Only simple points that are not curve ends are removed, so the result is
    a one-pixel-wide set with the topology of the band, lying along the
    valley of z.
    """
    B = np.pad(np.asarray(band, dtype=bool), 1)
    zp = np.pad(np.asarray(z, dtype=float), 1, constant_values=np.inf)
    pix = np.argwhere(B)
    pix = pix[np.argsort(-zp[pix[:, 0], pix[:, 1]], kind="stable")]
    todo = [tuple(p) for p in pix]
    while True:
        removed, kept = False, []
        for r, c in todo:
            code = _code(B, r, c)
            if _SIMPLE[code] and _COUNT[code] > 1:
                B[r, c] = False
                removed = True
            else:
                kept.append((r, c))
        todo = kept
        if not removed:
            break
    return B[1:-1, 1:-1]


def _skeleton_graph(skel):
    pix = {tuple(p) for p in np.argwhere(skel)}
    return {p: [(p[0] + dy, p[1] + dx) for dy, dx in _NBRS if (p[0] + dy, p[1] + dx) in pix] for p in pix}


def _prune_junction_clusters(adj):
    """Drop diagonal links that duplicate an L-shaped 4-path, so junctions are single pixels."""
    for p in list(adj):
        for q in list(adj[p]):
            if abs(p[0] - q[0]) == 1 and abs(p[1] - q[1]) == 1:
                if (p[0], q[1]) in adj or (q[0], p[1]) in adj:
                    adj[p].remove(q)
                    adj[q].remove(p)
    return adj


def _trace_chains(adj):
    """Split a pixel graph into paths between nodes of degree != 2, plus closed loops."""
    nodes = {p for p, nb in adj.items() if len(nb) != 2}
    seen = set()
    chains = []

    def walk(start, nxt):
        path = [start, nxt]
        seen.add(frozenset((start, nxt)))
        prev, cur = start, nxt
        while cur not in nodes and cur != start:
            cand = [q for q in adj[cur] if q != prev and frozenset((cur, q)) not in seen]
            if not cand:
                break
            prev, cur = cur, cand[0]
            seen.add(frozenset((prev, cur)))
            path.append(cur)
        return path

    for p in sorted(nodes):
        for q in adj[p]:
            if frozenset((p, q)) not in seen:
                chains.append(walk(p, q))
    for p in sorted(adj):
        for q in adj[p]:
            if frozenset((p, q)) not in seen:
                chains.append(walk(p, q))
    return chains


def _path_length(path):
    return float(np.linalg.norm(np.diff(np.asarray(path, dtype=float), axis=0), axis=1).sum())


def _prune_and_merge(chains, adj, min_len):
    """Remove short dangling branches, then join chains through nodes left with two ends."""
    chains = [list(c) for c in chains]
    while True:
        deg = {}
        for c in chains:
            if c[0] != c[-1]:
                for e in (c[0], c[-1]):
                    deg[e] = deg.get(e, 0) + 1
        dangling = [k for k, c in enumerate(chains)
                    if c[0] != c[-1] and _path_length(c) < min_len
                    and (deg[c[0]] == 1) != (deg[c[-1]] == 1)]
        if not dangling:
            break
        drop = min(dangling, key=lambda k: _path_length(chains[k]))
        chains.pop(drop)
        # join the two chains that now meet at a node of degree two
        merged = True
        while merged:
            merged = False
            ends = {}
            for k, c in enumerate(chains):
                if c[0] != c[-1]:
                    ends.setdefault(c[0], []).append(k)
                    ends.setdefault(c[-1], []).append(k)
            for node, ks in ends.items():
                if len(ks) == 2 and ks[0] != ks[1]:
                    i, j = ks
                    a, b = chains[i], chains[j]
                    a = a if a[-1] == node else a[::-1]
                    b = b if b[0] == node else b[::-1]
                    chains[i] = a + b[1:]
                    chains.pop(j)
                    merged = True
                    break
    return chains


def extract_jumpset(state: PhaseFieldState, threshold: float = 0.5, min_length: float | None = None,
                    simplify: float = 1.0) -> JumpSet:
    """Centre lines of the crack band {z < threshold} as polylines.

    The band is thinned along the valley of z to a one-pixel curve network,
    split into chains at end points and junctions; dangling branches shorter
    than ``min_length`` (default 4h) are removed, and each chain is
    simplified with tolerance ``simplify`` pixels.
    """
    if not 0 < threshold < 1:
        raise ValueError("threshold must lie in (0, 1)")
    z = state.z
    h = z.h
    band = z.values < threshold
    if not band.any():
        return JumpSet.empty()
    # reflect across the border (consistent with the Neumann condition) so the
    # centre line runs all the way out instead of stopping short of the edge
    pad = int(np.ceil(3 * state.eps / h)) + 2
    thin = ordered_thinning(np.pad(band, pad, mode="symmetric"),
                            np.pad(z.values, pad, mode="symmetric"))[pad:-pad, pad:-pad]
    adj = _prune_junction_clusters(_skeleton_graph(thin))
    min_px = (MIN_CHAIN * h if min_length is None else min_length) / h
    out, closed = [], []
    for path in _prune_and_merge(_trace_chains(adj), adj, min_px):
        loop = len(path) > 3 and path[0] == path[-1]
        if _path_length(path) < min_px:
            continue
        pts = np.array(path, dtype=float)
        if simplify > 0:
            pts = approximate_polygon(pts, tolerance=simplify)
        if loop:
            pts = pts[:-1]
            if len(pts) < 3:
                continue
        out.append(z.origin + h * pts[:, ::-1])
        closed.append(loop)
    if not out:
        return JumpSet.empty()
    return JumpSet(chains=tuple(out), closed=tuple(closed))


def crack_mask(state: PhaseFieldState, threshold: float = 0.5, dilate: int = 1) -> np.ndarray:
    band = state.z.values < threshold
    if dilate > 0 and band.any():
        band = binary_dilation(band, iterations=dilate)
    return band


# diagnosis ---------------------------------------------------------------------------

def diagnose_segmentation(state: PhaseFieldState, points, scales, threshold: float = 0.5, K: JumpSet | None = None):
    """Classify each point from the pair (u, extracted K); nodes in the crack band are masked."""
    from .diagnostics import classify_point
    from .pairs import PairView

    K = extract_jumpset(state, threshold) if K is None else K
    u = state.u.with_values(state.u.values, mask=crack_mask(state, threshold))
    p = PairView(u=u, K=K, g=state.g, lam=state.lam, strict=False)
    return [classify_point(p, x, scales) for x in np.atleast_2d(np.asarray(points, dtype=float))]


# image input and output ----------------------------------------------------------------

def read_pgm(path) -> np.ndarray:
    """Binary 8-bit PGM (P5) as floats in [0, 1], first row at the top of the image."""
    with open(path, "rb") as fh:
        data = fh.read()
    tokens, pos = [], 0
    while len(tokens) < 4:
        while pos < len(data) and data[pos:pos + 1].isspace():
            pos += 1
        if data[pos:pos + 1] == b"#":
            while pos < len(data) and data[pos:pos + 1] not in (b"\n", b"\r"):
                pos += 1
            continue
        start = pos
        while pos < len(data) and not data[pos:pos + 1].isspace():
            pos += 1
        tokens.append(data[start:pos])
    pos += 1  # single whitespace after maxval
    if tokens[0] != b"P5":
        raise ValueError("only binary PGM (P5) files are supported")
    w, hgt, maxval = (int(t) for t in tokens[1:])
    if maxval != 255:
        raise ValueError("only maxval 255 is supported")
    raw = np.frombuffer(data, dtype=np.uint8, count=w * hgt, offset=pos)
    return raw.reshape(hgt, w).astype(float) / 255.0


def write_pgm(path, img, lo=None, hi=None):
    """Write an array as P5 PGM, mapping [lo, hi] (default [0, 1]) to 0..255."""
    a = np.asarray(img, dtype=float)
    lo = 0.0 if lo is None else lo
    hi = 1.0 if hi is None else hi
    q = np.clip(np.rint((a - lo) / (hi - lo) * 255.0), 0, 255).astype(np.uint8)
    with open(path, "wb") as fh:
        fh.write(b"P5\n%d %d\n255\n" % (q.shape[1], q.shape[0]))
        fh.write(q.tobytes())


def image_field(img, h: float | None = None) -> ScalarField:
    """Image rows top to bottom become grid rows with y increasing upwards.

    Without ``h`` the longer side is mapped onto the unit interval.
    """
    img = np.asarray(img, dtype=float)
    if h is None:
        h = 1.0 / (max(img.shape) - 1)
    return ScalarField((0.0, 0.0), h, img[::-1].copy())


def field_image(f: ScalarField) -> np.ndarray:
    return f.values[::-1]


def synthetic_image(kind: str, n: int = 256, values=None) -> np.ndarray:
    """Test images on the unit square, rows top to bottom.

    ``step``: the line x = 0.5 separates ``values[0]`` (left) from ``values[1]``.
    ``tripod``: three 120 degree sectors around (0.5, 0.5), one arm pointing up.
    """
    t = np.arange(n) / (n - 1)
    X, Y = np.meshgrid(t, t)
    if kind == "step":
        vals = np.asarray((0.0, 1.0) if values is None else values, dtype=float)
        img = np.where(X < 0.5, vals[0], vals[1])
    elif kind == "tripod":
        vals = np.asarray((0.0, 0.5, 1.0) if values is None else values, dtype=float)
        ang = np.mod(np.arctan2(Y - 0.5, X - 0.5) - np.pi / 2, 2 * np.pi)
        img = vals[np.minimum((ang // (2 * np.pi / 3)).astype(int), 2)]
    else:
        raise ValueError(f"unknown synthetic image {kind!r}")
    return img[::-1].copy()


# estimator -------------------------------------------------------------------------------

class PhaseFieldSegmenter(TransformerMixin, BaseEstimator):
    """Scikit-learn style wrapper: ``fit`` runs the solver, ``transform`` returns u."""

    def __init__(self, lam=0.05, eps_phase=None, sweeps=200, threshold=0.5, h=None, stop_tol=0.0):
        self.lam = lam
        self.eps_phase = eps_phase
        self.sweeps = sweeps
        self.threshold = threshold
        self.h = h
        self.stop_tol = stop_tol

    def _field(self, X):
        if isinstance(X, ScalarField):
            return X
        X = np.asarray(X, dtype=float)
        if X.ndim != 2:
            raise ValueError(f"expected a 2D image, got shape {X.shape}")
        if not np.all(np.isfinite(X)):
            raise ValueError("image contains non-finite values")
        return image_field(X, self.h)

    def fit(self, X, y=None):
        g = self._field(X)
        eps = 4 * g.h if self.eps_phase is None else self.eps_phase
        self.state_ = at_minimize(g, self.lam, eps, self.sweeps, stop_tol=self.stop_tol)
        self.jumpset_ = extract_jumpset(self.state_, self.threshold)
        self.energy_log_ = np.asarray(self.state_.energy_log)
        return self

    def transform(self, X=None):
        check_is_fitted(self, "state_")
        return field_image(self.state_.u)

    def phase(self) -> np.ndarray:
        check_is_fitted(self, "state_")
        return field_image(self.state_.z)
