"""Linearised cracktip spectrum: Ventsel eigenvalues, the zeta basis and three-annuli functionals.

Angles run over [0, 2pi] and the time variable is t = -log r.  Odd functions
(f(phi) = -f(2pi - phi)) are expanded in zeta_0, zeta_1, zeta_2, ...; even ones
in sin((k + 1/2) phi) / sqrt(pi).
"""
from __future__ import annotations

import csv
import io
from dataclasses import dataclass, field
from functools import lru_cache

import mpmath as mp
import numpy as np
from scipy.integrate import simpson
from scipy.optimize import brentq

from .errors import BracketFailure, GridMismatch, NotOdd

PI = np.pi
N_PHI = 4097  # odd, so that Simpson's rule applies on the closed interval
C0_DEFAULT = 0.01
FD_ORDER = 8  # derivative stencil order for plain samples


# eigenvalues -----------------------------------------------------------------

def psi(x):
    """Psi(x) = 8x cos x - (pi^2 - 4x^2) sin x; its positive zeros are pi * nu_k."""
    x = np.asarray(x, dtype=float)
    return 8.0 * x * np.cos(x) - (PI**2 - 4.0 * x * x) * np.sin(x)


def psi_prime(x):
    x = np.asarray(x, dtype=float)
    return (4.0 * x * x + 8.0 - PI**2) * np.cos(x)


def _bracket(k: int) -> tuple[float, float]:
    if k == 2:
        return 1.5, 2.0
    return float(k - 1), float(k)


@dataclass(frozen=True)
class VentselSpectrum:
    nu: np.ndarray  # nu[k-1] = nu_k
    c: np.ndarray  # c[k-1] normalises zeta_k; nan for k = 1
    brackets: np.ndarray  # (n, 2) in units of nu
    psi_residual: np.ndarray

    def __len__(self):
        return len(self.nu)

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["k", "nu_k", "bracket_lo", "bracket_hi", "psi_residual"])
        for k in range(len(self.nu)):
            w.writerow([k + 1, repr(float(self.nu[k])), repr(float(self.brackets[k, 0])),
                        repr(float(self.brackets[k, 1])), f"{self.psi_residual[k]:.3e}"])
        return buf.getvalue()


def psi_exact(nu: float) -> float:
    """|Psi(pi nu)| for the double nu, evaluated in 40-digit arithmetic."""
    with mp.workdps(40):
        x = mp.pi * mp.mpf(float(nu))
        return float(abs(8 * x * mp.cos(x) - (mp.pi**2 - 4 * x * x) * mp.sin(x)))


def _polish(x: float) -> float:
    """Newton in extended precision, then the best double among nu and its neighbours."""
    with mp.workdps(40):
        X = mp.mpf(x)
        for _ in range(3):
            X -= (8 * X * mp.cos(X) - (mp.pi**2 - 4 * X * X) * mp.sin(X)) / ((4 * X * X + 8 - mp.pi**2) * mp.cos(X))
        nu = float(X / mp.pi)
    cands = [nu, np.nextafter(nu, -np.inf), np.nextafter(nu, np.inf)]
    return min(cands, key=psi_exact)


def ventsel_eigenvalues(n: int) -> VentselSpectrum:
    """First n positive roots nu_k of Psi(pi nu) = 0.

    nu_1 = 1/2 is exact.  The others come from bisection-type root finding in
    the bracket (3/2, 2) for k = 2 and (k-1, k) for k >= 3, polished by Newton steps in
    extended precision.  ``psi_residual`` is |Psi(pi nu_k)| at the returned double.
    """
    if n < 1:
        raise ValueError("need at least one eigenvalue")
    nu = np.empty(n)
    br = np.empty((n, 2))
    res = np.empty(n)
    nu[0], br[0], res[0] = 0.5, (0.5, 0.5), psi_exact(0.5)
    for k in range(2, n + 1):
        lo, hi = _bracket(k)
        a, b = PI * lo, PI * hi
        fa, fb = float(psi(a)), float(psi(b))
        if fa * fb >= 0:
            raise BracketFailure(f"Psi does not change sign on the bracket for k = {k}")
        x = brentq(psi, a, b, xtol=1e-15, rtol=4 * np.finfo(float).eps, maxiter=200)
        nu[k - 1] = _polish(x)
        if not lo < nu[k - 1] < hi:
            raise BracketFailure(f"root left its bracket for k = {k}")
        br[k - 1] = (lo, hi)
        res[k - 1] = psi_exact(nu[k - 1])
    c = np.full(n, np.nan)
    c[1:] = 1.0 / np.sqrt(_sine_form_norm(nu[1:]))
    return VentselSpectrum(nu=nu, c=c, brackets=br, psi_residual=res)


def _sine_form_norm(nu):
    """<g, g> for g = sin(nu (phi - pi)), in closed form."""
    s = np.sin(2 * nu * PI) / (2 * nu)
    return nu**2 * (PI + s) - 0.25 * (PI - s)


# sampled odd functions and the bilinear form ------------------------------------

def phi_grid(n: int = N_PHI) -> np.ndarray:
    return np.linspace(0.0, 2 * PI, n)


@dataclass(frozen=True, eq=False)
class Sampled:
    """Values and phi-derivative of a function on a uniform grid of [0, 2pi]."""

    phi: np.ndarray
    f: np.ndarray
    df: np.ndarray | None = None

    def __post_init__(self):
        phi = np.asarray(self.phi, dtype=float)
        if phi.ndim != 1 or len(phi) < 3 or abs(phi[0]) > 1e-14 or abs(phi[-1] - 2 * PI) > 1e-12:
            raise GridMismatch("samples must live on a uniform grid covering [0, 2pi]")
        if not np.allclose(np.diff(phi), phi[1] - phi[0], rtol=1e-9, atol=1e-14):
            raise GridMismatch("phi grid is not uniform")
        object.__setattr__(self, "phi", phi)
        object.__setattr__(self, "f", np.asarray(self.f, dtype=float))
        if self.df is None:
            object.__setattr__(self, "df", fd_derivative(self.f, phi[1] - phi[0]))

    def __add__(self, other):
        _same_grid(self, other)
        return Sampled(self.phi, self.f + other.f, self.df + other.df)

    def __mul__(self, s):
        return Sampled(self.phi, s * self.f, s * self.df)

    __rmul__ = __mul__


@lru_cache(maxsize=32)
def _fd_weights(offsets: tuple) -> np.ndarray:
    """First-derivative weights for unit spacing on the given integer offsets."""
    x = np.asarray(offsets, dtype=float)
    n = len(x)
    V = np.vander(x, n, increasing=True).T
    rhs = np.zeros(n)
    rhs[1] = 1.0
    return np.linalg.solve(V, rhs)


def fd_derivative(f, h: float, order: int = FD_ORDER) -> np.ndarray:
    """Derivative of uniformly sampled values: centred stencils inside, one-sided near the ends."""
    f = np.asarray(f, dtype=float)
    n = len(f)
    half = order // 2
    if n < order + 1:
        return np.gradient(f, h, edge_order=2)
    w = _fd_weights(tuple(range(-half, half + 1)))
    out = np.empty(n)
    out[half:n - half] = sum(w[j] * f[j:n - order + j] for j in range(order + 1))
    for i in range(half):
        lo = _fd_weights(tuple(range(-i, order + 1 - i)))
        out[i] = lo @ f[:order + 1]
        hi = _fd_weights(tuple(range(-(order - i), i + 1)))
        out[n - 1 - i] = hi @ f[n - order - 1:]
    return out / h


def _same_grid(u: Sampled, v: Sampled):
    if len(u.phi) != len(v.phi) or not np.array_equal(u.phi, v.phi):
        raise GridMismatch("functions are sampled on different phi grids")


def _integrate(y, phi):
    if len(phi) % 2 == 1:
        return float(simpson(y, x=phi))
    return float(np.trapezoid(y, phi))


def bilinear_form(u: Sampled, v: Sampled) -> float:
    """<u, v> = int u' v' - 1/4 int u v over [0, 2pi]."""
    _same_grid(u, v)
    return _integrate(u.df * v.df - 0.25 * u.f * v.f, u.phi)


def h1_product(u: Sampled, v: Sampled) -> float:
    _same_grid(u, v)
    return _integrate(u.df * v.df + u.f * v.f, u.phi)


class ZetaBasis:
    """zeta_0 = (phi - pi) sin(phi/2), zeta_1 = cos(phi/2), zeta_k = c_k sin(nu_k (phi - pi))."""

    def __init__(self, n_modes: int, spectrum: VentselSpectrum | None = None, n_phi: int = N_PHI):
        if n_modes < 2:
            raise ValueError("the basis needs at least zeta_0 and zeta_1")
        # modes 0..n_modes-1; zeta_k for k >= 2 needs nu_k
        need = max(n_modes - 1, 1)
        if spectrum is None or len(spectrum) < need:
            spectrum = ventsel_eigenvalues(need)
        self.spectrum = spectrum
        self.n_modes = n_modes
        self.phi = phi_grid(n_phi)

    def nu(self, k: int) -> float:
        return float(self.spectrum.nu[k - 1])

    def c(self, k: int) -> float:
        return float(self.spectrum.c[k - 1])

    def derivatives(self, k: int, phi):
        """zeta_k, zeta_k', zeta_k'' evaluated at phi."""
        phi = np.asarray(phi, dtype=float)
        if k == 0:
            s, co = np.sin(phi / 2), np.cos(phi / 2)
            x = phi - PI
            return x * s, s + 0.5 * x * co, co - 0.25 * x * s
        if k == 1:
            return np.cos(phi / 2), -0.5 * np.sin(phi / 2), -0.25 * np.cos(phi / 2)
        nu, c = self.nu(k), self.c(k)
        a = nu * (phi - PI)
        return c * np.sin(a), c * nu * np.cos(a), -c * nu * nu * np.sin(a)

    def sample(self, k: int) -> Sampled:
        f, df, _ = self.derivatives(k, self.phi)
        return Sampled(self.phi, f, df)

    def ventsel_residual(self, k: int) -> float:
        """zeta'(0) + (pi/2)(zeta(0)/4 + zeta''(0))."""
        f, df, d2f = self.derivatives(k, 0.0)
        return float(df + 0.5 * PI * (0.25 * f + d2f))

    def block_residual(self) -> float:
        """max |zeta_0'' + zeta_0/4 - zeta_1| on the grid."""
        z0, _, d2 = self.derivatives(0, self.phi)
        z1 = self.derivatives(1, self.phi)[0]
        return float(np.max(np.abs(d2 + 0.25 * z0 - z1)))

    def gram(self, ks) -> np.ndarray:
        S = [self.sample(k) for k in ks]
        return np.array([[bilinear_form(a, b) for b in S] for a in S])

    def synthesize(self, coeffs) -> Sampled:
        coeffs = np.asarray(coeffs, dtype=float)
        if len(coeffs) > self.n_modes:
            raise ValueError("more coefficients than basis functions")
        f = np.zeros_like(self.phi)
        df = np.zeros_like(self.phi)
        for k, a in enumerate(coeffs):
            if a != 0.0:
                z, dz, _ = self.derivatives(k, self.phi)
                f += a * z
                df += a * dz
        return Sampled(self.phi, f, df)

    def project_odd(self, f: Sampled, tol: float = 1e-8) -> "Projection":
        """Coefficients a_0, ..., a_{n_modes-1} of an odd function.

        a_k = <f, zeta_k> for k >= 2 and a_0 = <zeta_0, f> / <zeta_0, zeta_0>;
        the remainder is then a multiple of cos(phi/2), whose coefficient is
        read off with the H^1 scalar product.
        """
        if not isinstance(f, Sampled):
            f = Sampled(self.phi, f)
        _same_grid(f, Sampled(self.phi, np.zeros_like(self.phi), np.zeros_like(self.phi)))
        scale = max(1.0, float(np.max(np.abs(f.f))))
        if np.max(np.abs(f.f + f.f[::-1])) > tol * scale:
            raise NotOdd("function is not odd about phi = pi")
        a = np.zeros(self.n_modes)
        z0 = self.sample(0)
        a[0] = bilinear_form(z0, f) / bilinear_form(z0, z0)
        for k in range(2, self.n_modes):
            a[k] = bilinear_form(f, self.sample(k))
        rest = f + (-1.0) * self.synthesize(a)
        z1 = self.sample(1)
        a[1] = h1_product(rest, z1) / h1_product(z1, z1)
        rec = self.synthesize(a)
        err = float(np.max(np.abs(rec.f - f.f)))
        return Projection(coeffs=a, reconstruction_error=err)


@dataclass(frozen=True)
class Projection:
    coeffs: np.ndarray
    reconstruction_error: float


def even_mode(k: int, phi) -> np.ndarray:
    return np.sin((k + 0.5) * np.asarray(phi, dtype=float)) / np.sqrt(PI)


# exponential polynomials in t ---------------------------------------------------

@dataclass(frozen=True)
class ExpPoly:
    """Finite sum of c * t^m * exp(a t)."""

    c: np.ndarray
    m: np.ndarray
    a: np.ndarray

    @classmethod
    def of(cls, terms) -> "ExpPoly":
        terms = [(float(c), int(m), float(a)) for c, m, a in terms if c != 0.0]
        if not terms:
            return cls(np.zeros(0), np.zeros(0, dtype=int), np.zeros(0))
        c, m, a = zip(*terms)
        return cls(np.array(c), np.array(m, dtype=int), np.array(a))

    def __call__(self, t):
        t = np.asarray(t, dtype=float)
        tt = t[..., None]
        return (self.c * tt**self.m * np.exp(self.a * tt)).sum(-1)

    def __add__(self, other):
        return ExpPoly(np.concatenate([self.c, other.c]), np.concatenate([self.m, other.m]),
                       np.concatenate([self.a, other.a]))

    def scaled(self, s):
        return ExpPoly(s * self.c, self.m, self.a)

    def deriv(self) -> "ExpPoly":
        poly = self.m > 0
        return ExpPoly(np.concatenate([self.c * self.a, (self.c * self.m)[poly]]),
                       np.concatenate([self.m, self.m[poly] - 1]),
                       np.concatenate([self.a, self.a[poly]]))

    def square(self) -> "ExpPoly":
        c = np.outer(self.c, self.c).ravel()
        m = np.add.outer(self.m, self.m).ravel()
        a = np.add.outer(self.a, self.a).ravel()
        return ExpPoly(c, m, a)

    def integral(self, s0: float, s1: float) -> float:
        return float(sum(c * _int_tm_exp(m, a, s0, s1) for c, m, a in zip(self.c, self.m, self.a)))


def _int_tm_exp(m: int, a: float, s0: float, s1: float) -> float:
    """Integral of t^m e^{a t} over [s0, s1]."""
    if abs(a) < 1e-13:
        return (s1 ** (m + 1) - s0 ** (m + 1)) / (m + 1)
    out = (np.exp(a * s1) - np.exp(a * s0)) / a
    for j in range(1, m + 1):
        out = (s1**j * np.exp(a * s1) - s0**j * np.exp(a * s0)) / a - j / a * out
    return float(out)


# solutions of the linearised system -----------------------------------------------

@dataclass
class SpectralSolution:
    """Modal solution of the linearised problem.

    Even: a_k(t) = C_k e^{(k+1)t} + D_k e^{-kt}.  Odd (k >= 2):
    a_k(t) = C_k e^{(1/2 + nu_k)t} + D_k e^{(1/2 - nu_k)t}, so in both cases C
    multiplies the growing and D the decaying exponential.  The odd a_0, a_1
    channel is a_0 = A + B e^t, a_1 = E + F e^t + A t - B t e^t.
    """

    parity: str
    modes: np.ndarray
    C: np.ndarray
    D: np.ndarray
    A: float = 0.0
    B: float = 0.0
    E: float = 0.0
    F: float = 0.0
    basis: ZetaBasis | None = field(default=None, repr=False)

    def __post_init__(self):
        if self.parity not in ("even", "odd"):
            raise ValueError("parity must be 'even' or 'odd'")
        self.modes = np.asarray(self.modes, dtype=int)
        self.C = np.asarray(self.C, dtype=float)
        self.D = np.asarray(self.D, dtype=float)
        if not (len(self.modes) == len(self.C) == len(self.D)):
            raise ValueError("modes, C and D must have equal length")
        if self.parity == "odd":
            if np.any(self.modes < 2):
                raise ValueError("odd modes are indexed from k = 2 (k = 0, 1 use A, B, E, F)")
            need = int(self.modes.max()) + 1 if len(self.modes) else 2
            if self.basis is None or self.basis.n_modes < need:
                self.basis = ZetaBasis(max(need, 2))
        elif np.any(self.modes < 0):
            raise ValueError("even modes are indexed from k = 0")

    def rates(self, k: int) -> tuple[float, float]:
        """(growth, decay) exponents of mode k."""
        if self.parity == "even":
            return float(k + 1), float(-k)
        nu = self.basis.nu(k)
        return 0.5 + nu, 0.5 - nu

    def coefficient(self, j: int) -> ExpPoly:
        """a_k(t) for the j-th stored mode."""
        k = int(self.modes[j])
        g, d = self.rates(k)
        return ExpPoly.of([(self.C[j], 0, g), (self.D[j], 0, d)])

    def a0(self) -> ExpPoly:
        return ExpPoly.of([(self.A, 0, 0.0), (self.B, 0, 1.0)])

    def a1(self) -> ExpPoly:
        return ExpPoly.of([(self.E, 0, 0.0), (self.F, 0, 1.0), (self.A, 1, 0.0), (-self.B, 1, 1.0)])

    def theta(self) -> ExpPoly:
        """theta(t) = -sqrt(2 pi) zeta(0, t) for odd solutions."""
        if self.parity != "odd":
            raise ValueError("theta is defined for odd solutions only")
        out = self.a1()
        for j, k in enumerate(self.modes):
            z0 = float(self.basis.derivatives(int(k), 0.0)[0])
            out = out + self.coefficient(j).scaled(z0)
        return out.scaled(-np.sqrt(2 * PI))


def evolve(sol: SpectralSolution, t: float, phi=None) -> np.ndarray:
    """The solution at time t sampled on phi (default: the standard grid)."""
    phi = phi_grid() if phi is None else np.asarray(phi, dtype=float)
    out = np.zeros_like(phi)
    if sol.parity == "even":
        for j, k in enumerate(sol.modes):
            out += float(sol.coefficient(j)(t)) * even_mode(int(k), phi)
        return out
    b = sol.basis
    out += float(sol.a0()(t)) * b.derivatives(0, phi)[0] + float(sol.a1()(t)) * b.derivatives(1, phi)[0]
    for j, k in enumerate(sol.modes):
        out += float(sol.coefficient(j)(t)) * b.derivatives(int(k), phi)[0]
    return out


def ode_residual(sol: SpectralSolution, t_grid, dt: float = 1e-3) -> float:
    """Largest relative residual of the coefficient ODEs, by central differences.

    The step is ``dt`` divided by the largest exponent of each mode, which keeps
    the truncation error of the difference quotients near 1e-7.
    """
    t = np.asarray(t_grid, dtype=float)
    worst = 0.0
    chans = [(sol.coefficient(j), int(k)) for j, k in enumerate(sol.modes)]
    for a, k in chans:
        g, d = sol.rates(k)
        c = -g * d  # a'' - a' - c a = 0 with roots g, d
        h = dt / max(1.0, abs(g), abs(d))
        am, a0, ap = a(t - h), a(t), a(t + h)
        dd = (ap - 2 * a0 + am) / h**2
        d1 = (ap - am) / (2 * h)
        r = dd - d1 - c * a0
        scale = np.abs(dd) + np.abs(d1) + abs(c) * np.abs(a0) + 1e-300
        worst = max(worst, float(np.max(np.abs(r) / scale)))
    return worst


# three annuli ------------------------------------------------------------------

@dataclass(frozen=True)
class ThreeAnnuliReport:
    G01: float
    G12: float
    G23: float
    eta: float
    hypothesis: bool
    conclusion: bool

    @property
    def holds(self) -> bool:
        return (not self.hypothesis) or self.conclusion

    def as_dict(self) -> dict:
        return {"G01": self.G01, "G12": self.G12, "G23": self.G23, "eta": self.eta,
                "hypothesis": self.hypothesis, "conclusion": self.conclusion, "holds": self.holds}


def _even_h(sol: SpectralSolution) -> ExpPoly:
    h = ExpPoly.of([])
    for j, k in enumerate(sol.modes):
        h = h + sol.coefficient(j).square().scaled((k + 0.5) ** 4)
    return h


def G_even(sol: SpectralSolution, s0: float, s1: float) -> float:
    """Integral over [s0, s1] of ||v_phiphi||^2."""
    return _even_h(sol).integral(s0, s1)


def E_odd(sol: SpectralSolution, s0: float, s1: float) -> float:
    tot = 0.0
    for j, k in enumerate(sol.modes):
        a = sol.coefficient(j)
        nu = sol.basis.nu(int(k))
        tot += nu**4 * a.square().integral(s0, s1) + a.deriv().deriv().square().integral(s0, s1)
    return tot


def F_odd(sol: SpectralSolution, s0: float, s1: float) -> float:
    th = sol.theta()
    parts = [th.deriv(), th.deriv().deriv(), sol.a0(), sol.a1(), sol.a0().deriv().deriv(), sol.a1().deriv().deriv()]
    return sum(p.square().integral(s0, s1) for p in parts)


def G_odd(sol: SpectralSolution, s0: float, s1: float, c0: float = C0_DEFAULT) -> float:
    return max(E_odd(sol, s0, s1), c0 * F_odd(sol, s0, s1))


def three_annuli_check(sol: SpectralSolution, eta: float, c0: float = C0_DEFAULT) -> ThreeAnnuliReport:
    """If G(1,2) >= (1 - eta) G(0,1), is G(2,3) >= (1 + eta) G(1,2)?"""
    if sol.parity == "even":
        G = lambda a, b: G_even(sol, a, b)  # noqa: E731
    else:
        G = lambda a, b: G_odd(sol, a, b, c0)  # noqa: E731
    g01, g12, g23 = G(0, 1), G(1, 2), G(2, 3)
    return ThreeAnnuliReport(G01=g01, G12=g12, G23=g23, eta=eta,
                             hypothesis=bool(g12 >= (1 - eta) * g01),
                             conclusion=bool(g23 >= (1 + eta) * g12))


@dataclass(frozen=True)
class ConvexityWitness:
    t: np.ndarray
    h: np.ndarray
    h_dd: np.ndarray

    @property
    def ok(self) -> bool:
        slack = 1e-12 * np.maximum(np.abs(self.h), np.abs(self.h_dd))
        return bool(np.all(self.h_dd >= self.h - slack))


def convexity_witness(sol: SpectralSolution, t_grid) -> ConvexityWitness:
    """h(t) = sum (k + 1/2)^4 a_k(t)^2 and its exact second derivative."""
    if sol.parity != "even":
        raise ValueError("the witness is stated for even solutions")
    if np.any(sol.modes < 1):
        raise ValueError("the witness needs modes k >= 1")
    h = _even_h(sol)
    t = np.asarray(t_grid, dtype=float)
    return ConvexityWitness(t=t, h=h(t), h_dd=h.deriv().deriv()(t))


@dataclass(frozen=True)
class ThetaCheck:
    residual: float
    theta0: float


def theta_channel_check(sol: SpectralSolution, t_grid) -> ThetaCheck:
    """theta' - theta'' = 2 sqrt(2/pi) zeta_phi(0, t) with theta = -sqrt(2 pi) zeta(0, t)."""
    th = sol.theta()
    lhs = th.deriv() + th.deriv().deriv().scaled(-1.0)
    b = sol.basis
    zphi = sol.a0().scaled(float(b.derivatives(0, 0.0)[1])) + sol.a1().scaled(float(b.derivatives(1, 0.0)[1]))
    for j, k in enumerate(sol.modes):
        zphi = zphi + sol.coefficient(j).scaled(float(b.derivatives(int(k), 0.0)[1]))
    rhs = zphi.scaled(2 * np.sqrt(2 / PI))
    t = np.asarray(t_grid, dtype=float)
    L, R = lhs(t), rhs(t)
    scale = np.maximum(1.0, np.maximum(np.abs(L), np.abs(R)))
    return ThetaCheck(residual=float(np.max(np.abs(L - R) / scale)), theta0=float(th(0.0)))


def random_even_solution(rng: np.random.Generator, k_max: int = 32, low: float = 1e-6) -> SpectralSolution:
    """Modes 1..k_max with |C_k|, |D_k| log-uniform in [low, 1] and random signs."""
    k = np.arange(1, k_max + 1)
    mag = lambda: np.exp(rng.uniform(np.log(low), 0.0, size=k_max))  # noqa: E731
    sgn = lambda: rng.choice([-1.0, 1.0], size=k_max)  # noqa: E731
    return SpectralSolution("even", k, sgn() * mag(), sgn() * mag())
