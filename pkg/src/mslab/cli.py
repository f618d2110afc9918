"""Command line front end: ``mslab <subcommand> [flags]``.

Exit status is 0 on success, 2 when the computation ran but a requested check
failed (for instance a residual above ``--tol``), and 1 on usage errors.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import sys
from pathlib import Path

import numpy as np

from .errors import MSLabError
from .models import KINDS, ModelMinimizer

CHECKS = ("dlms", "translation", "rotation", "am", "magic", "factor")


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def _xy(text):
    try:
        x, y = (float(v) for v in text.split(","))
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected 'x,y', got {text!r}") from None
    return np.array([x, y])


def _floats(text):
    try:
        return [float(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma separated numbers, got {text!r}") from None


def _clean(obj):
    """JSON-safe copy: arrays to lists, non-finite floats to null."""
    if isinstance(obj, dict):
        return {str(k): _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _clean(obj.tolist())
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, complex):
        return {"re": _clean(obj.real), "im": _clean(obj.imag)}
    if isinstance(obj, (float, np.floating)):
        return float(obj) if np.isfinite(obj) else None
    return obj


def dumps(obj) -> str:
    return json.dumps(_clean(obj), sort_keys=True, indent=2) + "\n"


def table(header, rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([f"{v:.12g}" if isinstance(v, (float, np.floating)) else v for v in row])
    return buf.getvalue()


class Output:
    """Writes named text outputs into ``--out`` or, without it, to stdout."""

    def __init__(self, out):
        self.dir = None if out is None else Path(out)
        if self.dir is not None:
            self.dir.mkdir(parents=True, exist_ok=True)

    def text(self, name, content):
        if self.dir is None:
            sys.stdout.write(content)
        else:
            (self.dir / name).write_text(content, encoding="utf-8")

    def path(self, name):
        return None if self.dir is None else self.dir / name


# argument handling ---------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    ap = _Parser(prog="mslab", description="Numerical experiments on Mumford-Shah minimizers.")
    sub = ap.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def common(p):
        p.add_argument("--out", metavar="DIR", help="output directory (default: stdout)")
        p.add_argument("--seed", type=int, default=0)
        p.add_argument("--tol", type=float, help="fail with status 2 when a residual exceeds this")

    def model(p, default="cracktip"):
        p.add_argument("--model", choices=KINDS, default=default)
        p.add_argument("--input", help="model JSON file (overrides --model)")
        p.add_argument("--center", type=_xy, help="evaluation point x,y (default: model center)")

    def radii(p, r=None, rmin=0.2, rmax=1.0, rsteps=10):
        p.add_argument("--r", type=float, default=r, help="single radius")
        p.add_argument("--rmin", type=float, default=rmin)
        p.add_argument("--rmax", type=float, default=rmax)
        p.add_argument("--rsteps", type=int, default=rsteps)

    def phase(p):
        p.add_argument("--input", help="binary PGM image")
        p.add_argument("--synthetic", choices=("step", "tripod"), help="built-in test image instead of --input")
        p.add_argument("--n", type=int, default=256, help="side of the synthetic image")
        p.add_argument("--gain", type=float, default=1.0, help="intensity multiplier applied to the image")
        p.add_argument("--lambda", dest="lam", type=float, default=0.05)
        p.add_argument("--eps-phase", type=float, help="phase-field width (default 4h)")
        p.add_argument("--sweeps", type=int, default=200)
        p.add_argument("--threshold", type=float, default=0.5)

    p = sub.add_parser("identities", help="residuals of the variational identities")
    model(p)
    radii(p)
    p.add_argument("--check", choices=CHECKS, default="dlms")
    p.add_argument("--n", type=int, default=20, help="magic: sampled points; factor: quadrature nodes")
    common(p)

    p = sub.add_parser("monotonicity", help="radial profile of d, l/r and F")
    model(p)
    radii(p, rmin=0.1, rmax=1.0, rsteps=50)
    p.add_argument("--shift", type=float, default=0.0,
                   help="evaluate at center - shift * (first arm direction)")
    p.add_argument("--require-monotone", action="store_true", help="status 2 if F decreases anywhere")
    common(p)

    p = sub.add_parser("spectrum", help="odd eigenvalues and the three-annuli test")
    p.add_argument("--n", type=int, default=20, help="number of eigenvalues")
    p.add_argument("--annuli", type=int, default=0, metavar="TRIALS", help="random even solutions to test")
    p.add_argument("--eta", type=float, default=0.05)
    p.add_argument("--c0", type=float, default=0.01)
    p.add_argument("--kmax", type=int, default=32)
    common(p)

    p = sub.add_parser("flatness", help="flatness, excess and closeness across scales")
    model(p)
    radii(p, rmin=0.125, rmax=0.5, rsteps=3)
    p.add_argument("--threshold", type=float, default=0.05, help="classification threshold on omega")
    common(p)

    p = sub.add_parser("segment", help="phase-field segmentation of an image")
    phase(p)
    common(p)

    p = sub.add_parser("diagnose", help="segment, then classify points of the extracted jump set")
    phase(p)
    p.add_argument("--center", type=_xy, action="append", help="point to classify (repeatable)")
    p.add_argument("--scales", type=_floats, default=[0.2, 0.15, 0.1])
    common(p)
    return ap


def _require(cond, flag, msg):
    if not cond:
        raise UsageError(f"argument {flag}: {msg}")


def _radii(a):
    if a.r is not None:
        _require(a.r > 0, "--r", "must be positive")
        return np.array([a.r])
    _require(a.rmin > 0, "--rmin", "must be positive")
    _require(a.rmax > a.rmin, "--rmax", "must exceed --rmin")
    _require(a.rsteps >= 1, "--rsteps", "must be at least 1")
    return np.linspace(a.rmin, a.rmax, a.rsteps) if a.rsteps > 1 else np.array([a.rmin])


def _model(a) -> ModelMinimizer:
    if a.input:
        try:
            return ModelMinimizer.from_json(Path(a.input).read_text(encoding="utf-8"))
        except (OSError, KeyError, ValueError) as exc:
            raise UsageError(f"argument --input: {exc}") from None
    if a.model == "cracktip":
        return ModelMinimizer.cracktip()
    return ModelMinimizer(a.model)


def _point(a, m):
    return m.center.copy() if a.center is None else a.center


# subcommands -------------------------------------------------------------------------

def cmd_identities(a, out: Output) -> int:
    from . import identities as I
    from .pairs import PairView

    m = _model(a)
    p = PairView.of_model(m)
    rows, reports = [], []
    if a.check == "factor":
        _require(a.n >= 2, "--n", "needs at least 2 nodes")
        f = I.cracktip_factor_solve(nodes=a.n)
        reports.append({"check": "factor", "b": f.b, "b2": f.b2, "target": 2.0 / np.pi, "residual": f.error,
                        "nodes": f.nodes})
        worst = f.error
    elif a.check == "magic":
        if a.center is not None:
            z = [complex(*a.center)]
        else:
            z = _magic_points(m, a.n, a.seed)
        worst = 0.0
        for z0 in z:
            res = I.magic_formula_residual(m, z0)
            rel = abs(res.lhs - res.rhs) / max(abs(res.rhs), 1e-300)
            worst = max(worst, rel)
            reports.append({"check": "magic", "z0": [z0.real, z0.imag], "lhs": complex(res.lhs),
                            "rhs": complex(res.rhs), "relative_error": rel})
            rows.append([z0.real, z0.imag, rel])
    else:
        y = _point(a, m)
        worst = 0.0
        for r in _radii(a):
            if a.check == "dlms":
                res = I.dlms_residual(p, y, r)
            elif a.check == "am":
                res = I.am_identity_residual(p, r, y)
            else:
                res = I.boundary_identity_residual(p, y, r, kind=a.check)
            d = res.as_dict()
            d["r"] = float(r)
            d["center"] = y
            reports.append(d)
            rows.append([float(r), res.lhs, res.rhs, res.residual])
            worst = max(worst, abs(res.residual))
    ok = a.tol is None or worst <= a.tol
    doc = {"check": a.check, "model": m.to_dict(), "max_residual": worst, "tol": a.tol, "passed": ok,
           "results": reports}
    out.text("identities.json", dumps(doc))
    if rows and out.dir is not None:
        header = ["re_z0", "im_z0", "relative_error"] if a.check == "magic" else ["r", "lhs", "rhs", "residual"]
        out.text("identities.csv", table(header, rows))
    return 0 if ok else 2


def _magic_points(m, n, seed):
    """Random points with |z| in [0.5, 3] at distance at least 0.3 from K."""
    rng = np.random.default_rng(seed)
    pts = []
    while len(pts) < n:
        rho, phi = rng.uniform(0.5, 3.0), rng.uniform(0.0, 2 * np.pi)
        z = m.center + rho * np.array([np.cos(phi), np.sin(phi)])
        if m.kind == "constant" or m.distance_to_K(z)[0] >= 0.3:
            pts.append(complex(*z))
    return pts


def cmd_monotonicity(a, out: Output) -> int:
    from .energy import radial_profile
    from .pairs import PairView

    m = _model(a)
    x = _point(a, m)
    if a.shift and m.kind != "constant":
        x = x - a.shift * m.arm_directions()[0]
    prof = radial_profile(PairView.of_model(m), x, _radii(a))
    dec_F = prof.decreasing_intervals("F")
    dec_d = prof.decreasing_intervals("d")
    out.text("profile.csv", prof.to_csv())
    if out.dir is not None:
        out.text("monotonicity.json", dumps({"model": m.to_dict(), "point": x, "F_decreasing": dec_F,
                                             "d_decreasing": dec_d, "F_min": prof.F.min(), "F_max": prof.F.max()}))
    for lo, hi in dec_F:
        print(f"F strictly decreasing on [{lo:.6g}, {hi:.6g}]", file=sys.stderr)
    return 2 if a.require_monotone and dec_F else 0


def cmd_spectrum(a, out: Output) -> int:
    from . import spectral as S

    _require(a.n >= 1, "--n", "must be at least 1")
    spec = S.ventsel_eigenvalues(a.n)
    out.text("spectrum.csv", spec.to_csv())
    status = 0
    if a.tol is not None and float(np.max(spec.psi_residual)) > a.tol:
        status = 2
    if a.annuli:
        _require(a.kmax >= 1, "--kmax", "must be at least 1")
        _require(a.eta > 0, "--eta", "must be positive")
        rng = np.random.default_rng(a.seed)
        rows, bad = [], 0
        for trial in range(a.annuli):
            sol = S.random_even_solution(rng, k_max=a.kmax)
            rep = S.three_annuli_check(sol, a.eta, a.c0)
            counter = rep.hypothesis and not rep.conclusion
            bad += counter
            rows.append([trial, rep.G01, rep.G12, rep.G23, int(rep.hypothesis), int(rep.conclusion), int(counter)])
        if out.dir is not None:
            out.text("annuli.csv", table(["trial", "G01", "G12", "G23", "hypothesis", "conclusion",
                                          "counterexample"], rows))
        print(f"three annuli: {bad} counterexamples in {a.annuli} trials", file=sys.stderr)
        status = 2 if bad else status
    return status


def cmd_flatness(a, out: Output) -> int:
    from .diagnostics import classify_point, closeness, excess, mean_flatness
    from .geometry import Disk
    from .pairs import PairView

    m = _model(a)
    p = PairView.of_model(m)
    x = _point(a, m)
    scales = _radii(a)[::-1]
    rows = []
    for r in scales:
        D = Disk(x, r)
        K = p.jumpset(D)
        if K.is_empty:
            beta = exc = np.nan
        else:
            beta = mean_flatness(K, D).beta
            exc = excess(K, D).excess
        om = [closeness(p, x, r, c).omega for c in "jtc"]
        rows.append([float(r), beta, exc, *om])
    out.text("flatness.csv", table(["r", "beta", "excess", "omega_j", "omega_t", "omega_c"], rows))
    if len(scales) >= 3:
        cls = classify_point(p, x, list(scales), eps_thr=a.threshold)
        if out.dir is not None:
            out.text("classification.json", dumps(cls.as_dict()))
        print(f"label: {cls.label}", file=sys.stderr)
    return 0


def _segment(a):
    from .solver import at_minimize, image_field, read_pgm, synthetic_image

    _require((a.input is None) != (a.synthetic is None), "--input", "give exactly one of --input or --synthetic")
    _require(0 < a.lam <= 1, "--lambda", "must lie in (0, 1]")
    _require(a.sweeps >= 1, "--sweeps", "must be at least 1")
    _require(0 < a.threshold < 1, "--threshold", "must lie in (0, 1)")
    if a.input is not None:
        try:
            img = read_pgm(a.input)
        except (OSError, ValueError) as exc:
            raise UsageError(f"argument --input: {exc}") from None
    else:
        _require(a.n >= 8, "--n", "must be at least 8")
        img = synthetic_image(a.synthetic, a.n)
    g = image_field(a.gain * img)
    eps = 4 * g.h if a.eps_phase is None else a.eps_phase
    _require(eps >= 2 * g.h, "--eps-phase", f"must be at least 2h = {2 * g.h:.6g}")
    return at_minimize(g, a.lam, eps, a.sweeps), a.gain


def _write_state(out: Output, state, K, gain):
    from .solver import field_image, write_pgm

    if out.dir is None:
        return
    write_pgm(out.path("u.pgm"), field_image(state.u), 0.0, max(gain, 1e-300))
    write_pgm(out.path("z.pgm"), field_image(state.z))
    out.text("jumpset.json", K.to_json() + "\n")
    out.text("energy.csv", table(["sweep", "energy"], [[k, e] for k, e in enumerate(state.energy_log)]))


def cmd_segment(a, out: Output) -> int:
    from .solver import extract_jumpset

    state, gain = _segment(a)
    K = extract_jumpset(state, a.threshold)
    _write_state(out, state, K, gain)
    summary = {"energy": state.energy, "sweeps": state.sweeps, "h": state.h, "lambda": state.lam,
               "eps_phase": state.eps, "chains": len(K), "length": K.length, "z_min": float(state.z.values.min())}
    out.text("segment.json", dumps(summary))
    return 0


def cmd_diagnose(a, out: Output) -> int:
    from .solver import diagnose_segmentation, extract_jumpset

    _require(a.center, "--center", "give at least one point to classify")
    _require(len(a.scales) >= 3, "--scales", "needs at least three scales")
    _require(all(s > 0 for s in a.scales), "--scales", "must be positive")
    state, gain = _segment(a)
    K = extract_jumpset(state, a.threshold)
    _write_state(out, state, K, gain)
    scales = sorted(a.scales, reverse=True)
    reports = diagnose_segmentation(state, a.center, scales, a.threshold, K=K)
    out.text("diagnose.json", dumps([r.as_dict() for r in reports]))
    return 0


COMMANDS = {"identities": cmd_identities, "monotonicity": cmd_monotonicity, "spectrum": cmd_spectrum,
            "flatness": cmd_flatness, "segment": cmd_segment, "diagnose": cmd_diagnose}


def run(argv=None) -> int:
    try:
        try:
            a = build_parser().parse_args(argv)
        except SystemExit as exc:  # --help and --version
            return int(exc.code or 0)
        if a.tol is not None:
            _require(a.tol >= 0, "--tol", "must be non-negative")
        return COMMANDS[a.command](a, Output(a.out))
    except UsageError as exc:
        print(f"mslab: error: {exc}", file=sys.stderr)
        return 1
    except MSLabError as exc:
        print(f"mslab: error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1


def main():
    sys.exit(run())


if __name__ == "__main__":
    main()
