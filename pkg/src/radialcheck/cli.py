"""Command line front end. Every subcommand prints one JSON report."""

from __future__ import annotations

import argparse
import json
import math
import re
import sys
from typing import List, Optional, Sequence

import numpy as np

from . import __version__, coords, cplx, extrema, ode, oracle, radial, series
from .expr import (COMPLEX, QUATERNION, REAL, ExprError, compose_linear, evaluate, parse,
                   partial_at)
from .report import Verdict, to_jsonable

SCHEMA_VERSION = 1
GRAMMAR_HINT = "expression grammar: docs/grammar.md"

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_EVALUATION = 3

# operation -> the one subcommand that exposes it
OPERATION_SUBCOMMANDS = {
    "expr.parse": "limit",
    "expr.evaluate": "limit",
    "expr.partial_at": "taylor",
    "coords.angle_grid": "limit",
    "coords.to_cartesian": "ode",
    "coords.from_cartesian": "ode",
    "radial.radial_limit": "limit",
    "radial.limit_along_path": "pathlimit",
    "radial.radial_derivative_profile": "diff",
    "radial.differentiability_check": "diff",
    "radial.differential": "differential",
    "cplx.cr_check": "cr",
    "cplx.derivative_continuity_probe": "cr",
    "cplx.higher_derivative": "hiderive",
    "cplx.quat_diff_check": "quat",
    "extrema.solve_radial_equation": "extrema",
    "extrema.radial_stationary_scan": "extrema",
    "extrema.classify": "classify",
    "series.taylor_coeffs": "taylor",
    "series.eval_partial_sum": "taylor",
    "series.polar_convergence_probe": "converge",
    "ode.polar_separate": "ode",
    "ode.solve_polar": "ode",
    "ode.rk4_oracle": "ode",
    "ode.classify_point": "classify-point",
    "oracle.uniform_limit_oracle": "limit",
    "oracle.fd_partial": "diff",
    "oracle.grid_extrema_oracle": "extrema",
}


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


# -- argument parsing -------------------------------------------------------

def _reals(text: str) -> List[float]:
    try:
        vals = [float(v) for v in text.split(",")]
    except ValueError:
        raise UsageError(f"expected comma-separated reals, got {text!r}") from None
    if not all(math.isfinite(v) for v in vals):
        raise UsageError("coordinates must be finite")
    return vals


def _complex(text: str) -> complex:
    s = text.replace(" ", "").replace("i", "j")
    if s.endswith("j") and (len(s) == 1 or s[-2] in "+-"):
        s = s[:-1] + "1j"
    try:
        z = complex(s)
    except ValueError:
        raise UsageError(f"cannot read complex number {text!r}") from None
    if not (math.isfinite(z.real) and math.isfinite(z.imag)):
        raise UsageError("coordinates must be finite")
    return z


def _config(args) -> radial.RadialConfig:
    kw = {}
    if args.angles is not None:
        kw["angle_resolution"] = args.angles
    if args.r0 is not None:
        kw["r0"] = args.r0
    if args.depth is not None:
        kw["depth"] = args.depth
    if args.tol is not None:
        kw["tol_value"] = args.tol
    try:
        return radial.RadialConfig(**kw)
    except ValueError as exc:
        raise UsageError(str(exc)) from None


def _expr(text: str, mode: str, arity: Optional[int] = None):
    return parse(text, mode, arity)


def _shared(p: argparse.ArgumentParser, point_required: bool = True):
    p.add_argument("--point", "--center", dest="point", required=point_required,
                   help="comma-separated reals, a+bi, or a,b,c,d")
    p.add_argument("--tol", type=float, help="angle-agreement tolerance")
    p.add_argument("--angles", type=int, help="angle grid resolution")
    p.add_argument("--r0", type=float, help="initial radius of the ladder")
    p.add_argument("--depth", type=int, help="number of ladder radii")
    p.add_argument("--json", action="store_true", default=True, help="JSON output (default)")
    p.add_argument("--with-oracle", action="store_true", help="also run the brute-force oracle")
    p.add_argument("--seed", type=int, help="seed for the rotation-invariance self-test")


def build_parser() -> argparse.ArgumentParser:
    ap = _Parser(prog="radialcheck", description=__doc__)
    sub = ap.add_subparsers(dest="command", parser_class=_Parser)
    for name in ("limit", "diff", "differential", "classify", "hiderive", "taylor", "converge"):
        p = sub.add_parser(name)
        p.add_argument("expression")
        _shared(p)
    sub.choices["hiderive"].add_argument("--order", type=int, default=2)
    sub.choices["taylor"].add_argument("--degree", type=int, default=4)
    sub.choices["taylor"].add_argument("--at", help="point at which to sum the series")
    sub.choices["converge"].add_argument("--r-max", type=float, default=10.0)
    sub.choices["converge"].add_argument("--degree-budget", type=int,
                                         default=series.DEFAULT_DEGREE_BUDGET)
    p = sub.add_parser("pathlimit")
    p.add_argument("expression")
    _shared(p)
    g = p.add_mutually_exclusive_group(required=True)
    g.add_argument("--ray", help="comma-separated angles of a ray")
    g.add_argument("--power", help="A,N for the curve y = A x^N")
    g.add_argument("--custom", nargs="+", metavar="EXPR_IN_T", help="one offset expression in t per coordinate")
    p = sub.add_parser("extrema")
    p.add_argument("expression")
    _shared(p)
    p.add_argument("--ray", help="solve the radial equation along these angles instead of scanning")
    p.add_argument("--r-max", type=float, default=4.0)
    p.add_argument("--box", help="lo1,hi1,lo2,hi2,... for the grid oracle")
    p.add_argument("--resolution", type=int, default=51)
    p = sub.add_parser("cr")
    p.add_argument("expression")
    _shared(p)
    p.add_argument("--probe-radius", type=float, help="also probe f' over this disc")
    p.add_argument("--samples", type=int, default=16)
    p = sub.add_parser("quat")
    p.add_argument("expression")
    _shared(p)
    p.add_argument("--side", choices=("left", "right"), default="left")
    for name in ("ode", "classify-point"):
        p = sub.add_parser(name)
        p.add_argument("P")
        p.add_argument("Q")
        _shared(p)
    sub.choices["ode"].add_argument("--span", type=float, default=2 * math.pi)
    sub.choices["ode"].add_argument("--step", type=float, default=1e-2)
    sub.add_parser("version")
    return ap


# -- subcommands ------------------------------------------------------------

def _real_expr(args):
    point = _reals(args.point)
    return _expr(args.expression, REAL, len(point)), point


def _rotation(n: int, seed: int) -> np.ndarray:
    rng = np.random.default_rng(seed)
    q, r = np.linalg.qr(rng.standard_normal((n, n)))
    q = q * np.sign(np.diag(r))
    if np.linalg.det(q) < 0:
        q[:, 0] = -q[:, 0]
    return q


def _rotation_self_test(f, point, cfg, seed, check):
    R = _rotation(len(point), seed)
    g = compose_linear(f, R)
    c2 = R.T @ np.asarray(point, dtype=float)
    a, b = check(f, point, cfg), check(g, c2, cfg)
    out = {"seed": seed, "rotation": R, "verdict": a.verdict, "rotated_verdict": b.verdict,
           "verdicts_agree": a.verdict == b.verdict}
    if hasattr(a, "gradient"):
        expect = R.T @ np.asarray(a.gradient)
        out["gradient_covariance_error"] = float(np.max(np.abs(np.asarray(b.gradient) - expect)))
    elif a.value is not None and b.value is not None:
        out["value_difference"] = float(np.max(np.abs(np.subtract(a.value, b.value))))
    return out


def cmd_limit(args, out):
    f, point = _real_expr(args)
    cfg = _config(args)
    report = radial.radial_limit(f, point, cfg)
    out["result"] = report
    f0 = evaluate(f, point)
    out["result_extra"] = {"f_at_center": f0.payload if f0.ok else f0.status.value,
                           "grid_size": len(coords.angle_grid(len(point), cfg.angle_resolution))}
    if args.with_oracle:
        L = report.value if report.value is not None else _reference_value(report)
        if L is not None:
            out["oracle"] = oracle.uniform_limit_oracle(f, point, L, cfg)
    if args.seed is not None:
        out["self_test"] = _rotation_self_test(f, point, cfg, args.seed, radial.radial_limit)
    return report.verdict, bool(report.per_angle and any(a.value is not None for a in report.per_angle))


def _reference_value(report):
    vals = [a.value for a in report.per_angle if a.value is not None and not isinstance(a.value, tuple)]
    return float(np.mean(vals)) if vals else None


def cmd_pathlimit(args, out):
    f, point = _real_expr(args)
    cfg = _config(args)
    try:
        if args.ray is not None:
            path = radial.PathProbe.ray(_reals(args.ray))
        elif args.power is not None:
            a, n = _reals(args.power)
            path = radial.PathProbe.power(a, n)
        else:
            path = radial.PathProbe.custom(*args.custom)
    except ValueError as exc:
        if isinstance(exc, ExprError):
            raise
        raise UsageError(str(exc)) from None
    try:
        report = radial.limit_along_path(f, point, path, cfg)
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    out["result"] = report
    return report.verdict, bool(np.any(np.isfinite(report.values)))


def cmd_diff(args, out):
    f, point = _real_expr(args)
    cfg = _config(args)
    report = radial.differentiability_check(f, point, cfg)
    profile = radial.radial_derivative_profile(f, point, cfg)
    out["result"] = report
    out["result_extra"] = {"profile_defined": profile.defined, "profile_reason": profile.reason}
    if args.with_oracle:
        out["oracle"] = {"fd_gradient": [oracle.fd_partial(f, point, tuple(int(i == j) for j in range(len(point))))
                                         for i in range(len(point))]}
    if args.seed is not None:
        out["self_test"] = _rotation_self_test(f, point, cfg, args.seed, radial.differentiability_check)
    return report.verdict, report.f_center is not None


def cmd_differential(args, out):
    f, point = _real_expr(args)
    cfg = _config(args)
    try:
        d = radial.differential(f, point, cfg)
    except radial.NotDifferentiableError as exc:
        out["result"] = {"verdict": Verdict.NOT_DIFFERENTIABLE, "report": exc.report}
        return exc.report.verdict, exc.report.f_center is not None
    out["result"] = {"verdict": Verdict.DIFFERENTIABLE, "gradient": d.gradient, "text": d.text,
                     "jet_gradient": d.jet_gradient, "agrees_with_jets": d.agrees_with_jets}
    return Verdict.DIFFERENTIABLE, True


def _extrema_cfg(args) -> extrema.ExtremaConfig:
    return extrema.ExtremaConfig(r_max=getattr(args, "r_max", 4.0), radial=_config(args))


def cmd_extrema(args, out):
    f, point = _real_expr(args)
    cfg = _extrema_cfg(args)
    if args.ray is not None:
        roots = extrema.solve_radial_equation(f, point, _reals(args.ray), args.r_max, cfg)
        out["result"] = {"roots": roots}
        verdict = None
    else:
        scan = extrema.radial_stationary_scan(f, point, cfg)
        out["result"] = scan
        verdict = scan.verdict
    if args.with_oracle or args.box:
        if not args.box:
            raise UsageError("--with-oracle for extrema needs --box")
        vals = _reals(args.box)
        if len(vals) != 2 * len(point):
            raise UsageError("--box needs a low,high pair per coordinate")
        box = list(zip(vals[0::2], vals[1::2]))
        try:
            out["oracle"] = oracle.grid_extrema_oracle(f, box, args.resolution)
        except ValueError as exc:
            raise UsageError(str(exc)) from None
    return verdict, True


def cmd_classify(args, out):
    f, point = _real_expr(args)
    try:
        out["result"] = extrema.classify(f, point, _extrema_cfg(args))
    except extrema.NotStationaryError as exc:
        out["result"] = {"error": "NOT_STATIONARY", "message": str(exc), "profile": exc.profile}
        return Verdict.UNDEFINED, False
    return None, True


def cmd_cr(args, out):
    f = _expr(args.expression, COMPLEX)
    z0 = _complex(args.point)
    cfg = _config(args)
    report = cplx.cr_check(f, z0, cfg)
    out["result"] = report
    if args.probe_radius is not None:
        try:
            out["result_extra"] = cplx.derivative_continuity_probe(f, z0, args.probe_radius,
                                                                   args.samples, cfg)
        except ValueError as exc:
            raise UsageError(str(exc)) from None
    return report.verdict, report.verdict is not Verdict.UNDEFINED


def cmd_hiderive(args, out):
    f = _expr(args.expression, COMPLEX)
    z0 = _complex(args.point)
    if args.order < 1:
        raise UsageError("--order must be at least 1")
    res = cplx.higher_derivative(f, z0, args.order, radial_cfg=_config(args))
    out["result"] = res
    return res.verdict, True


def cmd_quat(args, out):
    f = _expr(args.expression, QUATERNION)
    h0 = _reals(args.point)
    if len(h0) != 4:
        raise UsageError("a quaternion point needs four components a,b,c,d")
    report = cplx.quat_diff_check(f, h0, args.side, _config(args))
    out["result"] = report
    return report.verdict, report.verdict is not Verdict.UNDEFINED


def cmd_taylor(args, out):
    center = _reals(args.point)
    f = _expr(args.expression, REAL, 2)
    if len(center) != 2:
        raise UsageError("taylor needs a two-dimensional centre")
    try:
        table = series.taylor_coeffs(f, center, args.degree)
    except series.TaylorError as exc:
        out["result"] = {"error": "UNDEFINED_PARTIAL", "index": exc.index, "message": str(exc)}
        return Verdict.UNDEFINED, False
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    out["result"] = {"degree": table.degree, "center": table.center, "coefficients": table.as_dict(),
                     "gradient": [f_.payload for f_ in (
                         partial_at(f, center, (1, 0)), partial_at(f, center, (0, 1)))]
                     if args.degree >= 1 else []}
    if args.at:
        out["result"]["partial_sum"] = series.eval_partial_sum(table, _reals(args.at))
    return None, True


def cmd_converge(args, out):
    center = _reals(args.point)
    f = _expr(args.expression, REAL, 2)
    try:
        out["result"] = series.polar_convergence_probe(f, center, r_max=args.r_max,
                                                       degree_budget=args.degree_budget)
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    return None, True


def _field_exprs(args):
    return _expr(args.P, REAL, 2), _expr(args.Q, REAL, 2)


def cmd_ode(args, out):
    P, Q = _field_exprs(args)
    start = _reals(args.point)
    if len(start) != 2:
        raise UsageError("ode needs a two-dimensional start point")
    try:
        hf = ode.polar_separate(P, Q)
    except ode.HomogeneityError as exc:
        out["result"] = {"error": exc.code, "message": str(exc)}
        return Verdict.UNDEFINED, False
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    rp = coords.from_cartesian(start, (0.0, 0.0))
    if rp.r == 0:
        raise UsageError("the start point must differ from the origin")
    sol = ode.solve_polar(hf, rp.r, rp.angles[0], args.span, args.step)
    end = coords.to_cartesian(coords.RadialPoint(float(sol.r[-1]), (float(sol.thetas[-1]),), (0.0, 0.0)))
    out["result"] = {"degree": hf.degree, "homogeneity_residual": hf.residual, "solution": sol,
                     "end_point": end}
    if args.with_oracle:
        # ds = r sqrt(1 + G^2) dtheta along the polar solution
        arc = float(abs(np.trapezoid(sol.r * np.sqrt(1.0 + sol.G ** 2), sol.thetas))) \
            if sol.thetas.size > 1 else 0.0
        # march the oracle the same way the polar solution sweeps theta
        x0, y0 = start
        tx, ty = evaluate(Q, start).payload, -evaluate(P, start).payload
        orient = 1.0 if (x0 * ty - y0 * tx) * args.span >= 0 else -1.0
        out["oracle"] = ode.rk4_oracle(P, Q, start, arc, args.step, orient) if arc else None
    return None, True


def cmd_classify_point(args, out):
    P, Q = _field_exprs(args)
    pt = _reals(args.point)
    if len(pt) != 2:
        raise UsageError("classify-point needs a two-dimensional point")
    out["result"] = ode.classify_point(P, Q, pt)
    return None, True


COMMANDS = {
    "limit": cmd_limit, "pathlimit": cmd_pathlimit, "diff": cmd_diff,
    "differential": cmd_differential, "extrema": cmd_extrema, "classify": cmd_classify,
    "cr": cmd_cr, "quat": cmd_quat, "hiderive": cmd_hiderive, "taylor": cmd_taylor,
    "converge": cmd_converge, "ode": cmd_ode, "classify-point": cmd_classify_point,
}


def _config_echo(args) -> dict:
    keys = ("point", "tol", "angles", "r0", "depth", "with_oracle", "seed")
    echo = {k: getattr(args, k) for k in keys if hasattr(args, k)}
    if hasattr(args, "angles"):
        try:
            echo["radial"] = _config(args)
        except UsageError:
            pass
    return echo


def _summary(command: str, verdict) -> str:
    return f"{command}: {verdict.value if isinstance(verdict, Verdict) else 'done'}"


def _attach_negative_values(argv: Sequence[str]) -> List[str]:
    """Rewrite ``--point -1,2`` as ``--point=-1,2`` so argparse keeps the value."""
    out: List[str] = []
    for tok in argv:
        if (out and out[-1].startswith("--") and "=" not in out[-1]
                and re.match(r"^-[0-9.]", tok)):
            out[-1] = f"{out[-1]}={tok}"
        else:
            out.append(tok)
    return out


def run(argv: Sequence[str], stdout=None, stderr=None) -> int:
    stdout = stdout or sys.stdout
    stderr = stderr or sys.stderr
    ap = build_parser()
    try:
        args = ap.parse_args(_attach_negative_values(argv))
        if args.command is None:
            raise UsageError("missing subcommand")
        if args.command == "version":
            stdout.write(json.dumps({"schema_version": SCHEMA_VERSION, "version": __version__},
                                    sort_keys=True) + "\n")
            return EXIT_OK
        out = {"schema_version": SCHEMA_VERSION,
               "command": {"subcommand": args.command, "argv": list(argv),
                           "expression": [getattr(args, k) for k in ("expression", "P", "Q")
                                          if hasattr(args, k)]},
               "config": _config_echo(args), "oracle": None, "warnings": []}
        if args.seed is not None and args.command not in ("limit", "diff"):
            out["warnings"].append("--seed only affects limit and diff")
        verdict, salvageable = COMMANDS[args.command](args, out)
    except UsageError as exc:
        stderr.write(f"radialcheck: error: {exc}\n{GRAMMAR_HINT}\n")
        return EXIT_USAGE
    except ValueError as exc:
        stderr.write(f"radialcheck: error: {exc}\n{GRAMMAR_HINT}\n")
        return EXIT_USAGE
    stdout.write(json.dumps(to_jsonable(out), sort_keys=True, indent=1, allow_nan=False) + "\n")
    stderr.write(_summary(args.command, verdict) + "\n")
    if verdict is Verdict.UNDEFINED and not salvageable:
        return EXIT_EVALUATION
    return EXIT_OK


def main(argv: Optional[Sequence[str]] = None) -> int:
    return run(sys.argv[1:] if argv is None else argv)
