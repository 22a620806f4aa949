"""Homogeneous first-order ODEs ``Q dy + P dx = 0`` in polar form.

With ``x = r cos t`` and ``y = r sin t`` the equation becomes
``dr/dt = r G(t)`` where, for ``P`` and ``Q`` homogeneous of one degree,

    G(t) = (P(u) sin t - Q(u) cos t) / (Q(u) sin t + P(u) cos t),   u = (cos t, sin t)

so ``r(t) = r0 exp(integral of G)``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import List, Optional, Tuple

import numpy as np
from scipy import optimize

from .coords import cos_sin
from .expr import REAL, Expr, evaluate, evaluate_many

LAMBDAS = (2.0, 3.0, 5.0)
N_PROBES = 16
HOMOGENEITY_TOL = 1e-8
POLE_TOL = 1e-12
OPERATIONAL_READING = (
    "more than one integral curve is taken to pass through p when the recentred "
    "denominator Q sin t + P cos t vanishes along at least two distinct lines "
    "through p, or vanishes identically"
)


class HomogeneityError(ValueError):
    code = "HOMOGENEITY_MISMATCH"


@dataclass
class HomogeneousField:
    P: Expr
    Q: Expr
    degree: float
    residual: float

    def parts(self, theta) -> Tuple[np.ndarray, np.ndarray]:
        """Numerator and denominator of ``G`` at the unit direction."""
        c, s = cos_sin(theta)
        pts = np.stack([c, s], axis=-1)
        p, _ = evaluate_many(self.P, pts)
        q, _ = evaluate_many(self.Q, pts)
        return p * s - q * c, q * s + p * c

    def G(self, theta) -> np.ndarray:
        num, den = self.parts(theta)
        with np.errstate(all="ignore"):
            return num / den


@dataclass
class PolarSolution:
    field: HomogeneousField = field(metadata={"json": False})
    theta0: float
    r0: float
    thetas: np.ndarray
    r: np.ndarray
    G: np.ndarray
    truncated: bool
    pole: Optional[float]

    @property
    def points(self) -> np.ndarray:
        c, s = cos_sin(self.thetas)
        return np.stack([self.r * c, self.r * s], axis=1)

    def r_at(self, theta: float) -> float:
        """``r`` at any angle between ``theta0`` and the end of the trajectory."""
        lo, hi = sorted((self.thetas[0], self.thetas[-1]))
        if not lo - 1e-12 <= theta <= hi + 1e-12:
            raise ValueError("angle outside the solved span")
        return self.r0 * math.exp(_simpson(self.field.G, self.theta0, theta))


@dataclass
class Trajectory:
    points: np.ndarray
    arc: np.ndarray
    status: str


@dataclass
class PointClassification:
    point: Tuple[float, float]
    classical_singular: bool
    polar_multi_curve: bool
    zero_directions: List[float]
    reading: str = OPERATIONAL_READING


def _probe_points() -> np.ndarray:
    k = np.arange(N_PROBES)
    angle = k * math.pi * (3.0 - math.sqrt(5.0)) + 0.1
    radius = 0.5 + 0.75 * k / N_PROBES
    c, s = cos_sin(angle)
    return np.stack([radius * c, radius * s], axis=1)


def _homogeneity(f: Expr) -> Tuple[Optional[float], float]:
    """Estimated degree (None for the zero function) and relative residual."""
    pts = _probe_points()
    base, _ = evaluate_many(f, pts)
    if np.all(base == 0):
        scaled = [evaluate_many(f, lam * pts)[0] for lam in LAMBDAS]
        return None, 0.0 if all(np.all(v == 0) for v in scaled) else math.inf
    estimates, pairs = [], []
    for lam in LAMBDAS:
        vals, _ = evaluate_many(f, lam * pts)
        pairs.append((lam, vals))
        with np.errstate(all="ignore"):
            ratio = vals / base
        good = np.isfinite(ratio) & (ratio > 0)
        estimates.extend((np.log(ratio[good]) / math.log(lam)).tolist())
    if not estimates:
        return math.nan, math.inf
    d = float(np.median(estimates))
    worst = 0.0
    for lam, vals in pairs:
        pred = lam ** d * base
        scale = np.maximum(np.maximum(np.abs(vals), np.abs(pred)), 1e-300)
        with np.errstate(all="ignore"):
            rel = np.abs(vals - pred) / scale
        worst = max(worst, float(np.max(np.where(np.isfinite(rel), rel, np.inf))))
    return d, worst


def polar_separate(P: Expr, Q: Expr) -> HomogeneousField:
    """Check that ``P`` and ``Q`` are homogeneous of one degree and return the field."""
    for e in (P, Q):
        if e.mode != REAL or e.arity != 2:
            raise ValueError("P and Q must be real expressions in two variables")
    dp, rp = _homogeneity(P)
    dq, rq = _homogeneity(Q)
    if dp is None and dq is None:
        raise ValueError("P and Q are both identically zero")
    residual = max(rp, rq)
    if residual > HOMOGENEITY_TOL:
        raise HomogeneityError(f"not homogeneous (relative residual {residual:.3g})")
    if dp is not None and dq is not None and abs(dp - dq) > 1e-6:
        raise HomogeneityError(f"degrees differ: P has {dp:.6g}, Q has {dq:.6g}")
    degree = dp if dp is not None else dq
    if abs(degree - round(degree)) < 1e-9:
        degree = float(round(degree))
    return HomogeneousField(P, Q, degree, residual)


def _simpson(g, a: float, b: float, tol: float = 1e-13, depth: int = 50) -> float:
    """Adaptive Simpson quadrature of the vectorised function ``g``."""
    if a == b:
        return 0.0

    def rule(a, fa, m, fm, b, fb):
        return (b - a) / 6.0 * (fa + 4.0 * fm + fb)

    def recurse(a, fa, b, fb, m, fm, whole, tol, depth):
        lm, rm = 0.5 * (a + m), 0.5 * (m + b)
        flm, frm = (float(v) for v in g(np.array([lm, rm])))
        left = rule(a, fa, lm, flm, m, fm)
        right = rule(m, fm, rm, frm, b, fb)
        if depth <= 0 or abs(left + right - whole) <= 15.0 * tol:
            return left + right + (left + right - whole) / 15.0
        return (recurse(a, fa, m, fm, lm, flm, left, 0.5 * tol, depth - 1)
                + recurse(m, fm, b, fb, rm, frm, right, 0.5 * tol, depth - 1))

    m = 0.5 * (a + b)
    fa, fm, fb = (float(v) for v in g(np.array([a, m, b])))
    return recurse(a, fa, b, fb, m, fm, rule(a, fa, m, fm, b, fb), tol, depth)


def _pole_between(hf: HomogeneousField, a: float, b: float) -> Optional[float]:
    da = hf.parts(np.array([a]))[1][0]
    db = hf.parts(np.array([b]))[1][0]
    if abs(db) < POLE_TOL:
        return b
    if da * db < 0:
        root = optimize.brentq(lambda t: hf.parts(np.array([t]))[1][0], min(a, b), max(a, b),
                               xtol=1e-15)
        if abs(hf.parts(np.array([root]))[1][0]) < POLE_TOL:
            return float(root)
    return None


def solve_polar(hf: HomogeneousField, r0: float, theta0: float, theta_span: float,
                step: float = 1e-2) -> PolarSolution:
    """Trajectory ``r(theta)`` through ``(r0, theta0)`` over ``theta_span``.

    The run stops before the first pole of ``G`` (the denominator changes sign
    through zero) or where ``r`` stops being a positive finite number.
    """
    if r0 <= 0:
        raise ValueError("r0 must be positive")
    if step <= 0:
        raise ValueError("step must be positive")
    n = int(math.ceil(abs(theta_span) / step)) if theta_span else 0
    nodes = theta0 + np.linspace(0.0, theta_span, n + 1) if n else np.array([theta0])
    thetas, rs = [theta0], [r0]
    pole, truncated = None, False
    if abs(hf.parts(np.array([theta0]))[1][0]) < POLE_TOL:
        pole, truncated = theta0, True
    else:
        log_r = math.log(r0)
        for a, b in zip(nodes[:-1], nodes[1:]):
            pole = _pole_between(hf, a, b)
            if pole is not None:
                truncated = True
                break
            log_r += _simpson(hf.G, a, b)
            if not math.isfinite(log_r) or log_r > 700 or log_r < -700:
                truncated = True
                break
            thetas.append(float(b))
            rs.append(math.exp(log_r))
    thetas = np.array(thetas)
    return PolarSolution(hf, float(theta0), float(r0), thetas, np.array(rs), hf.G(thetas),
                         truncated, pole)


def rk4_oracle(P: Expr, Q: Expr, start, arc_length: float, step: float = 1e-2,
               orientation: float = 1.0) -> Trajectory:
    """Classical RK4 along the unit tangent ``(Q, -P) / |(Q, -P)|`` by arc length.

    Halts with status ``CRITICAL_POINT`` where ``P`` and ``Q`` both vanish.
    """
    n = max(1, int(math.ceil(abs(arc_length) / step)))
    h = arc_length / n * orientation

    def tangent(p):
        pv = evaluate(P, p)
        qv = evaluate(Q, p)
        if not (pv.ok and qv.ok):
            return None
        v = np.array([qv.payload, -pv.payload])
        norm = float(np.hypot(*v))
        return None if norm < 1e-14 else v / norm

    p = np.asarray(start, dtype=float)
    pts, arc = [p.copy()], [0.0]
    status = "OK"
    for i in range(n):
        k1 = tangent(p)
        k2 = None if k1 is None else tangent(p + 0.5 * h * k1)
        k3 = None if k2 is None else tangent(p + 0.5 * h * k2)
        k4 = None if k3 is None else tangent(p + h * k3)
        if k4 is None:
            status = "CRITICAL_POINT"
            break
        p = p + h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
        pts.append(p.copy())
        arc.append(abs(h) * (i + 1))
    return Trajectory(np.array(pts), np.array(arc), status)


def _zero_directions(den, resolution: int = 512) -> Tuple[List[float], bool]:
    """Distinct lines (angles mod pi) along which ``den`` vanishes."""
    theta = 2.0 * np.pi * np.arange(resolution) / resolution
    vals = den(theta)
    scale = float(np.max(np.abs(vals)))
    if not np.isfinite(scale):
        return [], False
    if scale <= 1e-300:
        return [], True
    f = lambda t: float(den(np.array([t]))[0]) / scale
    half = np.pi / resolution
    zeros = []
    for k in range(resolution):
        a, b = vals[k], vals[(k + 1) % resolution]
        if a == 0.0:
            zeros.append(float(theta[k]))
        elif a * b < 0:
            zeros.append(float(optimize.brentq(f, theta[k], theta[k] + 2 * half, xtol=1e-14)))
    # tangential zeros that do not change sign
    mag = np.abs(vals) / scale
    for k in range(resolution):
        if mag[k] <= mag[k - 1] and mag[k] <= mag[(k + 1) % resolution] and 0 < mag[k] < 1e-3:
            res = optimize.minimize_scalar(lambda t: abs(f(t)), method="bounded",
                                           bounds=(theta[k] - half, theta[k] + half),
                                           options={"xatol": 1e-12})
            if abs(f(res.x)) < 1e-9:
                zeros.append(float(res.x))
    distinct: List[float] = []
    for z in sorted(z % math.pi for z in zeros):
        if not any(min(abs(z - d), math.pi - abs(z - d)) < 1e-3 for d in distinct):
            distinct.append(z)
    return distinct, False


def classify_point(P: Expr, Q: Expr, p, probe_radius: float = 1e-6) -> PointClassification:
    """Classical singularity flag and the multi-curve flag at ``p``.

    The multi-curve test is an operational reading: it looks for directions
    at ``p`` along which the recentred denominator vanishes.
    """
    p = np.asarray(p, dtype=float)
    pv, qv = evaluate(P, p), evaluate(Q, p)
    classical = pv.ok and qv.ok and abs(pv.payload) <= 1e-12 and abs(qv.payload) <= 1e-12

    def den(theta):
        c, s = cos_sin(theta)
        pts = p + probe_radius * np.stack([c, s], axis=-1)
        pp, _ = evaluate_many(P, pts)
        qq, _ = evaluate_many(Q, pts)
        return qq * s + pp * c

    zeros, identically = _zero_directions(den)
    multi = identically or len(zeros) >= 2
    return PointClassification(tuple(p.tolist()), bool(classical), bool(multi), zeros)
