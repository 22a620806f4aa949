"""Stationary points by radial line search and their radial signature.

Along a ray ``F(r) = f(c + r u)`` the stationarity condition is the radial
equation ``dF/dr = 0``. The scan repeatedly moves from the current centre
to the nearest root of that equation along the direction of steepest
radial change. A stationary point is classified by the sign pattern of the
second radial derivative over all directions.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from typing import List, Optional, Sequence, Tuple

import numpy as np

from . import _ladder
from .coords import HyperAngles, grid_directions, unit_vectors
from .expr import REAL, Expr, evaluate, evaluate_many, partial_at, ray_coefficients
from .radial import AngleValue, RadialConfig, differentiability_check
from .report import Verdict


class Classification(str, enum.Enum):
    MAX = "MAX"
    MIN = "MIN"
    SADDLE = "SADDLE"
    DEGENERATE = "DEGENERATE"
    INCONCLUSIVE = "INCONCLUSIVE"


@dataclass(frozen=True)
class ExtremaConfig:
    r_max: float = 4.0
    subintervals: int = 256
    root_tol: float = 1e-10
    stationary_tol: float = 1e-8
    classify_tol: float = 1e-6
    max_iter: int = 200
    dedup_tol: float = 1e-6
    radial: RadialConfig = RadialConfig()

    def __post_init__(self):
        if self.r_max <= 0 or self.subintervals < 2 or self.max_iter < 1:
            raise ValueError("need r_max > 0, subintervals >= 2 and max_iter >= 1")


@dataclass
class HessianOracle:
    fxx: float
    fyy: float
    fxy: float
    discriminant: float
    verdict: Classification


@dataclass
class StationaryReport:
    point: Tuple[float, ...]
    profile: List[AngleValue]
    s_min: float
    s_max: float
    degenerate_directions: List[HyperAngles]
    classification: Classification
    hessian_oracle: Optional[HessianOracle]


@dataclass
class ScanResult:
    verdict: Verdict
    points: List[Tuple[float, ...]]
    iterations: int
    trace: List[Tuple[float, ...]]
    differentiable: List[bool] = field(default_factory=list)
    reason: str = ""


class NotStationaryError(ValueError):
    """Raised by :func:`classify`; ``profile`` holds the radial derivatives."""

    def __init__(self, point, profile: List[AngleValue], max_slope: float):
        point = tuple(float(x) for x in point)
        super().__init__(f"{point} is not stationary (max |dF/dr| = {max_slope:.3g})")
        self.point = point
        self.profile = profile
        self.max_slope = max_slope


def _check(f: Expr, c) -> np.ndarray:
    if f.mode != REAL:
        raise ValueError("extrema need a real-mode expression")
    c = np.asarray(c, dtype=float).reshape(-1)
    if c.size != f.arity:
        raise ValueError("point arity does not match the expression")
    return c


def _slope(f: Expr, c: np.ndarray, u: np.ndarray, r: np.ndarray) -> np.ndarray:
    """``dF/dr`` at radii ``r`` along unit direction ``u`` from ``c``."""
    base = c[:, None] + u[:, None] * r[None, :]
    return ray_coefficients(f, base, u[:, None], 1)[1]


def radial_slopes(f: Expr, c, dirs: np.ndarray) -> np.ndarray:
    """Directional derivatives ``g(theta) = dF/dr`` at r = 0 for each row of ``dirs``."""
    c = np.asarray(c, dtype=float)
    base = np.broadcast_to(c[:, None], (c.size, dirs.shape[0]))
    return ray_coefficients(f, base, dirs.T, 1)[1]


def _roots_along(f: Expr, c: np.ndarray, u: np.ndarray, cfg: ExtremaConfig) -> List[float]:
    r = np.linspace(0.0, cfg.r_max, cfg.subintervals + 1)
    g = _slope(f, c, u, r)
    scale = 1.0 + float(np.median(np.abs(g[np.isfinite(g)]))) if np.any(np.isfinite(g)) else 1.0
    roots = [float(r[j]) for j in range(1, r.size) if g[j] == 0.0]
    for j in range(r.size - 1):
        a, b = g[j], g[j + 1]
        if not (np.isfinite(a) and np.isfinite(b)) or a * b >= 0:
            continue
        lo, hi, glo = r[j], r[j + 1], a
        while hi - lo > cfg.root_tol:
            mid = 0.5 * (lo + hi)
            gm = _slope(f, c, u, np.array([mid]))[0]
            if not np.isfinite(gm):
                break
            if (gm < 0) == (glo < 0):
                lo, glo = mid, gm
            else:
                hi = mid
        root = 0.5 * (lo + hi)
        groot = _slope(f, c, u, np.array([root]))[0]
        # a sign change through a pole leaves a large slope behind
        if np.isfinite(groot) and abs(groot) <= 1e-6 * scale:
            roots.append(float(root))
    return sorted(set(roots))


def solve_radial_equation(f: Expr, c, theta, r_max: Optional[float] = None,
                          cfg: ExtremaConfig = ExtremaConfig()) -> List[float]:
    """Roots ``r > 0`` of ``dF/dr = 0`` along the ray at angles ``theta``."""
    c = _check(f, c)
    if r_max is not None:
        cfg = ExtremaConfig(**{**cfg.__dict__, "r_max": float(r_max)})
    u = unit_vectors([np.atleast_1d(np.asarray(theta, dtype=float))])[0]
    if u.size != c.size:
        raise ValueError("angle count must be dimension - 1")
    return _roots_along(f, c, u, cfg)


def radial_stationary_scan(f: Expr, start, cfg: ExtremaConfig = ExtremaConfig()) -> ScanResult:
    """Iterative radial line search from one start or an array of starts.

    At each centre the grid direction with the largest ``|g|`` is chosen
    (ties go to the smaller angle) and the centre moves to the nearest root
    of the radial equation on that ray or its opposite (ties go to the
    original ray).
    """
    starts = np.atleast_2d(np.asarray(start, dtype=float))
    n = starts.shape[1]
    grid, dirs = grid_directions(n, cfg.radial.angle_resolution)
    points: List[Tuple[float, ...]] = []
    trace: List[Tuple[float, ...]] = []
    total = 0
    failed = []
    for s in starts:
        c = _check(f, s)
        trace.append(tuple(c.tolist()))
        done = False
        for _ in range(cfg.max_iter):
            total += 1
            g = radial_slopes(f, c, dirs)
            if not np.all(np.isfinite(g)):
                failed.append(f"radial derivative undefined at {tuple(c.tolist())}")
                break
            best = float(np.max(np.abs(g)))
            if best <= cfg.stationary_tol:
                done = True
                break
            k = int(np.flatnonzero(np.abs(g) >= best - 1e-8)[0])
            u = dirs[k]
            forward = _roots_along(f, c, u, cfg)
            backward = _roots_along(f, c, -u, cfg)
            options = [(forward[0], 0, u)] if forward else []
            if backward:
                options.append((backward[0], 1, -u))
            if not options:
                failed.append(f"no root of the radial equation from {tuple(c.tolist())}")
                break
            r, _, step = min(options, key=lambda o: (o[0], o[1]))
            c = c + r * step
            trace.append(tuple(c.tolist()))
        else:
            failed.append(f"iteration cap {cfg.max_iter} reached")
        if done and not any(np.linalg.norm(c - np.array(p)) <= cfg.dedup_tol for p in points):
            points.append(tuple(c.tolist()))
    diff = [differentiability_check(f, p, cfg.radial).verdict is Verdict.DIFFERENTIABLE
            for p in points]
    verdict = Verdict.NOT_CONVERGED if failed else Verdict.CONVERGED
    return ScanResult(verdict, points, total, trace, diff, "; ".join(failed))


def hessian_oracle(f: Expr, p, tol: float = 1e-8) -> HessianOracle:
    """Classical second-derivative test in two variables from exact jets."""
    p = tuple(float(x) for x in p)
    fxx = partial_at(f, p, (2, 0)).payload
    fyy = partial_at(f, p, (0, 2)).payload
    fxy = partial_at(f, p, (1, 1)).payload
    disc = fxx * fyy - fxy ** 2
    scale = (1.0 + abs(fxx) + abs(fyy) + abs(fxy)) ** 2
    if not math.isfinite(disc) or abs(disc) <= tol * scale:
        verdict = Classification.INCONCLUSIVE
    elif disc < 0:
        verdict = Classification.SADDLE
    else:
        verdict = Classification.MAX if fxx < 0 else Classification.MIN
    return HessianOracle(fxx, fyy, fxy, disc, verdict)


def second_radial_profile(f: Expr, p, cfg: RadialConfig = RadialConfig()
                          ) -> Tuple[list, np.ndarray, np.ndarray]:
    """``s(theta) = lim [F(r, theta) + F(r, theta + pi) - 2 F(0)] / r**2``.

    The symmetric form removes the first-order term exactly, so a centre
    that is stationary only to rounding precision does not bias ``s``.
    """
    p = np.asarray(p, dtype=float)
    grid, dirs = grid_directions(p.size, cfg.angle_resolution)
    radii = cfg.radii()
    f0 = evaluate(f, p)
    plus = p[None, None, :] + radii[None, :, None] * dirs[:, None, :]
    minus = p[None, None, :] - radii[None, :, None] * dirs[:, None, :]
    fp, cp = evaluate_many(f, plus)
    fm, cm = evaluate_many(f, minus)
    with np.errstate(all="ignore"):
        q = (fp + fm - 2.0 * f0.payload) / radii[None, :] ** 2
    idx = _ladder.window_indices(radii, 2)
    est, _ = _ladder.richardson(q[:, idx], cfg.shrink, power_step=2)
    ok = np.all((cp == 0) & (cm == 0), axis=1)[:, None]
    est = np.where(ok[:, 0], est, np.nan)
    return grid, dirs, est


def classify(f: Expr, p, cfg: ExtremaConfig = ExtremaConfig()) -> StationaryReport:
    """Classify a stationary point by the sign pattern of ``s(theta)``.

    MAX when ``s <= tol`` everywhere with some ``s < -tol`` (directions with
    ``|s| <= tol`` are reported as degenerate), MIN symmetrically, SADDLE
    when both signs occur, DEGENERATE otherwise.
    """
    p = _check(f, p)
    grid, dirs = grid_directions(p.size, cfg.radial.angle_resolution)
    g = radial_slopes(f, p, dirs)
    slope_profile = [AngleValue(a, float(v)) for a, v in zip(grid, g)]
    worst = float(np.max(np.abs(g))) if np.all(np.isfinite(g)) else math.inf
    if worst > cfg.classify_tol:
        raise NotStationaryError(p, slope_profile, worst)
    grid, dirs, s = second_radial_profile(f, p, cfg.radial)
    tol = cfg.classify_tol
    profile = [AngleValue(a, float(v) if np.isfinite(v) else None) for a, v in zip(grid, s)]
    if not np.all(np.isfinite(s)):
        cls = Classification.DEGENERATE
        s_min = s_max = math.nan
    else:
        s_min, s_max = float(s.min()), float(s.max())
        if s_max <= tol and s_min < -tol:
            cls = Classification.MAX
        elif s_min >= -tol and s_max > tol:
            cls = Classification.MIN
        elif s_min < -tol and s_max > tol:
            cls = Classification.SADDLE
        else:
            cls = Classification.DEGENERATE
    degenerate = [a for a, v in zip(grid, s) if np.isfinite(v) and abs(v) <= tol]
    oracle = hessian_oracle(f, p) if p.size == 2 else None
    return StationaryReport(tuple(p.tolist()), profile, s_min, s_max, degenerate, cls, oracle)
