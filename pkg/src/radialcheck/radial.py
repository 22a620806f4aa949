"""Radial limits and differentiability in hyperspherical coordinates.

Every check recentres ``f`` at the point ``c`` and samples
``F(r, theta) = f(c + r u(theta))`` on a geometric radius ladder for each
direction of an angle grid. Per-direction limits come from Richardson
extrapolation of the ladder tail. A limit exists when those per-direction
limits agree and the sup-over-angles deviation shrinks uniformly. ``f`` is
differentiable when the radial derivative ``g(theta)`` is a linear form in
the direction vector and ``(F - F(0))/r`` converges to it uniformly.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple, Union

import numpy as np

from . import _ladder
from .coords import HyperAngles, grid_directions, grid_spacing, unit_vectors
from .expr import REAL, VARIABLE, Expr, evaluate, evaluate_many, parse, partial_at, underflows
from .expr.tree import variable_name
from .report import Verdict

Function = Union[Expr, Sequence[Expr]]
Value = Union[float, Tuple[float, ...]]


@dataclass(frozen=True)
class RadialConfig:
    r0: float = 1e-1
    shrink: float = 0.5
    depth: int = 24
    angle_resolution: int = 64
    tol_value: float = 1e-6
    tol_exist: float = 1e-3
    refine_rounds: int = 3

    def __post_init__(self):
        if not 0.0 < self.shrink < 1.0:
            raise ValueError("shrink must lie in (0, 1)")
        if self.depth < 8:
            raise ValueError("depth must be at least 8")
        if not self.tol_value < self.tol_exist:
            raise ValueError("tol_value must be smaller than tol_exist")
        if self.r0 <= 0:
            raise ValueError("r0 must be positive")
        if self.angle_resolution < 4:
            raise ValueError("angle_resolution must be at least 4")
        if self.refine_rounds < 0:
            raise ValueError("refine_rounds must be nonnegative")

    def radii(self) -> np.ndarray:
        return _ladder.geometric_ladder(self.r0, self.shrink, self.depth)


@dataclass
class AngleValue:
    """A direction and the quantity extrapolated along it (None if undefined)."""

    angles: HyperAngles
    value: Optional[Value]


@dataclass
class LimitReport:
    verdict: Verdict
    center: Tuple[float, ...]
    value: Optional[Value]
    per_angle: List[AngleValue]
    spread: float
    singular_angles: List[HyperAngles]
    uniformity: np.ndarray
    radii: np.ndarray
    reason: str = ""

    def limit_at(self, angles) -> Optional[Value]:
        """Per-angle limit at the grid direction nearest to ``angles``."""
        target = unit_vectors([np.atleast_1d(angles)])[0]
        dirs = unit_vectors([a.angles for a in self.per_angle])
        k = int(np.argmin(np.linalg.norm(dirs - target, axis=1)))
        return self.per_angle[k].value


@dataclass
class DerivativeProfile:
    defined: bool
    center: Tuple[float, ...]
    f_center: Optional[Value]
    per_angle: List[AngleValue]
    limit: Optional[LimitReport]
    reason: str = ""
    quotients: np.ndarray = field(default=None, repr=False, metadata={"json": False})
    directions: np.ndarray = field(default=None, repr=False, metadata={"json": False})

    @property
    def values(self) -> np.ndarray:
        return np.array([np.nan if a.value is None else a.value for a in self.per_angle])


@dataclass
class DiffReport:
    verdict: Verdict
    center: Tuple[float, ...]
    f_center: Optional[float]
    per_angle: List[AngleValue]
    gradient: np.ndarray
    linear_residual: float
    uniform_residual: float
    uniformity: np.ndarray
    profile_defined: bool
    limit: Optional[LimitReport]
    reason: str = ""


@dataclass(frozen=True)
class PathProbe:
    """A curve ``t -> c + offset(t)`` approaching the centre as ``t -> 0+``.

    ``family`` is ``"ray"`` (fixed angles), ``"power"`` (offset ``(t, a t**n)``
    in two dimensions) or ``"custom"`` (one expression in ``t`` per coordinate,
    giving the offset from the centre).
    """

    family: str
    angles: Optional[HyperAngles] = None
    a: float = 1.0
    n: float = 1.0
    components: Tuple[Expr, ...] = ()

    @classmethod
    def ray(cls, angles) -> "PathProbe":
        return cls("ray", angles=tuple(float(a) for a in np.atleast_1d(angles)))

    @classmethod
    def power(cls, a: float, n: float) -> "PathProbe":
        if n <= 0:
            raise ValueError("power-curve exponent must be positive")
        return cls("power", a=float(a), n=float(n))

    @classmethod
    def custom(cls, *texts: str) -> "PathProbe":
        comps = tuple(parse(t, REAL, 1, names=("t",)) for t in texts)
        probe = cls("custom", components=comps)
        tail = probe.offsets(np.array([1e-12]))[0]
        if not np.all(np.isfinite(tail)) or np.linalg.norm(tail) > 1e-4:
            raise ValueError("custom path must approach the centre as t -> 0+")
        return probe

    def dimension(self) -> Optional[int]:
        if self.family == "ray":
            return len(self.angles) + 1
        if self.family == "power":
            return 2
        return len(self.components)

    def offsets(self, t: np.ndarray) -> np.ndarray:
        t = np.asarray(t, dtype=float)
        if self.family == "ray":
            return t[:, None] * unit_vectors([self.angles])[0][None, :]
        if self.family == "power":
            return np.stack([t, self.a * t ** self.n], axis=1)
        if self.family == "custom":
            cols = [evaluate_many(e, t[:, None])[0] for e in self.components]
            return np.stack(cols, axis=1)
        raise ValueError(f"unknown path family {self.family!r}")


@dataclass
class PathLimitReport:
    verdict: Verdict
    value: Optional[float]
    parameters: np.ndarray
    values: np.ndarray
    precision_limited: bool
    reason: str = ""


class NotDifferentiableError(ValueError):
    """Raised by :func:`differential`; ``report`` holds the failed check."""

    def __init__(self, report: DiffReport):
        super().__init__(f"not differentiable at {report.center}: {report.reason}")
        self.report = report


@dataclass
class Differential:
    gradient: np.ndarray
    text: str
    jet_gradient: np.ndarray
    agrees_with_jets: bool
    report: DiffReport

    def __str__(self):
        return self.text


# -- sampling -------------------------------------------------------------

def _components(f: Function) -> List[Expr]:
    fs = [f] if isinstance(f, Expr) else list(f)
    if not fs:
        raise ValueError("empty function")
    for e in fs:
        if e.mode != REAL:
            raise ValueError("radial checks need real-mode expressions")
        if e.arity != fs[0].arity:
            raise ValueError("vector components must share one arity")
    return fs


def _center(fs: List[Expr], c) -> np.ndarray:
    c = np.asarray(c, dtype=float).reshape(-1)
    if c.size != fs[0].arity:
        raise ValueError(f"centre has {c.size} coordinates, expression arity is {fs[0].arity}")
    if c.size < 2:
        raise ValueError("radial checks need at least two variables")
    if not np.all(np.isfinite(c)):
        raise ValueError("centre must be finite")
    return c


def _sample(fs: List[Expr], pts: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    """Values with a trailing component axis and a joint finiteness mask."""
    vals, oks = [], []
    for e in fs:
        v, codes = evaluate_many(e, pts)
        vals.append(v)
        oks.append(codes == 0)
    return np.stack(vals, axis=-1), np.logical_and.reduce(oks)


def _ray_points(c, dirs, radii):
    return c[None, None, :] + radii[None, :, None] * dirs[:, None, :]


def _value(v) -> Value:
    v = np.asarray(v, dtype=float).reshape(-1)
    return float(v[0]) if v.size == 1 else tuple(float(x) for x in v)


def _extrapolate(vals, ok, radii, order, ratio, tol):
    """Per-direction Richardson limits. ``vals`` is (D, K, C)."""
    idx = _ladder.window_indices(radii, order)
    window = np.moveaxis(vals[:, idx, :], 1, -1)
    est, err = _ladder.richardson(window, ratio)
    good = np.all(ok[:, idx], axis=1) & np.all(_ladder.settled(est, err, tol), axis=1)
    return est, good


def _directional_limits(fs, c, angles, cfg):
    dirs = unit_vectors(angles)
    radii = cfg.radii()
    vals, ok = _sample(fs, _ray_points(c, dirs, radii))
    est, good = _extrapolate(vals, ok, radii, 0, cfg.shrink, cfg.tol_exist)
    return dirs, vals, ok, est, good


def _refinement_angles(n_dim, base: HyperAngles, spacing: np.ndarray, rounds: int):
    out = []
    for j in range(1, rounds + 1):
        for axis in range(n_dim - 1):
            for sign in (-1.0, 1.0):
                a = list(base)
                a[axis] = a[axis] + sign * spacing[axis] * 0.5 ** j
                out.append(tuple(a))
    return out


# -- limits ---------------------------------------------------------------

def radial_limit(f: Function, c, cfg: RadialConfig = RadialConfig()) -> LimitReport:
    """Decide whether ``lim f(x)`` as ``x -> c`` exists.

    Returns ``UNDEFINED`` when some direction has an undefined or
    non-settling radial sequence, ``NOT_EXISTS`` when the directional limits
    disagree or do not converge uniformly, and ``EXISTS`` otherwise.
    """
    fs = _components(f)
    c = _center(fs, c)
    n = c.size
    grid, _ = grid_directions(n, cfg.angle_resolution)
    dirs, vals, ok, est, good = _directional_limits(fs, c, grid, cfg)
    angles = list(grid)

    bad = [grid[i] for i in np.flatnonzero(~good)]
    if bad and cfg.refine_rounds:
        spacing = grid_spacing(n, grid)
        extra = []
        for a in bad:
            extra.extend(_refinement_angles(n, a, spacing, cfg.refine_rounds))
        d2, v2, ok2, e2, g2 = _directional_limits(fs, c, extra, cfg)
        angles += extra
        dirs = np.concatenate([dirs, d2])
        vals = np.concatenate([vals, v2])
        ok = np.concatenate([ok, ok2])
        est = np.concatenate([est, e2])
        good = np.concatenate([good, g2])

    per_angle = [AngleValue(a, _value(e) if g else None) for a, e, g in zip(angles, est, good)]
    singular = [a for a, g in zip(angles, good) if not g]
    finite = est[good]
    spread = float(np.max(np.ptp(finite, axis=0))) if finite.size else math.nan
    radii = cfg.radii()

    if finite.size:
        ref = finite.mean(axis=0)
        with np.errstate(invalid="ignore"):
            dev = np.max(np.abs(vals - ref[None, None, :]), axis=2)
        dev = np.where(ok, dev, np.nan)
        uniformity = np.array([np.nanmax(col) if np.any(ok[:, k]) else math.nan
                               for k, col in enumerate(dev.T)])
    else:
        ref = None
        uniformity = np.full(radii.size, math.nan)

    common = dict(center=tuple(c.tolist()), per_angle=per_angle, spread=spread,
                  singular_angles=singular, uniformity=uniformity, radii=radii)
    if singular:
        return LimitReport(Verdict.UNDEFINED, value=None,
                           reason=f"{len(singular)} direction(s) with undefined or divergent radial sequence",
                           **common)
    if not spread < cfg.tol_value:
        return LimitReport(Verdict.NOT_EXISTS, value=None,
                           reason=f"directional limits spread {spread:.3g}", **common)
    slack = cfg.tol_value * (1.0 + float(np.max(np.abs(ref))))
    if not _ladder.eventually_decreasing(uniformity, cfg.tol_exist, slack):
        return LimitReport(Verdict.NOT_EXISTS, value=None,
                           reason="convergence is not uniform in the angles", **common)
    return LimitReport(Verdict.EXISTS, value=_value(ref), **common)


def _clean(fs, pt) -> bool:
    vals, ok = _sample(fs, pt[None, :])
    return bool(ok[0]) and not any(underflows(e, pt) for e in fs)


def limit_along_path(f: Function, c, path: PathProbe,
                     cfg: RadialConfig = RadialConfig()) -> PathLimitReport:
    """Limit of ``f`` along ``path`` as its parameter tends to 0 from above.

    When evaluations break down before the end of the ladder (for example
    because an intermediate underflows), the ladder is rebuilt between
    ``r0`` and the smallest parameter that still evaluates cleanly.
    """
    fs = _components(f)
    c = _center(fs, c)
    if path.dimension() != c.size:
        raise ValueError("path dimension does not match the centre")
    t = cfg.radii()
    pts = c[None, :] + path.offsets(t)
    vals, ok = _sample(fs, pts)
    ratio = cfg.shrink
    limited = False
    if not np.all(ok[-_ladder.WINDOW:]):
        limited = True
        clean = [_clean(fs, p) for p in pts]
        prefix = next((k for k, flag in enumerate(clean) if not flag), len(clean))
        if prefix == 0:
            return PathLimitReport(Verdict.UNDEFINED, None, t, vals[..., 0], True,
                                   "path evaluation undefined at every ladder point")
        if prefix >= _ladder.WINDOW:
            t = t[:prefix]
        else:
            lo, hi = math.log(t[prefix]), math.log(t[prefix - 1])
            for _ in range(60):
                mid = 0.5 * (lo + hi)
                if _clean(fs, c + path.offsets(np.array([math.exp(mid)]))[0]):
                    hi = mid
                else:
                    lo = mid
            floor = math.exp(hi)
            ratio = (floor / cfg.r0) ** (1.0 / (_ladder.WINDOW - 1))
            t = cfg.r0 * ratio ** np.arange(_ladder.WINDOW)
            t[-1] = floor
        pts = c[None, :] + path.offsets(t)
        vals, ok = _sample(fs, pts)
    window = np.moveaxis(vals[None, -_ladder.WINDOW:, :], 1, -1)
    est, err = _ladder.richardson(window, ratio)
    if not (np.all(ok[-_ladder.WINDOW:]) and np.all(_ladder.settled(est, err, cfg.tol_exist))):
        return PathLimitReport(Verdict.NOT_EXISTS, None, t, vals[..., 0], limited,
                               "parameter sequence does not settle")
    return PathLimitReport(Verdict.EXISTS, _value(est[0]), t, vals[..., 0], limited)


# -- derivatives ----------------------------------------------------------

def radial_derivative_profile(f: Expr, c, cfg: RadialConfig = RadialConfig()) -> DerivativeProfile:
    """Radial derivative ``g(theta) = lim (F(r, theta) - F(0)) / r`` per direction.

    The profile is only defined when ``f`` is continuous at ``c``.
    """
    fs = _components(f)
    c = _center(fs, c)
    n = c.size
    grid, dirs = grid_directions(n, cfg.angle_resolution)
    radii = cfg.radii()
    f0 = evaluate(fs[0], c) if len(fs) == 1 else None
    if len(fs) != 1:
        raise ValueError("derivative profiles need a scalar function")
    empty = [AngleValue(a, None) for a in grid]
    if not f0.ok:
        return DerivativeProfile(False, tuple(c.tolist()), None, empty, None,
                                 f"f is {f0.status.value} at the centre")
    lim = radial_limit(fs, c, cfg)
    if lim.verdict is not Verdict.EXISTS:
        return DerivativeProfile(False, tuple(c.tolist()), f0.payload, empty, lim,
                                 f"limit at the centre is {lim.verdict.value}")
    if abs(lim.value - f0.payload) > cfg.tol_value * (1.0 + abs(f0.payload)):
        return DerivativeProfile(False, tuple(c.tolist()), f0.payload, empty, lim,
                                 "f is discontinuous at the centre")
    vals, ok = _sample(fs, _ray_points(c, dirs, radii))
    with np.errstate(all="ignore"):
        quot = (vals[..., 0] - f0.payload) / radii[None, :]
    est, good = _extrapolate(quot[..., None], ok, radii, 1, cfg.shrink, cfg.tol_exist)
    per_angle = [AngleValue(a, float(e[0]) if g else None) for a, e, g in zip(grid, est, good)]
    quot = np.where(ok, quot, np.nan)
    reason = "" if np.all(good) else f"{int(np.sum(~good))} direction(s) without a radial derivative"
    return DerivativeProfile(bool(np.all(good)), tuple(c.tolist()), f0.payload, per_angle, lim,
                             reason, quotients=quot, directions=dirs)


def differentiability_check(f: Expr, c, cfg: RadialConfig = RadialConfig()) -> DiffReport:
    """Differentiability at ``c`` from the radial derivative profile.

    Requires a defined profile that is a linear form ``grad . u`` and a
    uniform residual ``sup |(F - F0)/r - grad . u|`` that settles below
    ``tol_exist``.
    """
    prof = radial_derivative_profile(f, c, cfg)
    n = len(prof.center)
    nan_grad = np.full(n, math.nan)
    if prof.f_center is None:
        return DiffReport(Verdict.UNDEFINED, prof.center, None, prof.per_angle, nan_grad,
                          math.inf, math.inf, np.array([]), False, prof.limit, prof.reason)
    g = prof.values
    dirs = prof.directions
    if dirs is None:
        _, dirs = grid_directions(n, cfg.angle_resolution)
    finite = np.isfinite(g)
    if np.sum(finite) >= n:
        grad = np.linalg.lstsq(dirs[finite], g[finite], rcond=None)[0]
        linear = float(np.max(np.abs(g[finite] - dirs[finite] @ grad)))
        if not np.all(finite):
            linear = math.inf
    else:
        grad, linear = nan_grad, math.inf
    if prof.quotients is not None and np.all(np.isfinite(grad)):
        with np.errstate(invalid="ignore"):
            dev = np.abs(prof.quotients - (dirs @ grad)[:, None])
        dev = np.where(np.isnan(dev), math.inf, dev)
        uniformity = dev.max(axis=0)
    else:
        uniformity = np.full(cfg.depth, math.inf)
    uniform = float(uniformity[-1]) if uniformity.size else math.inf
    slack = cfg.tol_value * (1.0 + float(np.linalg.norm(grad)) if np.all(np.isfinite(grad)) else 1.0)
    common = dict(center=prof.center, f_center=prof.f_center, per_angle=prof.per_angle,
                  gradient=grad, linear_residual=linear, uniform_residual=uniform,
                  uniformity=uniformity, profile_defined=prof.defined, limit=prof.limit)
    if not prof.defined:
        return DiffReport(Verdict.NOT_DIFFERENTIABLE, reason=prof.reason, **common)
    if not linear < cfg.tol_value:
        return DiffReport(Verdict.NOT_DIFFERENTIABLE,
                          reason=f"radial derivative is not linear in the direction (residual {linear:.3g})",
                          **common)
    if not (uniform < cfg.tol_exist and _ladder.eventually_decreasing(uniformity, cfg.tol_exist, slack)):
        return DiffReport(Verdict.NOT_DIFFERENTIABLE,
                          reason="difference quotients do not converge uniformly", **common)
    return DiffReport(Verdict.DIFFERENTIABLE, **common)


def _variable_names(f: Expr, n: int) -> List[str]:
    seen = {v.index: v.name for v in f.walk() if v.kind == VARIABLE and v.name}
    letters = n <= 3 and set(seen.values()) <= set("xyz")
    default = (lambda i: "xyz"[i - 1]) if letters else (lambda i: variable_name(i, REAL, n))
    return [seen.get(i) or default(i) for i in range(1, n + 1)]


def differential(f: Expr, c, cfg: RadialConfig = RadialConfig()) -> Differential:
    """The differential ``df = sum_i (df/dx_i) dx_i`` at a differentiable point."""
    report = differentiability_check(f, c, cfg)
    if report.verdict is not Verdict.DIFFERENTIABLE:
        raise NotDifferentiableError(report)
    n = len(report.center)
    grad = np.asarray(report.gradient, dtype=float)
    jets = np.array([partial_at(f, report.center, tuple(int(i == j) for j in range(n))).payload
                     for i in range(n)])
    agrees = bool(np.all(np.abs(jets - grad) <= cfg.tol_value * (1.0 + np.abs(jets))))
    names = _variable_names(f, n)
    terms = " + ".join(f"({g:.10g})*d{name}" for g, name in zip(grad, names))
    return Differential(grad, f"df = {terms}", jets, agrees, report)
