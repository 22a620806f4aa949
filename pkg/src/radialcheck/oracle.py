"""Brute-force cross-checks that share no discretisation with the engine.

The sup sweep uses an angle set eight times denser than the engine grid,
derivatives use central difference stencils rather than jets, and the
extremum search scans a Cartesian grid instead of solving along rays.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import List, Sequence, Tuple

import numpy as np
from scipy import ndimage

from . import _ladder
from .coords import grid_directions
from .expr import REAL, Expr, evaluate_many
from .radial import RadialConfig
from .report import Verdict

MAX_FD_ORDER = 4
MAX_GRID_RESOLUTION = 512
DENSITY = 8


@dataclass
class SupSweep:
    radii: np.ndarray
    sup: np.ndarray
    verdict: Verdict
    n_directions: int


def uniform_limit_oracle(f: Expr, c, L: float, cfg: RadialConfig = RadialConfig()) -> SupSweep:
    """Sup over a dense direction set of ``|f(c + r u) - L|`` for each ladder radius."""
    if not math.isfinite(L):
        raise ValueError("L must be finite")
    c = np.asarray(c, dtype=float)
    _, dirs = grid_directions(c.size, cfg.angle_resolution * DENSITY)
    radii = cfg.radii()
    pts = c[None, None, :] + radii[None, :, None] * dirs[:, None, :]
    vals, codes = evaluate_many(f, pts)
    dev = np.where(codes == 0, np.abs(vals - L), np.inf)
    sup = dev.max(axis=0)
    ok = _ladder.eventually_decreasing(sup, cfg.tol_exist, cfg.tol_value * (1.0 + abs(L)))
    return SupSweep(radii, sup, Verdict.UNIFORM if ok else Verdict.NOT_UNIFORM, len(dirs))


def _stencil(order: int) -> Tuple[np.ndarray, np.ndarray]:
    """Offsets and weights of a second-order central stencil for d^order/dx^order."""
    m = (order + 1) // 2
    s = np.arange(-m, m + 1, dtype=float)
    a = np.vander(s, increasing=True).T
    rhs = np.zeros(s.size)
    rhs[order] = math.factorial(order)
    return s, np.linalg.solve(a, rhs)


def _fd_once(f: Expr, p: np.ndarray, alpha: Sequence[int], h: float) -> float:
    offsets, weights = [], []
    for k in alpha:
        s, w = _stencil(k)
        offsets.append(s)
        weights.append(w)
    grids = np.meshgrid(*offsets, indexing="ij")
    wgrid = np.ones(grids[0].shape)
    for i, w in enumerate(weights):
        shape = [1] * len(weights)
        shape[i] = w.size
        wgrid = wgrid * w.reshape(shape)
    pts = p + h * np.stack([g.ravel() for g in grids], axis=1)
    vals, codes = evaluate_many(f, pts)
    if np.any(codes != 0):
        return math.nan
    return float(np.dot(wgrid.ravel(), vals)) / h ** sum(alpha)


def fd_partial(f: Expr, p, multi_index: Sequence[int], h: float = 1e-2) -> float:
    """Central-difference mixed partial with Richardson refinement in h**2.

    Returns nan when any stencil evaluation is undefined.
    """
    if f.mode != REAL:
        raise ValueError("fd_partial needs a real-mode expression")
    alpha = tuple(int(a) for a in multi_index)
    total = sum(alpha)
    if total > MAX_FD_ORDER:
        raise ValueError(f"finite differences support total order <= {MAX_FD_ORDER}")
    p = np.asarray(p, dtype=float)
    if total == 0:
        vals, codes = evaluate_many(f, p[None, :])
        return float(vals[0]) if codes[0] == 0 else math.nan
    levels = 3 if total <= 2 else 2
    table = [_fd_once(f, p, alpha, h / 2 ** j) for j in range(levels)]
    for j in range(1, levels):
        q = 4.0 ** j
        table = [(q * table[i + 1] - table[i]) / (q - 1.0) for i in range(len(table) - 1)]
    return table[-1]


def fd_gradient(f: Expr, p, h: float = 1e-2) -> np.ndarray:
    n = f.arity
    return np.array([fd_partial(f, p, tuple(int(i == j) for j in range(n)), h) for i in range(n)])


@dataclass
class GridCell:
    center: Tuple[float, ...]
    lower: Tuple[float, ...]
    upper: Tuple[float, ...]
    gradient_norm: float


@dataclass
class GridExtrema:
    cells: List[GridCell]
    clusters: List[List[int]] = field(default_factory=list)


def _grid_gradient(f: Expr, axes: List[np.ndarray], h: np.ndarray) -> np.ndarray:
    mesh = np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1)
    comps = []
    for i in range(len(axes)):
        step = np.zeros(len(axes))
        step[i] = h[i]
        hi, _ = evaluate_many(f, mesh + step)
        lo, _ = evaluate_many(f, mesh - step)
        comps.append((hi - lo) / (2 * h[i]))
    return np.stack(comps, axis=-1)


def grid_extrema_oracle(f: Expr, box: Sequence[Tuple[float, float]], resolution: int = 51
                        ) -> GridExtrema:
    """Cells of a uniform grid over ``box`` across which every gradient
    component changes sign, sorted by the gradient norm at the cell centre.

    ``resolution`` is the number of cells per axis; an odd count keeps a
    symmetric box's centre inside a cell rather than on a grid line.
    """
    if not 1 <= resolution <= MAX_GRID_RESOLUTION:
        raise ValueError(f"resolution must be in 1..{MAX_GRID_RESOLUTION}")
    box = np.asarray(box, dtype=float)
    n = box.shape[0]
    if n != f.arity:
        raise ValueError("box dimension does not match the expression arity")
    width = (box[:, 1] - box[:, 0]) / resolution
    h = width * 1e-3
    nodes = [np.linspace(lo, hi, resolution + 1) for lo, hi in box]
    grad = _grid_gradient(f, nodes, h)
    candidate = np.ones((resolution,) * n, dtype=bool)
    for i in range(n):
        g = grad[..., i]
        lo = np.full(candidate.shape, np.inf)
        hi = np.full(candidate.shape, -np.inf)
        for corner in np.ndindex(*(2,) * n):
            sl = tuple(slice(k, k + resolution) for k in corner)
            lo = np.minimum(lo, g[sl])
            hi = np.maximum(hi, g[sl])
        candidate &= (lo <= 0) & (hi >= 0)
    idx = np.argwhere(candidate)
    centres = [np.array([nodes[d][k] + 0.5 * width[d] for d, k in enumerate(row)]) for row in idx]
    norms = [float(np.linalg.norm(g)) for g in _centre_gradients(f, centres, h)]
    order = sorted(range(len(idx)), key=lambda k: (norms[k], tuple(centres[k])))
    cells = [GridCell(tuple(centres[k].tolist()),
                      tuple(float(nodes[d][idx[k][d]]) for d in range(n)),
                      tuple(float(nodes[d][idx[k][d] + 1]) for d in range(n)),
                      norms[k]) for k in order]
    labels, count = ndimage.label(candidate, structure=np.ones((3,) * n))
    rank = {tuple(idx[k]): pos for pos, k in enumerate(order)}
    clusters = [sorted(rank[tuple(row)] for row in np.argwhere(labels == lab))
                for lab in range(1, count + 1)]
    clusters.sort()
    return GridExtrema(cells, clusters)


def _centre_gradients(f: Expr, centres, h) -> np.ndarray:
    if not centres:
        return np.zeros((0, f.arity))
    pts = np.array(centres)
    out = []
    for i in range(f.arity):
        step = np.zeros(f.arity)
        step[i] = h[i]
        hi, _ = evaluate_many(f, pts + step)
        lo, _ = evaluate_many(f, pts - step)
        out.append((hi - lo) / (2 * h[i]))
    return np.stack(out, axis=1)
