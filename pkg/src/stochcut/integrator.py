"""Expected damage of a circular cut by midpoint integration on a grid.

With grid weights ``w_i`` (node mass of square ``i``) and kernel ``g``:

    alpha = 1/2 * sum_{i, j in D}          w_i w_j g(i, j)
    beta  =       sum_{i not in D, j in D} w_i w_j g(i, j)
    gamma = 1/2 * sum_{i not in D} w_i * sum_{j in K_i} w_j g(i, j)

where a square belongs to the disk ``D`` iff its center does, and ``K_i`` is
the shadow of the disk seen from square ``i``.  The pair loops run in a
numba-compiled kernel; :func:`pairwise_breakdown` is a slow numpy
single-pass evaluator kept as an independent check.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numba
import numpy as np

from . import geometry as geo
from .geometry import GEO_TOL, CircularCut, PointInsideDisk, ShadowRegion, SourceInsideDisk
from .grid import AccuracyBudget, IntegrationGrid, compute_grid
from .model import KERNEL_CONST, KERNEL_INVDIST, StochasticNetworkModel

_SHADOW_BAND = geo._SHADOW_BAND


@dataclass(frozen=True)
class DamageBreakdown:
    alpha: float
    beta: float
    gamma: float
    total: float
    delta: float
    cut: CircularCut
    budget: AccuracyBudget | None = None

    def as_dict(self):
        return {
            "alpha": self.alpha, "beta": self.beta, "gamma": self.gamma, "total": self.total,
            "delta": self.delta, "cx": self.cut.center.x, "cy": self.cut.center.y,
            "radius": self.cut.radius,
        }


# ---------------------------------------------------------------------------
# compiled kernels


@numba.njit(cache=True, nogil=True, inline="always")
def _g(d, kind, p0, p1, p2, table, h):
    if kind == KERNEL_CONST:
        return p0
    if kind == KERNEL_INVDIST:
        y = p1 / max(d, p2)
        return p0 * min(1.0, y)
    t = d / h
    k = int(t)
    if k >= table.size - 1:
        return table[table.size - 1]
    f = t - k
    return table[k] * (1.0 - f) + table[k + 1] * f


@numba.njit(cache=True, nogil=True, inline="always")
def _seg_hits(ux, uy, vx, vy, cx, cy, rr):
    dx = vx - ux
    dy = vy - uy
    ll = dx * dx + dy * dy
    t = 0.0
    if ll > 0.0:
        t = ((cx - ux) * dx + (cy - uy) * dy) / ll
        t = min(1.0, max(0.0, t))
    ex = ux + t * dx - cx
    ey = uy + t * dy - cy
    return math.sqrt(ex * ex + ey * ey) <= rr


@numba.njit(cache=True, nogil=True)
def _shadow_row(ux, uy, px, py, w, outside_idx, cx, cy, r, kind, p0, p1, p2, table, h):
    """sum_{j in K_u} w_j g(u, j) over the outside points ``outside_idx``."""
    rr = r + GEO_TOL
    dx = cx - ux
    dy = cy - uy
    d = math.sqrt(dx * dx + dy * dy)
    ax = dx / d
    ay = dy / d
    sin_t = r / d
    cos_t = math.sqrt(max(0.0, 1.0 - sin_t * sin_t))
    chord = (d * d - r * r) / d
    acc = 0.0
    for k in range(outside_idx.size):
        j = outside_idx[k]
        wj = w[j]
        if wj == 0.0:
            continue
        rx = px[j] - ux
        ry = py[j] - uy
        along = rx * ax + ry * ay
        if along <= 0.0:
            continue
        perp = abs(rx * ay - ry * ax)
        cone = along * sin_t - perp * cos_t
        far = along - chord
        band = _SHADOW_BAND * (d + along + perp)
        if abs(cone) <= band or abs(far) <= band:
            hit = _seg_hits(ux, uy, px[j], py[j], cx, cy, rr)
        else:
            hit = cone > 0.0 and far > 0.0
        if hit:
            acc += wj * _g(math.sqrt(rx * rx + ry * ry), kind, p0, p1, p2, table, h)
    return acc


@numba.njit(cache=True, nogil=True)
def _edcc_sums(px, py, w, cx, cy, r, kind, p0, p1, p2, table, h, lo, hi):
    """(2*alpha, beta, 2*gamma) restricted to outer indices in [lo, hi)."""
    n = px.size
    rr = r + GEO_TOL
    inside = np.empty(n, dtype=np.bool_)
    n_in = 0
    for i in range(n):
        ex = px[i] - cx
        ey = py[i] - cy
        inside[i] = math.sqrt(ex * ex + ey * ey) <= rr
        if inside[i]:
            n_in += 1
    in_idx = np.empty(n_in, dtype=np.int64)
    out_idx = np.empty(n - n_in, dtype=np.int64)
    a = 0
    b = 0
    for i in range(n):
        if inside[i]:
            in_idx[a] = i
            a += 1
        else:
            out_idx[b] = i
            b += 1
    alpha2 = 0.0
    beta = 0.0
    gamma2 = 0.0
    for i in range(lo, hi):
        wi = w[i]
        if wi == 0.0:
            continue
        ux = px[i]
        uy = py[i]
        s = 0.0
        for k in range(n_in):
            j = in_idx[k]
            ex = px[j] - ux
            ey = py[j] - uy
            s += w[j] * _g(math.sqrt(ex * ex + ey * ey), kind, p0, p1, p2, table, h)
        if inside[i]:
            alpha2 += wi * s
        else:
            beta += wi * s
            gamma2 += wi * _shadow_row(ux, uy, px, py, w, out_idx, cx, cy, r,
                                       kind, p0, p1, p2, table, h)
    return alpha2, beta, gamma2


# ---------------------------------------------------------------------------
# public API


def grid_weights(model: StochasticNetworkModel, grid: IntegrationGrid) -> np.ndarray:
    """Expected node mass of every grid square."""
    w = np.ascontiguousarray(model.intensity.square_masses(grid), dtype=float)
    w.setflags(write=False)
    return w


class GridEvaluator:
    """Reusable EDCC evaluator bound to one model and one grid.

    Weights and kernel parameters are prepared once, so sweeping many cut
    centers only pays for the pair loops.
    """

    def __init__(self, model: StochasticNetworkModel, grid: IntegrationGrid,
                 budget: AccuracyBudget | None = None):
        self.model = model
        self.grid = grid
        self.budget = budget
        self.weights = grid_weights(model, grid)
        self._spec = model.kernel.spec()

    def sums(self, cut: CircularCut, chunks: int = 1):
        cx, cy = cut.center
        a2 = b = g2 = 0.0
        # fixed-order reduction over contiguous outer ranges
        for rng in self.grid.partition(chunks):
            x, y, z = _edcc_sums(self.grid.px, self.grid.py, self.weights, cx, cy, cut.radius,
                                 *self._spec, rng.start, rng.stop)
            a2 += x
            b += y
            g2 += z
        return 0.5 * a2, b, 0.5 * g2

    def __call__(self, cut: CircularCut) -> DamageBreakdown:
        alpha, beta, gamma = self.sums(cut)
        return DamageBreakdown(alpha, beta, gamma, alpha + beta + gamma,
                               self.grid.delta, cut, self.budget)

    def total(self, cut: CircularCut) -> float:
        a, b, g = self.sums(cut)
        return a + b + g


def _check_cut(model, cut):
    if not cut.fits_in(model.rec):
        raise ValueError(f"{cut} does not lie inside {model.rec}")


def edcc(model: StochasticNetworkModel, cut: CircularCut, budget: AccuracyBudget | None = None,
         *, delta: float | None = None, grid: IntegrationGrid | None = None) -> DamageBreakdown:
    """Total expected capacity destroyed by ``cut``, split by link class.

    The grid comes from ``grid`` if given, else from ``compute_grid`` with
    ``budget`` (``delta`` overrides the spacing rule).
    """
    _check_cut(model, cut)
    if grid is None:
        if budget is None and delta is None:
            raise ValueError("need a budget, a delta or a grid")
        grid = compute_grid(model.rec, cut.radius,
                            budget or AccuracyBudget(1.0), model, delta=delta)
    return GridEvaluator(model, grid, budget)(cut)


def evaluate_gamma(model: StochasticNetworkModel, u, cut: CircularCut,
                   grid: IntegrationGrid, weights: np.ndarray | None = None) -> float:
    """Midpoint value of the integral of f(v) g(u, v) over the shadow of ``cut`` from ``u``."""
    if cut.contains(u):
        raise SourceInsideDisk(f"{tuple(u)} lies inside {cut}")
    if weights is None:
        weights = grid_weights(model, grid)
    shadow = ShadowRegion.build(u, cut, grid.rec)
    pts = grid.points
    mask = shadow.contains_many(pts) & (weights != 0)
    if not mask.any():
        return 0.0
    d = np.hypot(pts[mask, 0] - u[0], pts[mask, 1] - u[1])
    return float(np.sum(weights[mask] * model.kernel(d)))


def pairwise_breakdown(model: StochasticNetworkModel, cut: CircularCut,
                       grid: IntegrationGrid, block: int = 512):
    """Single-pass evaluator: classify every grid pair and accumulate by class.

    Ordered pairs are summed with weight 1/2 so each unordered pair counts
    once; the diagonal contributes only for squares inside the disk.
    Quadratic memory per block; meant for tests on small grids.
    """
    w = grid_weights(model, grid)
    pts = grid.points
    n = len(pts)
    sums = np.zeros(4)
    for s in range(0, n, block):
        u = pts[s:s + block]
        wu = w[s:s + block]
        uu = np.repeat(u[:, None, :], n, axis=1)
        vv = np.broadcast_to(pts[None, :, :], uu.shape)
        codes = geo.classify_links(uu, vv, cut.center, cut.radius)
        d = np.hypot(uu[..., 0] - vv[..., 0], uu[..., 1] - vv[..., 1])
        contrib = 0.5 * wu[:, None] * w[None, :] * model.kernel(d)
        for c in range(3):
            sums[c] += contrib[codes == c].sum()
    # the diagonal of an outside square is a degenerate segment that misses the disk
    return float(sums[0]), float(sums[1]), float(sums[2])


__all__ = [
    "DamageBreakdown", "GridEvaluator", "edcc", "evaluate_gamma", "grid_weights",
    "pairwise_breakdown", "PointInsideDisk", "SourceInsideDisk",
]
