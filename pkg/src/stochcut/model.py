"""Stochastic network model: PPP intensity, link probability and capacity law.

The expected capacity of a potential link between ``u`` and ``v`` is
``g(u, v) = y(u, v) * E[capacity]``.  Both built-in link and capacity laws
depend on the endpoints only through their distance, so every kernel here is
a function of distance.  Kernels are exposed to the compiled integrator as a
small tuple (see :meth:`Kernel.spec`).
"""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .geometry import GEO_TOL, Point, Rectangle

log = logging.getLogger(__name__)

DEFAULT_NODE_BUDGET = 1_000_000
KERNEL_KNOTS = 4096
KERNEL_MAX_KNOTS = 1 << 18
KERNEL_TABLE_RTOL = 1e-4
MOMENT_PANELS = 256

# kernel kinds understood by the integrator
KERNEL_CONST = 0
KERNEL_INVDIST = 1
KERNEL_TABLE = 2


class OutOfDomain(ValueError):
    pass


class ExpectedCountOverflow(RuntimeError):
    pass


# ---------------------------------------------------------------------------
# intensity fields


class IntensityField:
    """Mean node density per unit area.

    Subclasses implement ``values(x, y)`` (vectorized), ``total_mass(rec)``
    and ``sample_points(rec, rng)``.
    """

    kind = "analytic"

    def values(self, x, y) -> np.ndarray:
        raise NotImplementedError

    def __call__(self, x, y):
        return self.values(x, y)

    def max_value(self, rec: Rectangle) -> float:
        xs = np.linspace(rec.xmin, rec.xmax, 257)
        X, Y = np.meshgrid(xs, np.linspace(rec.ymin, rec.ymax, 257))
        return float(self.values(X, Y).max())

    def max_slope(self, rec: Rectangle) -> float:
        n = 257
        xs = np.linspace(rec.xmin, rec.xmax, n)
        ys = np.linspace(rec.ymin, rec.ymax, n)
        X, Y = np.meshgrid(xs, ys)
        F = self.values(X, Y)
        gx = np.abs(np.diff(F, axis=1)).max() / (xs[1] - xs[0])
        gy = np.abs(np.diff(F, axis=0)).max() / (ys[1] - ys[0])
        return float(max(gx, gy))

    def square_masses(self, grid) -> np.ndarray:
        """Node mass carried by each grid square (midpoint rule)."""
        return self.values(grid.px, grid.py) * grid.areas

    def total_mass(self, rec: Rectangle) -> float:
        raise NotImplementedError

    def sample_points(self, rec: Rectangle, rng: np.random.Generator) -> np.ndarray:
        """Thinning from a dominating homogeneous process."""
        fmax = self.max_value(rec) * (1 + 1e-9)
        if fmax <= 0:
            return np.empty((0, 2))
        n = rng.poisson(fmax * rec.area)
        pts = np.column_stack([rng.uniform(rec.xmin, rec.xmax, n),
                               rng.uniform(rec.ymin, rec.ymax, n)])
        keep = rng.random(n) * fmax < self.values(pts[:, 0], pts[:, 1])
        return pts[keep]


@dataclass(frozen=True)
class HomogeneousIntensity(IntensityField):
    rate: float

    def __post_init__(self):
        if not (self.rate >= 0 and math.isfinite(self.rate)):
            raise ValueError(f"rate must be a finite nonnegative number, got {self.rate}")

    def values(self, x, y):
        return np.full(np.broadcast(np.asarray(x), np.asarray(y)).shape, float(self.rate))

    def max_value(self, rec):
        return float(self.rate)

    def max_slope(self, rec):
        return 0.0

    def total_mass(self, rec):
        return self.rate * rec.area

    def sample_points(self, rec, rng):
        n = rng.poisson(self.rate * rec.area)
        return np.column_stack([rng.uniform(rec.xmin, rec.xmax, n),
                                rng.uniform(rec.ymin, rec.ymax, n)])


@dataclass(frozen=True)
class Hotspot:
    """Isotropic Gaussian bump carrying ``mass`` expected nodes over the plane."""
    x: float
    y: float
    mass: float
    sigma: float


@dataclass(frozen=True)
class GaussianHotspots(IntensityField):
    hotspots: tuple[Hotspot, ...]
    background: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "hotspots", tuple(
            h if isinstance(h, Hotspot) else Hotspot(*h) for h in self.hotspots))
        for h in self.hotspots:
            if h.mass < 0 or h.sigma <= 0:
                raise ValueError(f"invalid hotspot {h}")
        if self.background < 0:
            raise ValueError("background intensity must be nonnegative")

    def values(self, x, y):
        x = np.asarray(x, dtype=float)
        y = np.asarray(y, dtype=float)
        out = np.full(np.broadcast(x, y).shape, float(self.background))
        for h in self.hotspots:
            s2 = h.sigma * h.sigma
            out = out + h.mass / (2 * math.pi * s2) * np.exp(
                -((x - h.x) ** 2 + (y - h.y) ** 2) / (2 * s2))
        return out

    def max_value(self, rec):
        pts = [(h.x, h.y) for h in self.hotspots if rec.contains((h.x, h.y))]
        best = super().max_value(rec)
        if pts:
            p = np.asarray(pts)
            best = max(best, float(self.values(p[:, 0], p[:, 1]).max()))
        return best

    def total_mass(self, rec):
        total = self.background * rec.area
        for h in self.hotspots:
            k = h.sigma * math.sqrt(2)
            fx = 0.5 * (math.erf((rec.xmax - h.x) / k) - math.erf((rec.xmin - h.x) / k))
            fy = 0.5 * (math.erf((rec.ymax - h.y) / k) - math.erf((rec.ymin - h.y) / k))
            total += h.mass * fx * fy
        return total

    def sample_points(self, rec, rng):
        # superposition of independent processes; restricting each Gaussian
        # cloud to rec is exact for a PPP
        parts = [HomogeneousIntensity(self.background).sample_points(rec, rng)]
        for h in self.hotspots:
            n = rng.poisson(h.mass)
            p = rng.normal((h.x, h.y), h.sigma, size=(n, 2))
            inside = ((p[:, 0] >= rec.xmin) & (p[:, 0] <= rec.xmax)
                      & (p[:, 1] >= rec.ymin) & (p[:, 1] <= rec.ymax))
            parts.append(p[inside])
        return np.concatenate(parts)


class RasterIntensity(IntensityField):
    """Piecewise-constant intensity on a regular grid of square cells.

    ``values[i, j]`` is the density of the cell whose lower-left corner is
    ``(xll + j*cell_size, yll + i*cell_size)``; row 0 is the southernmost row.
    """

    kind = "raster"

    def __init__(self, values, cell_size: float, origin=(0.0, 0.0)):
        v = np.array(values, dtype=float)
        if v.ndim != 2 or v.size == 0:
            raise ValueError("raster values must be a nonempty 2-D array")
        if not np.all(np.isfinite(v)) or (v < 0).any():
            raise ValueError("raster values must be finite and nonnegative")
        if cell_size <= 0:
            raise ValueError("cell size must be positive")
        v.setflags(write=False)
        self.cells = v
        self.cell_size = float(cell_size)
        self.origin = Point(float(origin[0]), float(origin[1]))

    def __repr__(self):
        return (f"RasterIntensity(shape={self.cells.shape}, cell_size={self.cell_size}, "
                f"origin={tuple(self.origin)})")

    @property
    def nrows(self):
        return self.cells.shape[0]

    @property
    def ncols(self):
        return self.cells.shape[1]

    @property
    def extent(self) -> Rectangle:
        x0, y0 = self.origin
        return Rectangle(x0, x0 + self.ncols * self.cell_size,
                         y0, y0 + self.nrows * self.cell_size)

    def _index(self, x, y):
        j = np.floor((np.asarray(x, dtype=float) - self.origin.x) / self.cell_size).astype(int)
        i = np.floor((np.asarray(y, dtype=float) - self.origin.y) / self.cell_size).astype(int)
        # the closing edge belongs to the last cell
        return np.clip(i, 0, self.nrows - 1), np.clip(j, 0, self.ncols - 1)

    def values(self, x, y):
        ext = self.extent
        x = np.asarray(x, dtype=float)
        y = np.asarray(y, dtype=float)
        ok = ((x >= ext.xmin - GEO_TOL) & (x <= ext.xmax + GEO_TOL)
              & (y >= ext.ymin - GEO_TOL) & (y <= ext.ymax + GEO_TOL))
        i, j = self._index(x, y)
        return np.where(ok, self.cells[i, j], 0.0)

    def max_value(self, rec):
        return float(self.cells.max())

    def max_slope(self, rec):
        dx = np.abs(np.diff(self.cells, axis=1)).max(initial=0.0)
        dy = np.abs(np.diff(self.cells, axis=0)).max(initial=0.0)
        return float(max(dx, dy) / self.cell_size)

    def _overlap(self, lo, hi, edges):
        """Overlap lengths between intervals [lo_k, hi_k] and raster cells."""
        a = np.maximum(lo[:, None], edges[None, :-1])
        b = np.minimum(hi[:, None], edges[None, 1:])
        return np.clip(b - a, 0.0, None)

    def _edges(self):
        xe = self.origin.x + self.cell_size * np.arange(self.ncols + 1)
        ye = self.origin.y + self.cell_size * np.arange(self.nrows + 1)
        return xe, ye

    def integrate_boxes(self, x_lo, x_hi, y_lo, y_hi) -> np.ndarray:
        """Exact integrals over the tensor product of x and y intervals.

        Returns an array of shape (len(y_lo), len(x_lo)).
        """
        xe, ye = self._edges()
        ox = self._overlap(np.asarray(x_lo), np.asarray(x_hi), xe)
        oy = self._overlap(np.asarray(y_lo), np.asarray(y_hi), ye)
        return oy @ self.cells @ ox.T

    def square_masses(self, grid):
        # exact integral of the piecewise-constant field over each square
        m = self.integrate_boxes(grid.x_edges[:-1], grid.x_edges[1:],
                                 grid.y_edges[:-1], grid.y_edges[1:])
        return m.ravel()

    def total_mass(self, rec):
        return float(self.integrate_boxes([rec.xmin], [rec.xmax], [rec.ymin], [rec.ymax])[0, 0])

    def raw_total(self) -> float:
        return float(self.cell_size ** 2 * self.cells.sum())

    def sample_points(self, rec, rng):
        xe, ye = self._edges()
        x_lo = np.clip(xe[:-1], rec.xmin, rec.xmax)
        x_hi = np.clip(xe[1:], rec.xmin, rec.xmax)
        y_lo = np.clip(ye[:-1], rec.ymin, rec.ymax)
        y_hi = np.clip(ye[1:], rec.ymin, rec.ymax)
        area = np.outer(y_hi - y_lo, x_hi - x_lo)
        counts = rng.poisson(self.cells * area)
        ii, jj = np.nonzero(counts)
        reps = counts[ii, jj]
        ii = np.repeat(ii, reps)
        jj = np.repeat(jj, reps)
        px = rng.uniform(x_lo[jj], x_hi[jj])
        py = rng.uniform(y_lo[ii], y_hi[ii])
        return np.column_stack([px, py])


# ---------------------------------------------------------------------------
# link probability and capacity law


@dataclass(frozen=True)
class ConstantLink:
    probability: float = 1.0

    def __post_init__(self):
        if not 0.0 <= self.probability <= 1.0:
            raise ValueError("link probability must lie in [0, 1]")

    def __call__(self, d):
        return np.full(np.shape(d), float(self.probability))


@dataclass(frozen=True)
class InverseDistanceLink:
    """``y(d) = min(1, kappa / max(d, floor))``."""
    kappa: float = 1.0
    floor: float = GEO_TOL

    def __post_init__(self):
        if self.kappa <= 0 or self.floor <= 0:
            raise ValueError("kappa and floor must be positive")

    def __call__(self, d):
        d = np.asarray(d, dtype=float)
        return np.minimum(1.0, self.kappa / np.maximum(d, self.floor))


@dataclass(frozen=True)
class CustomLink:
    """Link probability given as a vectorized function of distance."""
    func: Callable[[np.ndarray], np.ndarray]

    def __call__(self, d):
        return np.clip(np.asarray(self.func(np.asarray(d, dtype=float)), dtype=float), 0.0, 1.0)


@dataclass(frozen=True)
class ConstantCapacity:
    value: float = 1.0

    def __post_init__(self):
        if self.value < 0:
            raise ValueError("capacity must be nonnegative")

    @property
    def max_capacity(self):
        return float(self.value)

    def first_moment(self, d=0.0):
        return np.full(np.shape(d), float(self.value))

    def sample(self, d, rng):
        return np.full(np.shape(d), float(self.value))


@dataclass
class CustomCapacity:
    """Capacity density ``h(c, d)`` on ``[0, max_capacity]``.

    ``density`` is vectorized over ``c`` and may ignore ``d``.  The first
    moment and the inverse CDF are built from a midpoint rule with
    ``MOMENT_PANELS`` panels.
    """
    density: Callable[[np.ndarray, float], np.ndarray]
    max_capacity: float
    distance_dependent: bool = False
    _panels: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        if self.max_capacity <= 0:
            raise ValueError("max_capacity must be positive")
        hc = self.max_capacity / MOMENT_PANELS
        self._panels = (np.arange(MOMENT_PANELS) + 0.5) * hc
        for d in (0.0, 1.0):
            h = self._pdf(d)
            if (h < 0).any():
                raise ValueError("capacity density must be nonnegative")
            norm = h.sum() * hc
            if abs(norm - 1.0) > 1e-6:
                raise ValueError(f"capacity density integrates to {norm}, expected 1")

    def _pdf(self, d):
        return np.asarray(self.density(self._panels, d), dtype=float) * np.ones_like(self._panels)

    def first_moment(self, d=0.0):
        hc = self.max_capacity / MOMENT_PANELS
        d = np.asarray(d, dtype=float)
        if not self.distance_dependent:
            m = float((self._pdf(0.0) * self._panels).sum() * hc)
            return np.full(d.shape, m)
        flat = d.ravel()
        out = np.array([(self._pdf(x) * self._panels).sum() * hc for x in flat])
        return out.reshape(d.shape)

    def sample(self, d, rng):
        d = np.asarray(d, dtype=float)
        u = rng.random(d.shape)
        edges = np.linspace(0.0, self.max_capacity, MOMENT_PANELS + 1)

        def inv(pdf, q):
            cdf = np.concatenate([[0.0], np.cumsum(pdf)])
            cdf /= cdf[-1]
            return np.interp(q, cdf, edges)

        if not self.distance_dependent:
            return inv(self._pdf(0.0), u)
        return np.array([inv(self._pdf(x), q) for x, q in zip(d.ravel(), u.ravel())]).reshape(d.shape)


# ---------------------------------------------------------------------------
# kernel


@dataclass(frozen=True)
class Kernel:
    """Expected capacity ``g(d)`` of a potential link of length ``d``."""
    link: object
    capacity: object
    max_distance: float

    def __call__(self, d):
        d = np.asarray(d, dtype=float)
        if self._closed_form() is not None:
            return self._direct(d)
        knots, table = self._table
        return np.interp(d, knots, table)

    def _direct(self, d):
        return self.link(d) * self.capacity.first_moment(d)

    def _closed_form(self):
        if not isinstance(self.capacity, ConstantCapacity):
            return None
        c = self.capacity.value
        if isinstance(self.link, ConstantLink):
            return (KERNEL_CONST, self.link.probability * c, 0.0, 0.0)
        if isinstance(self.link, InverseDistanceLink):
            return (KERNEL_INVDIST, c, self.link.kappa, self.link.floor)
        return None

    @property
    def _table(self):
        cached = self.__dict__.get("_table_cache")
        if cached is None:
            # refine until the interpolation meets the tolerance (kinks need more knots)
            n = KERNEL_KNOTS
            while True:
                knots = np.linspace(0.0, self.max_distance * (1 + 1e-9), n)
                cached = (knots, self._direct(knots))
                if n >= KERNEL_MAX_KNOTS or self._interp_error(cached) <= KERNEL_TABLE_RTOL:
                    break
                n *= 2
            object.__setattr__(self, "_table_cache", cached)
        return cached

    def _interp_error(self, table, n=20001) -> float:
        d = np.linspace(0.0, self.max_distance, n)
        exact = self._direct(d)
        approx = np.interp(d, *table)
        mask = exact != 0
        if not mask.any():
            return 0.0
        return float(np.max(np.abs(approx - exact)[mask] / np.abs(exact[mask])))

    def spec(self):
        """(kind, p0, p1, p2, table, knot_spacing) for the compiled integrator."""
        cf = self._closed_form()
        if cf is not None:
            return cf + (np.zeros(1), 1.0)
        knots, table = self._table
        return (KERNEL_TABLE, 0.0, 0.0, 0.0, table, float(knots[1] - knots[0]))

    def table_error(self, n=20001) -> float:
        """Max relative error of the tabulated kernel against direct evaluation."""
        return self._interp_error(self._table, n)

    def max_value(self) -> float:
        d = np.concatenate([[0.0], np.geomspace(1e-6, self.max_distance, 2048)])
        return float(np.max(self(d)))

    def max_slope(self) -> float:
        d = np.linspace(0.0, self.max_distance, 4097)
        g = self(d)
        return float(np.max(np.abs(np.diff(g))) / (d[1] - d[0]))


# ---------------------------------------------------------------------------
# the model


@dataclass(frozen=True)
class ConcreteNetwork:
    """One realization: node coordinates, links as index pairs, capacities."""
    nodes: np.ndarray
    links: np.ndarray
    capacities: np.ndarray
    seed: int

    @property
    def n_links(self):
        return len(self.links)


@dataclass(frozen=True)
class StochasticNetworkModel:
    rec: Rectangle
    intensity: IntensityField
    link: object = field(default_factory=ConstantLink)
    capacity: object = field(default_factory=ConstantCapacity)
    variation_bound: float | None = None
    max_bound: float | None = None
    node_budget: int = DEFAULT_NODE_BUDGET

    def __post_init__(self):
        if isinstance(self.intensity, RasterIntensity):
            ext = self.intensity.extent
            if not (ext.xmin <= self.rec.xmin + GEO_TOL and ext.xmax >= self.rec.xmax - GEO_TOL
                    and ext.ymin <= self.rec.ymin + GEO_TOL and ext.ymax >= self.rec.ymax - GEO_TOL):
                raise ValueError(f"raster extent {ext} does not cover {self.rec}")
        object.__setattr__(self, "kernel", Kernel(self.link, self.capacity, self.rec.diagonal))
        fmax = self.intensity.max_value(self.rec)
        gmax = self.kernel.max_value()
        t_obs = max(fmax, gmax, fmax * fmax * gmax)
        if self.max_bound is None:
            object.__setattr__(self, "max_bound", t_obs)
        elif self.max_bound < t_obs * (1 - 1e-9) and isinstance(self.intensity, RasterIntensity):
            raise ValueError(f"max bound {self.max_bound} is below the raster maximum {t_obs}")
        if self.variation_bound is None:
            # conservative finite-difference estimate of |grad(f f g)|
            fs = self.intensity.max_slope(self.rec)
            m = max(fs, self.kernel.max_slope(), 2 * fs * fmax * gmax + fmax * fmax * self.kernel.max_slope())
            object.__setattr__(self, "variation_bound", float(m))
        if not (math.isfinite(self.variation_bound) and math.isfinite(self.max_bound)):
            raise ValueError("variation and max bounds must be finite")

    def intensity_at(self, u) -> float:
        if not self.rec.contains(u):
            raise OutOfDomain(f"{tuple(u)} lies outside {self.rec}")
        return float(self.intensity.values(u[0], u[1]))

    def link_probability(self, u, v) -> float:
        return float(self.link(math.hypot(u[0] - v[0], u[1] - v[1])))

    def expected_capacity(self, u, v) -> float:
        """Kernel ``g(u, v)``: link probability times expected capacity."""
        return float(self.kernel(math.hypot(u[0] - v[0], u[1] - v[1])))

    def expected_nodes(self) -> float:
        return self.intensity.total_mass(self.rec)

    def sample_network(self, seed, rng: np.random.Generator | None = None) -> ConcreteNetwork:
        """Draw one network.  ``seed`` may be an int or a ``SeedSequence``."""
        expected = self.expected_nodes()
        if expected > self.node_budget:
            raise ExpectedCountOverflow(
                f"expected {expected:.3g} nodes exceeds the budget of {self.node_budget}")
        if rng is None:
            rng = np.random.Generator(np.random.Philox(seed))
        nodes = self.intensity.sample_points(self.rec, rng)
        n = len(nodes)
        ii, jj = np.triu_indices(n, k=1)
        d = np.hypot(nodes[ii, 0] - nodes[jj, 0], nodes[ii, 1] - nodes[jj, 1])
        keep = rng.random(d.shape) < self.link(d)
        links = np.column_stack([ii[keep], jj[keep]])
        caps = self.capacity.sample(d[keep], rng)
        seed_val = seed if isinstance(seed, int) else -1
        return ConcreteNetwork(nodes, links, np.asarray(caps, dtype=float), seed_val)


def sample_network(model: StochasticNetworkModel, seed) -> ConcreteNetwork:
    return model.sample_network(seed)


def homogeneous_model(rec: Rectangle, rate: float, link=None, capacity=None, **kw):
    return StochasticNetworkModel(rec, HomogeneousIntensity(rate),
                                  link or ConstantLink(), capacity or ConstantCapacity(), **kw)


def hotspot_model(rec: Rectangle, hotspots: Sequence, background=0.0, link=None, capacity=None, **kw):
    return StochasticNetworkModel(rec, GaussianHotspots(tuple(hotspots), background),
                                  link or ConstantLink(), capacity or ConstantCapacity(), **kw)
