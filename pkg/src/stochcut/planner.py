"""Sensitivity maps, worst-case cuts and randomly located cuts."""
from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .geometry import CircularCut, Point, Rectangle
from .grid import AccuracyBudget, DegenerateRec, IntegrationGrid, compute_grid
from .integrator import GridEvaluator
from .model import IntensityField, StochasticNetworkModel


class UnnormalizedDensity(ValueError):
    pass


@dataclass(frozen=True)
class SensitivityMap:
    """TEC of a cut of ``radius`` centered at every square center of ``centers``.

    ``values[row, col]`` belongs to ``centers.point(row, col)``; rows run
    south to north.
    """
    centers: IntegrationGrid
    values: np.ndarray
    radius: float
    budget: AccuracyBudget | None = None

    @property
    def rec_r(self) -> Rectangle:
        return self.centers.rec

    @property
    def delta(self) -> float:
        return self.centers.delta

    @property
    def argmax_index(self) -> tuple[int, int]:
        # np.argmax returns the first maximum in row-major order
        flat = int(np.argmax(self.values))
        return divmod(flat, self.values.shape[1])

    @property
    def argmax(self) -> Point:
        row, col = self.argmax_index
        return Point(*self.centers.point(row, col))

    @property
    def argmax_value(self) -> float:
        return float(self.values.max())


@dataclass(frozen=True)
class AttackDistribution:
    """Where a random cut lands: uniformly over the admissible centers, or by density ``psi``."""
    kind: str = "uniform"
    psi: IntensityField | None = None
    tolerance: float = 1e-6
    variation_bound: float | None = None

    def __post_init__(self):
        if self.kind not in ("uniform", "density"):
            raise ValueError(f"unknown attack distribution {self.kind!r}")
        if self.kind == "density" and self.psi is None:
            raise ValueError("a density distribution needs psi")

    @classmethod
    def uniform(cls):
        return cls("uniform")

    @classmethod
    def density(cls, psi: IntensityField, tolerance: float = 1e-6,
                variation_bound: float | None = None):
        return cls("density", psi, tolerance, variation_bound)

    def spacing_cap(self, model: StochasticNetworkModel, r: float, eps: float) -> float | None:
        """Largest center spacing keeping the psi-variation error below ``eps``.

        Bounds every TEC by the all-pairs damage (N^2/2) g_max.
        """
        if self.kind == "uniform":
            return None
        inner = model.rec.inset(r)
        m = self.variation_bound
        if m is None:
            m = self.psi.max_slope(inner)
        if m <= 0:
            return None
        tec_bound = 0.5 * model.expected_nodes() ** 2 * model.kernel.max_value()
        if tec_bound <= 0:
            return None
        return eps / (m * inner.area * tec_bound)


def center_grid(rec: Rectangle, r: float, delta: float) -> IntegrationGrid:
    inner = rec.inset(r)
    if inner is None:
        raise DegenerateRec(f"no cut of radius {r} fits in {rec}")
    return IntegrationGrid(inner, delta)


def sweep(evaluator: GridEvaluator, centers: IntegrationGrid, r: float,
          workers: int = 1) -> np.ndarray:
    """TEC at every center of ``centers``, sharing one integration grid."""
    pts = centers.points

    def one(k):
        return evaluator.total(CircularCut(tuple(pts[k]), r))

    if workers > 1:
        with ThreadPoolExecutor(workers) as pool:
            vals = list(pool.map(one, range(len(pts))))
    else:
        vals = [one(k) for k in range(len(pts))]
    return np.asarray(vals).reshape(centers.shape)


def fsl(model: StochasticNetworkModel, r: float, budget: AccuracyBudget, *,
        delta: float | None = None, delta_cap: float | None = None,
        workers: int = 1) -> SensitivityMap:
    """Sensitivity map over the admissible centers.

    Half the error budget goes to the spacing between centers and half to
    each EDCC call; one spacing (from the halved budget) serves both.
    """
    half = budget.halved()
    grid = compute_grid(model.rec, r, half, model, delta=delta, delta_cap=delta_cap)
    centers = center_grid(model.rec, r, grid.delta)
    values = sweep(GridEvaluator(model, grid, half), centers, r, workers)
    return SensitivityMap(centers, values, r, budget)


def worst_cut(smap: SensitivityMap) -> tuple[CircularCut, float]:
    """Cut at the highest map value; ties go to the lowest (row, col)."""
    if smap.values.size == 0:
        raise ValueError("empty sensitivity map")
    return CircularCut(smap.argmax, smap.radius), smap.argmax_value


def rcce(model: StochasticNetworkModel, r: float, budget: AccuracyBudget,
         dist: AttackDistribution | None = None, *, delta: float | None = None,
         normalize: str = "rec_r", workers: int = 1, smap: SensitivityMap | None = None) -> float:
    """Expected TEC of a cut whose center is random.

    Uniform: area-weighted mean of the map over the admissible centers
    (``normalize="rec"`` divides the area-weighted sum by the full
    rectangle instead).  Density: sum of psi * TEC * square area.
    A precomputed ``smap`` with matching radius is reused.
    """
    dist = dist or AttackDistribution.uniform()
    if smap is None:
        cap = None if delta is not None else dist.spacing_cap(model, r, budget.additive_eps / 2)
        smap = fsl(model, r, budget, delta=delta, delta_cap=cap, workers=workers)
    elif not math.isclose(smap.radius, r):
        raise ValueError("sensitivity map radius does not match")
    centers = smap.centers
    tec = smap.values.ravel()
    areas = centers.areas
    if dist.kind == "uniform":
        if normalize == "rec_r":
            norm = centers.rec.area
        elif normalize == "rec":
            norm = model.rec.area
        else:
            raise ValueError(f"unknown normalization {normalize!r}")
        return float(np.sum(tec * areas) / norm)
    mass = dist.psi.total_mass(centers.rec)
    if abs(mass - 1.0) > dist.tolerance:
        raise UnnormalizedDensity(f"psi integrates to {mass} over the admissible centers")
    psi = dist.psi.values(centers.px, centers.py)
    return float(np.sum(psi * tec * areas))
