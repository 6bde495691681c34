"""Integration grids of constant spacing and the accuracy-to-spacing rule."""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass, replace

import numpy as np

from .geometry import GEO_TOL, CircularCut, Rectangle

DEFAULT_POINT_BUDGET = 10_000_000


class InfeasibleBudget(RuntimeError):
    pass


class DegenerateRec(ValueError):
    pass


class SquareClass(enum.Enum):
    INSIDE = "inside"
    OUTSIDE = "outside"
    BOUNDARY = "boundary"


@dataclass(frozen=True)
class AccuracyBudget:
    """Error targets for one EDCC evaluation.

    ``additive_eps`` is the absolute error target.  In ``"combined"`` mode
    ``multiplicative_eps`` bounds the relative part of the error as well.
    ``c0`` (additive mode) and ``const`` (both modes) override the default
    calibration constants; ``None`` means derive them from the model.
    """
    additive_eps: float
    multiplicative_eps: float = 0.0
    c0: float | None = None
    mode: str = "additive"
    const: float = 1.0

    def __post_init__(self):
        if not self.additive_eps > 0:
            raise ValueError("additive_eps must be positive")
        if self.mode not in ("additive", "combined"):
            raise ValueError(f"unknown budget mode {self.mode!r}")
        if self.mode == "combined" and not self.multiplicative_eps > 0:
            raise ValueError("combined mode needs a positive multiplicative_eps")
        if self.c0 is not None and not self.c0 > 0:
            raise ValueError("c0 must be positive")

    def halved(self) -> AccuracyBudget:
        return replace(self, additive_eps=self.additive_eps / 2,
                       multiplicative_eps=self.multiplicative_eps / 2)


def default_c0(rec: Rectangle, r: float, max_bound: float, const: float = 1.0) -> float:
    """Leading-order constant in ``eps = c0 * sqrt(delta)``: const * D^2 |Rec| T / sqrt(r)."""
    return const * rec.diagonal ** 2 * rec.area * max_bound / math.sqrt(r)


def combined_constants(rec: Rectangle, r: float, variation_bound: float, const: float = 1.0):
    """(c1, c2) with additive error c1*sqrt(delta) and relative error c2*sqrt(delta)."""
    a = const * rec.diagonal ** 2 / math.sqrt(r)
    c1 = a * variation_bound * r * rec.diagonal * rec.area
    c2 = a * rec.area / (2 * r)
    return c1, c2


class IntegrationGrid:
    """Squares of side ``delta`` tiling ``rec`` from its lower-left corner.

    When ``delta`` does not divide a side, the last column/row is clipped and
    its sample point is the centroid of the clipped square.  Points are
    enumerated row-major with rows running south to north.
    """

    def __init__(self, rec: Rectangle, delta: float):
        if not delta > 0:
            raise ValueError("delta must be positive")
        self.rec = rec
        self.delta = float(delta)
        self.ncols = max(1, math.ceil(rec.width / delta - 1e-9))
        self.nrows = max(1, math.ceil(rec.height / delta - 1e-9))
        self.x_edges = np.minimum(rec.xmin + delta * np.arange(self.ncols + 1), rec.xmax)
        self.y_edges = np.minimum(rec.ymin + delta * np.arange(self.nrows + 1), rec.ymax)
        self.x_edges[-1] = rec.xmax
        self.y_edges[-1] = rec.ymax
        self.xs = 0.5 * (self.x_edges[:-1] + self.x_edges[1:])
        self.ys = 0.5 * (self.y_edges[:-1] + self.y_edges[1:])
        self.widths = np.diff(self.x_edges)
        self.heights = np.diff(self.y_edges)
        X, Y = np.meshgrid(self.xs, self.ys)
        self.px = np.ascontiguousarray(X.ravel())
        self.py = np.ascontiguousarray(Y.ravel())
        self.areas = np.outer(self.heights, self.widths).ravel()
        for a in (self.px, self.py, self.areas):
            a.setflags(write=False)

    def __repr__(self):
        return f"IntegrationGrid(rec={self.rec}, delta={self.delta}, shape=({self.nrows}, {self.ncols}))"

    def __len__(self):
        return self.nrows * self.ncols

    @property
    def shape(self):
        return (self.nrows, self.ncols)

    @property
    def points(self) -> np.ndarray:
        return np.column_stack([self.px, self.py])

    def index(self, row: int, col: int) -> int:
        return row * self.ncols + col

    def point(self, row: int, col: int):
        return (float(self.xs[col]), float(self.ys[row]))

    def square_bounds(self, row: int, col: int):
        return (self.x_edges[col], self.x_edges[col + 1], self.y_edges[row], self.y_edges[row + 1])

    def partition(self, parts: int) -> list[range]:
        """Split the flat point range into ``parts`` contiguous chunks."""
        n = len(self)
        bounds = np.linspace(0, n, parts + 1).astype(int)
        return [range(bounds[k], bounds[k + 1]) for k in range(parts)]


def compute_grid(rec: Rectangle, r: float, budget: AccuracyBudget, model=None, *,
                 delta: float | None = None, delta_cap: float | None = None,
                 point_budget: int = DEFAULT_POINT_BUDGET) -> IntegrationGrid:
    """Choose the grid spacing for cuts of radius ``r`` under ``budget``.

    ``delta`` bypasses the accuracy rule (use :func:`implied_eps` to report
    what it buys).  The spacing always stays below ``r / 2``.
    """
    if not r > 0:
        raise ValueError("radius must be positive")
    if rec.inset(r) is None:
        raise DegenerateRec(f"no cut of radius {r} fits in {rec}")
    cap = r / 2 - GEO_TOL
    if delta is not None:
        if not 0 < delta <= cap:
            raise InfeasibleBudget(f"grid spacing {delta} must lie in (0, r/2) for r={r}")
        spacing = delta
    else:
        spacing = spacing_for_budget(rec, r, budget, model)
        spacing = min(spacing, cap)
        if delta_cap is not None:
            spacing = min(spacing, delta_cap)
        if not spacing > 0:
            raise InfeasibleBudget(f"accuracy target yields spacing {spacing}")
    n = math.ceil(rec.width / spacing - 1e-9) * math.ceil(rec.height / spacing - 1e-9)
    if n > point_budget:
        raise InfeasibleBudget(
            f"spacing {spacing:.3g} needs {n} grid points (budget {point_budget}); "
            "pass c0 or an explicit delta")
    return IntegrationGrid(rec, spacing)


def spacing_for_budget(rec, r, budget: AccuracyBudget, model=None) -> float:
    if budget.mode == "additive":
        c0 = budget.c0
        if c0 is None:
            if model is None:
                raise ValueError("a model is needed to derive c0")
            c0 = default_c0(rec, r, model.max_bound, budget.const)
        return (budget.additive_eps / c0) ** 2 if c0 > 0 else math.inf
    if model is None:
        raise ValueError("combined mode needs the model's variation bound")
    c1, c2 = combined_constants(rec, r, model.variation_bound, budget.const)
    spacing = (budget.multiplicative_eps / c2) ** 2
    if c1 > 0:
        spacing = min(spacing, (budget.additive_eps / c1) ** 2)
    return spacing


def implied_eps(rec, r, delta, budget: AccuracyBudget, model=None):
    """Error guarantees bought by spacing ``delta``: (additive, multiplicative)."""
    if budget.mode == "additive":
        c0 = budget.c0 if budget.c0 is not None else default_c0(rec, r, model.max_bound, budget.const)
        return c0 * math.sqrt(delta), 0.0
    c1, c2 = combined_constants(rec, r, model.variation_bound, budget.const)
    return c1 * math.sqrt(delta), c2 * math.sqrt(delta)


def classify_square(grid: IntegrationGrid, square_index, cut: CircularCut) -> SquareClass:
    row, col = square_index
    x0, x1, y0, y1 = grid.square_bounds(row, col)
    cx, cy = cut.center
    r = cut.radius + GEO_TOL
    corners_in = all(math.hypot(x - cx, y - cy) <= r for x in (x0, x1) for y in (y0, y1))
    if corners_in:
        return SquareClass.INSIDE
    nx = min(max(cx, x0), x1)
    ny = min(max(cy, y0), y1)
    if math.hypot(nx - cx, ny - cy) > r:
        return SquareClass.OUTSIDE
    return SquareClass.BOUNDARY
