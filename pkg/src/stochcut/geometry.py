"""Planar predicates for circular cuts.

All disks are closed: a point on the circle counts as inside and a segment
that only touches the circle counts as intersecting it.  Comparisons carry an
absolute slack of ``GEO_TOL`` in model length units.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

GEO_TOL = 1e-12

# Half-plane margins below this (relative to the local length scale) are
# re-decided by the exact segment test.
_SHADOW_BAND = 1e-9


class SourceInsideDisk(ValueError):
    """A tangent construction was requested from a point inside the disk."""


class PointInsideDisk(ValueError):
    """A shadow membership query was made for a point inside the disk."""


class Point(NamedTuple):
    x: float
    y: float


@dataclass(frozen=True)
class Rectangle:
    xmin: float
    xmax: float
    ymin: float
    ymax: float

    def __post_init__(self):
        vals = (self.xmin, self.xmax, self.ymin, self.ymax)
        if not all(math.isfinite(v) for v in vals):
            raise ValueError(f"rectangle bounds must be finite: {vals}")
        if not (self.xmin < self.xmax and self.ymin < self.ymax):
            raise ValueError(f"degenerate rectangle: {vals}")

    @property
    def width(self) -> float:
        return self.xmax - self.xmin

    @property
    def height(self) -> float:
        return self.ymax - self.ymin

    @property
    def area(self) -> float:
        return self.width * self.height

    @property
    def diagonal(self) -> float:
        return math.hypot(self.width, self.height)

    def contains(self, p, tol: float = GEO_TOL) -> bool:
        x, y = p
        return (self.xmin - tol <= x <= self.xmax + tol
                and self.ymin - tol <= y <= self.ymax + tol)

    def inset(self, r: float) -> Rectangle | None:
        """Rectangle of admissible centers for a disk of radius ``r``, or None if empty."""
        if self.width <= 2 * r or self.height <= 2 * r:
            return None
        return Rectangle(self.xmin + r, self.xmax - r, self.ymin + r, self.ymax - r)


@dataclass(frozen=True)
class CircularCut:
    center: Point
    radius: float

    def __post_init__(self):
        object.__setattr__(self, "center", Point(float(self.center[0]), float(self.center[1])))
        if not (self.radius > 0 and math.isfinite(self.radius)):
            raise ValueError(f"cut radius must be positive, got {self.radius}")

    def contains(self, p) -> bool:
        return math.hypot(p[0] - self.center.x, p[1] - self.center.y) <= self.radius + GEO_TOL

    def fits_in(self, rec: Rectangle) -> bool:
        inner = rec.inset(self.radius)
        return inner is not None and inner.contains(self.center)


class LinkClass(enum.Enum):
    ALPHA = "alpha"
    BETA = "beta"
    GAMMA = "gamma"
    UNTOUCHED = "untouched"


def _segment_distance(ux, uy, vx, vy, cx, cy):
    dx = vx - ux
    dy = vy - uy
    ll = dx * dx + dy * dy
    if ll == 0.0:
        return math.hypot(cx - ux, cy - uy)
    t = ((cx - ux) * dx + (cy - uy) * dy) / ll
    t = min(1.0, max(0.0, t))
    return math.hypot(ux + t * dx - cx, uy + t * dy - cy)


def segment_intersects_disk(u, v, cut: CircularCut) -> bool:
    """True iff the closed segment [u, v] meets the closed disk of ``cut``."""
    c = cut.center
    return _segment_distance(u[0], u[1], v[0], v[1], c.x, c.y) <= cut.radius + GEO_TOL


def classify_link(u, v, cut: CircularCut) -> LinkClass:
    u_in = cut.contains(u)
    v_in = cut.contains(v)
    if u_in and v_in:
        return LinkClass.ALPHA
    if u_in or v_in:
        return LinkClass.BETA
    if segment_intersects_disk(u, v, cut):
        return LinkClass.GAMMA
    return LinkClass.UNTOUCHED


def tangent_points(u, cut: CircularCut) -> tuple[Point, Point]:
    """Points where the two lines through ``u`` touch the circle.

    The first point is on the left of the ray from ``u`` to the center.
    """
    cx, cy = cut.center
    r = cut.radius
    dx = cx - u[0]
    dy = cy - u[1]
    d = math.hypot(dx, dy)
    if d <= r + GEO_TOL:
        raise SourceInsideDisk(f"point {tuple(u)} is not outside {cut}")
    ax, ay = dx / d, dy / d
    # seen from the center, the tangent points sit at angle acos(r/d) off the
    # direction back to u
    cos_t = r / d
    sin_t = math.sqrt(max(0.0, 1.0 - cos_t * cos_t))
    bx, by = -ax, -ay
    left = Point(cx + r * (bx * cos_t + by * sin_t), cy + r * (by * cos_t - bx * sin_t))
    right = Point(cx + r * (bx * cos_t - by * sin_t), cy + r * (by * cos_t + bx * sin_t))
    return left, right


@dataclass(frozen=True)
class ShadowRegion:
    """Points ``v`` hidden behind the disk as seen from ``source``.

    Membership is decided by two tests: ``v`` lies in the cone spanned by the
    tangents from ``source``, and beyond the chord joining the tangent points.
    Both are exact restatements of the segment test for ``v`` outside the
    disk; queries whose margins fall inside a thin band fall back to the
    segment test itself.
    """

    source: Point
    cut: CircularCut
    tangents: tuple[Point, Point]
    bounding_rect: Rectangle | None = None

    @classmethod
    def build(cls, source, cut: CircularCut, bounding_rect: Rectangle | None = None):
        src = Point(float(source[0]), float(source[1]))
        return cls(src, cut, tangent_points(src, cut), bounding_rect)

    def _frame(self):
        cx, cy = self.cut.center
        ux, uy = self.source
        d = math.hypot(cx - ux, cy - uy)
        r = self.cut.radius
        sin_t = r / d
        cos_t = math.sqrt(max(0.0, 1.0 - sin_t * sin_t))
        return ux, uy, (cx - ux) / d, (cy - uy) / d, sin_t, cos_t, (d * d - r * r) / d, d

    def contains(self, v) -> bool:
        if self.cut.contains(v):
            raise PointInsideDisk(f"point {tuple(v)} lies inside {self.cut}")
        return bool(self.contains_many(np.asarray([v], dtype=float))[0])

    def contains_many(self, pts: np.ndarray) -> np.ndarray:
        """Vectorized membership for an (n, 2) array of points outside the disk.

        Points inside the disk are reported as False rather than raising.
        """
        pts = np.asarray(pts, dtype=float).reshape(-1, 2)
        ux, uy, ax, ay, sin_t, cos_t, chord, d = self._frame()
        rx = pts[:, 0] - ux
        ry = pts[:, 1] - uy
        along = rx * ax + ry * ay
        perp = np.abs(rx * ay - ry * ax)
        cone = along * sin_t - perp * cos_t
        far = along - chord
        band = _SHADOW_BAND * (d + np.abs(along) + perp)
        out = (cone > 0) & (far > 0)
        near = (np.abs(cone) <= band) | (np.abs(far) <= band)
        if near.any():
            c = self.cut.center
            nb = pts[near]
            out[near] = segments_intersect_disk(
                np.broadcast_to(self.source, nb.shape), nb, c, self.cut.radius)
        cx, cy = self.cut.center
        inside = np.hypot(pts[:, 0] - cx, pts[:, 1] - cy) <= self.cut.radius + GEO_TOL
        out[inside] = False
        return out


def shadow_contains(shadow: ShadowRegion, v) -> bool:
    return shadow.contains(v)


def segments_intersect_disk(u: np.ndarray, v: np.ndarray, center, radius: float) -> np.ndarray:
    """Vectorized :func:`segment_intersects_disk` over (n, 2) endpoint arrays."""
    u = np.asarray(u, dtype=float)
    v = np.asarray(v, dtype=float)
    cx, cy = center
    dx = v[..., 0] - u[..., 0]
    dy = v[..., 1] - u[..., 1]
    ll = dx * dx + dy * dy
    with np.errstate(invalid="ignore", divide="ignore"):
        t = ((cx - u[..., 0]) * dx + (cy - u[..., 1]) * dy) / ll
    t = np.where(ll > 0, np.clip(t, 0.0, 1.0), 0.0)
    dist = np.hypot(u[..., 0] + t * dx - cx, u[..., 1] + t * dy - cy)
    return dist <= radius + GEO_TOL


def classify_links(u: np.ndarray, v: np.ndarray, center, radius: float) -> np.ndarray:
    """Vectorized link classes as int codes: 0 alpha, 1 beta, 2 gamma, 3 untouched."""
    u = np.asarray(u, dtype=float)
    v = np.asarray(v, dtype=float)
    cx, cy = center
    u_in = np.hypot(u[..., 0] - cx, u[..., 1] - cy) <= radius + GEO_TOL
    v_in = np.hypot(v[..., 0] - cx, v[..., 1] - cy) <= radius + GEO_TOL
    hit = segments_intersect_disk(u, v, center, radius)
    codes = np.full(u_in.shape, 3, dtype=np.int8)
    codes[hit] = 2
    codes[u_in ^ v_in] = 1
    codes[u_in & v_in] = 0
    return codes
