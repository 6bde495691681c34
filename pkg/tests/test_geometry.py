import math

import numpy as np
import pytest
from hypothesis import assume, given, settings
from hypothesis import strategies as st

from stochcut.geometry import (CircularCut, LinkClass, PointInsideDisk, Rectangle, ShadowRegion,
                               SourceInsideDisk, classify_link, classify_links,
                               segment_intersects_disk, segments_intersect_disk, shadow_contains,
                               tangent_points)

UNIT = CircularCut((0, 0), 1)

coord = st.floats(-5, 5, allow_nan=False)
point = st.tuples(coord, coord)
radius = st.floats(0.1, 3)


@pytest.mark.parametrize("u, v, expected", [
    ((-2, 0), (2, 0), True),
    ((-2, 2), (2, 2), False),
    ((-2, 1), (2, 1), True),   # tangent line touches the closed disk
])
def test_segment_intersects_disk_examples(u, v, expected):
    assert segment_intersects_disk(u, v, UNIT) is expected


@pytest.mark.parametrize("u, v, expected", [
    ((0, 0), (0.5, 0), LinkClass.ALPHA),
    ((0, 0), (3, 0), LinkClass.BETA),
    ((-2, 0), (2, 0), LinkClass.GAMMA),
    ((-2, 2), (2, 2), LinkClass.UNTOUCHED),
])
def test_classify_link_examples(u, v, expected):
    assert classify_link(u, v, UNIT) is expected


def test_tangent_points_analytic():
    s3 = math.sqrt(3) / 2
    pts = sorted(tangent_points((2, 0), UNIT))
    assert pts[0] == pytest.approx((0.5, -s3), abs=1e-15)
    assert pts[1] == pytest.approx((0.5, s3), abs=1e-15)
    pts = sorted(tangent_points((0, 2), UNIT))
    assert pts[0] == pytest.approx((-s3, 0.5), abs=1e-15)
    assert pts[1] == pytest.approx((s3, 0.5), abs=1e-15)


def test_tangent_points_far_source():
    u = (10.0, 10.0)
    for q in tangent_points(u, UNIT):
        assert abs(math.hypot(*q) - 1) < 1e-12
        assert abs((q[0] - u[0]) * q[0] + (q[1] - u[1]) * q[1]) < 1e-12


def test_tangent_points_rejects_inside_source():
    with pytest.raises(SourceInsideDisk):
        tangent_points((0.5, 0), UNIT)
    with pytest.raises(SourceInsideDisk):
        tangent_points((1, 0), UNIT)


@given(point, point, radius)
@settings(max_examples=300)
def test_tangent_correctness(c, u, r):
    cut = CircularCut(c, r)
    d = math.hypot(u[0] - c[0], u[1] - c[1])
    assume(d > r * (1 + 1e-6))
    for q in tangent_points(u, cut):
        qc = (q[0] - c[0], q[1] - c[1])
        assert math.hypot(*qc) == pytest.approx(r, rel=1e-9)
        dot = (q[0] - u[0]) * qc[0] + (q[1] - u[1]) * qc[1]
        assert abs(dot) <= 1e-9 * (d * r + 1)


def test_shadow_examples():
    k = ShadowRegion.build((-3, 0), UNIT)
    assert shadow_contains(k, (3, 0))
    assert not shadow_contains(k, (-2, 5))
    with pytest.raises(PointInsideDisk):
        k.contains((0.2, 0.1))


def test_shadow_from_inside_rejected():
    with pytest.raises(SourceInsideDisk):
        ShadowRegion.build((0.1, 0), UNIT)


def test_shadow_tangent_ray_is_included():
    # points on the tangent ray beyond the tangent point: closed convention
    u = np.array([2.0, 0.0])
    q = np.array(tangent_points(u, UNIT)[0])
    v = u + 3.0 * (q - u)
    k = ShadowRegion.build(u, UNIT)
    assert k.contains(v) == segment_intersects_disk(u, v, UNIT)


def test_shadow_matches_segment_random():
    rng = np.random.default_rng(0)
    n_checked = 0
    for _ in range(100):
        c = rng.uniform(-1, 1, 2)
        r = rng.uniform(0.2, 2)
        cut = CircularCut(c, r)
        u = rng.uniform(-6, 6, 2)
        if np.hypot(*(u - c)) <= r + 1e-9:
            continue
        v = rng.uniform(-6, 6, (100, 2))
        v = v[np.hypot(v[:, 0] - c[0], v[:, 1] - c[1]) > r]
        k = ShadowRegion.build(u, cut)
        expect = segments_intersect_disk(np.broadcast_to(u, v.shape), v, c, r)
        np.testing.assert_array_equal(k.contains_many(v), expect)
        n_checked += len(v)
    assert n_checked > 5000


@given(point, point, point, radius)
@settings(max_examples=500)
def test_exactly_one_class_and_symmetry(c, u, v, r):
    cut = CircularCut(c, r)
    cls = classify_link(u, v, cut)
    assert cls is classify_link(v, u, cut)
    assert segment_intersects_disk(u, v, cut) == segment_intersects_disk(v, u, cut)
    assert (cls is LinkClass.UNTOUCHED) == (not segment_intersects_disk(u, v, cut))


def _margin(u, v, c, r):
    from stochcut.geometry import _segment_distance
    return min(abs(_segment_distance(*u, *v, *c) - r),
               abs(math.hypot(u[0] - c[0], u[1] - c[1]) - r),
               abs(math.hypot(v[0] - c[0], v[1] - c[1]) - r))


@given(point, point, point, radius, st.floats(0, 2 * math.pi), point)
@settings(max_examples=300)
def test_rigid_motion_invariance(c, u, v, r, theta, shift):
    assume(_margin(u, v, c, r) > 1e-6)
    cs, sn = math.cos(theta), math.sin(theta)

    def move(p):
        return (cs * p[0] - sn * p[1] + shift[0], sn * p[0] + cs * p[1] + shift[1])

    before = classify_link(u, v, CircularCut(c, r))
    after = classify_link(move(u), move(v), CircularCut(move(c), r))
    assert before is after


def test_vectorized_classes_match_scalar():
    rng = np.random.default_rng(3)
    u = rng.uniform(-3, 3, (2000, 2))
    v = rng.uniform(-3, 3, (2000, 2))
    codes = classify_links(u, v, (0.3, -0.2), 1.1)
    order = [LinkClass.ALPHA, LinkClass.BETA, LinkClass.GAMMA, LinkClass.UNTOUCHED]
    cut = CircularCut((0.3, -0.2), 1.1)
    for k in range(len(u)):
        assert order[codes[k]] is classify_link(u[k], v[k], cut)


def test_degenerate_segment():
    assert segment_intersects_disk((0.5, 0.5), (0.5, 0.5), UNIT)
    assert not segment_intersects_disk((2, 2), (2, 2), UNIT)


def test_rectangle_inset_and_validation():
    rec = Rectangle(0, 6, 0, 4)
    assert rec.inset(1) == Rectangle(1, 5, 1, 3)
    assert rec.inset(2) is None
    assert rec.area == 24
    with pytest.raises(ValueError):
        Rectangle(1, 1, 0, 1)
    with pytest.raises(ValueError):
        CircularCut((0, 0), 0)
    assert CircularCut((1, 1), 1).fits_in(Rectangle(0, 2, 0, 2)) is False
    assert CircularCut((1.5, 1.5), 1).fits_in(Rectangle(0, 3, 0, 3))
