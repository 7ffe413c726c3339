import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from sdot.geometry import (ConvexPolygon, Segment, clip_halfplane,
                           clip_segment_to_polygon, convex_intersection,
                           polygon_area, quadratic_moment)

UNIT_SQUARE = ConvexPolygon.rectangle(0, 0, 1, 1)


def test_clip_axis_aligned():
    out = clip_halfplane(UNIT_SQUARE, np.array([1.0, 0.0]), 0.5)
    assert out.area() == pytest.approx(0.5)
    assert sorted(map(tuple, out.vertices)) == sorted(
        [(0.0, 0.0), (0.5, 0.0), (0.5, 1.0), (0.0, 1.0)])


def test_clip_non_binding_and_infeasible():
    same = clip_halfplane(UNIT_SQUARE, np.array([1.0, 0.0]), 2.0)
    assert np.array_equal(same.vertices, UNIT_SQUARE.vertices)
    assert clip_halfplane(UNIT_SQUARE, np.array([1.0, 0.0]), -1.0).is_empty


def test_clip_zero_normal_rejected():
    with pytest.raises(ValueError):
        clip_halfplane(UNIT_SQUARE, np.array([0.0, 0.0]), 0.0)


def test_polygon_area_examples():
    assert polygon_area(UNIT_SQUARE) == pytest.approx(1.0)
    tri = ConvexPolygon([(0, 0), (1, 0), (0, 1)])
    assert polygon_area(tri) == pytest.approx(0.5)
    assert polygon_area(ConvexPolygon.empty()) == 0.0


def test_orientation_forced_ccw():
    cw = ConvexPolygon([(0, 0), (0, 1), (1, 1), (1, 0)])
    x, y = cw.vertices[:, 0], cw.vertices[:, 1]
    doubled = np.dot(x, np.roll(y, -1)) - np.dot(np.roll(x, -1), y)
    assert doubled > 0


def test_duplicate_and_collinear_vertices_removed():
    poly = ConvexPolygon([(0, 0), (0.5, 0), (1, 0), (1, 1), (1, 1), (0, 1)])
    assert len(poly.vertices) == 4


halfplane = st.tuples(
    st.floats(-1, 1).filter(lambda v: abs(v) > 1e-3),
    st.floats(-1, 1).filter(lambda v: abs(v) > 1e-3),
    st.floats(-1.5, 1.5))


@given(halfplane, halfplane)
@settings(max_examples=200, deadline=None)
def test_clip_order_commutes(h1, h2):
    n1, c1 = np.array(h1[:2]), h1[2]
    n2, c2 = np.array(h2[:2]), h2[2]
    a = clip_halfplane(clip_halfplane(UNIT_SQUARE, n1, c1), n2, c2)
    b = clip_halfplane(clip_halfplane(UNIT_SQUARE, n2, c2), n1, c1)
    assert a.area() == pytest.approx(b.area(), abs=1e-12)
    if not a.is_empty and not b.is_empty:
        ca, cb = a.centroid(), b.centroid()
        np.testing.assert_allclose(ca, cb, atol=1e-9)


@given(halfplane)
@settings(max_examples=300, deadline=None)
def test_clip_partitions_area(h):
    n, c = np.array(h[:2]), h[2]
    kept = clip_halfplane(UNIT_SQUARE, n, c)
    other = clip_halfplane(UNIT_SQUARE, -n, -c)
    assert kept.area() + other.area() == pytest.approx(1.0, rel=1e-12)


def test_convex_intersection_known():
    tri = ConvexPolygon([(0, 0), (1, 0), (1, 1)])
    out = convex_intersection(tri, UNIT_SQUARE)
    assert out.area() == pytest.approx(0.5)
    shifted = ConvexPolygon.rectangle(0.5, 0.5, 1.5, 1.5)
    assert convex_intersection(UNIT_SQUARE, shifted).area() == pytest.approx(0.25)
    far = ConvexPolygon.rectangle(5, 5, 6, 6)
    assert convex_intersection(UNIT_SQUARE, far).is_empty


def test_segment_clip_interval():
    span = clip_segment_to_polygon((-1.0, 0.5), (2.0, 0.5), UNIT_SQUARE)
    t0, t1 = span
    assert t0 == pytest.approx(1 / 3)
    assert t1 == pytest.approx(2 / 3)
    assert clip_segment_to_polygon((-1, 5), (2, 5), UNIT_SQUARE) is None


def test_segment_clip_along_edge_counts_inside():
    span = clip_segment_to_polygon((0.2, 0.0), (0.8, 0.0), UNIT_SQUARE)
    assert span is not None
    assert span[1] - span[0] == pytest.approx(1.0)


def test_quadratic_moment_analytic():
    # unit square about its center: Ix + Iy = 1/6
    val = quadratic_moment(UNIT_SQUARE, (0.5, 0.5))
    assert val == pytest.approx(1.0 / 6.0, rel=1e-14)
    # about a corner: integral of x^2 + y^2 = 2/3
    val = quadratic_moment(UNIT_SQUARE, (0.0, 0.0))
    assert val == pytest.approx(2.0 / 3.0, rel=1e-14)
    assert quadratic_moment(ConvexPolygon.empty(), (0, 0)) == 0.0


def test_segment_length():
    seg = Segment(np.array([0.0, 0.0]), np.array([3.0, 4.0]))
    assert seg.length == pytest.approx(5.0)
    np.testing.assert_allclose(seg.midpoint(), [1.5, 2.0])
