import numpy as np
import pytest

from oracles import exhaustive_lower_hull_faces, hull_face_set
from sdot.errors import DegenerateSites, EmptyCellDetected, NearDegenerateFace
from sdot.hull import (HullMode, LiftedPoint, build_hull, dual_vertex,
                       flip_update)
from sdot.predicates import lifted_below

SQUARE = np.array([[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0]])


def test_flat_lift_square():
    hull = build_hull(SQUARE, HullMode.LOWER, heights=np.zeros(4))
    assert len(hull.faces) == 2
    assert hull.present.all()

    def tri_area(f):
        u = SQUARE[f[1]] - SQUARE[f[0]]
        v = SQUARE[f[2]] - SQUARE[f[0]]
        return abs(u[0] * v[1] - u[1] * v[0]) / 2

    assert sum(tri_area(f) for f in hull.faces) == pytest.approx(1.0)


def test_three_sites_single_triangle_both_modes():
    pts = SQUARE[:3]
    for mode in (HullMode.LOWER, HullMode.UPPER):
        hull = build_hull(pts, mode, heights=np.array([0.4, -0.7, 2.0]))
        assert len(hull.faces) == 1
        assert hull.present.all()


def test_lifted_point_input_form():
    sites = [LiftedPoint(i, tuple(SQUARE[i]), 0.0) for i in range(4)]
    hull = build_hull(sites, HullMode.LOWER)
    assert hull.present.all()


def test_collinear_sites_rejected():
    pts = np.array([[0.0, 0.0], [0.5, 0.5], [1.0, 1.0], [0.25, 0.25]])
    with pytest.raises(DegenerateSites):
        build_hull(pts, HullMode.LOWER, heights=np.zeros(4))


def test_center_dropped_from_lower_hull_vs_exhaustive():
    pts = np.vstack([SQUARE, [[0.5, 0.5]]])
    # lift z = -h: a large negative h lifts the center far above the
    # paraboloid trend, off the lower hull (generic corner heights keep
    # the exhaustive facet enumeration unambiguous)
    heights = np.array([0.013, -0.021, 0.007, -0.004, -5.0])
    hull = build_hull(pts, HullMode.LOWER, heights=heights)
    assert not hull.present[4]
    assert hull_face_set(hull) == exhaustive_lower_hull_faces(pts, heights)


def test_build_matches_exhaustive_random():
    rng = np.random.default_rng(3)
    for _ in range(25):
        n = int(rng.integers(4, 9))
        pts = rng.uniform(0, 1, size=(n, 2))
        h = rng.normal(0, 0.4, size=n)
        for mode, upper in ((HullMode.LOWER, False), (HullMode.UPPER, True)):
            hull = build_hull(pts, mode, heights=h)
            assert hull_face_set(hull) == exhaustive_lower_hull_faces(
                pts, h, upper=upper), (pts, h, mode)


def test_voronoi_lift_is_delaunay():
    rng = np.random.default_rng(11)
    pts = rng.uniform(0, 1, size=(20, 2))
    h = -0.5 * (pts ** 2).sum(axis=1)
    hull = build_hull(pts, HullMode.LOWER, heights=h)
    assert hull.present.all()
    # empty-circumcircle test for every face against every other site
    z = (pts ** 2).sum(axis=1)
    for a, b, c in hull.faces:
        for d in range(len(pts)):
            if d in (a, b, c):
                continue
            assert not lifted_below(pts[a], z[a], pts[b], z[b],
                                    pts[c], z[c], pts[d], z[d])


def test_flip_update_fixed_point():
    rng = np.random.default_rng(5)
    pts = rng.uniform(0, 1, size=(12, 2))
    h = rng.normal(0, 0.2, size=12)
    hull = build_hull(pts, HullMode.LOWER, heights=h)
    updated = flip_update(hull, h)
    assert updated.flips == 0
    assert hull_face_set(updated) == hull_face_set(hull)


def test_flip_update_single_flip_across_cocircular_threshold():
    # four nearly cocircular sites: perturbing one height across the
    # regularity threshold flips exactly the middle edge
    pts = np.array([[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0]])
    h0 = -0.5 * (pts ** 2).sum(axis=1) + np.array([1e-3, 0.0, 1e-3, 0.0])
    hull = build_hull(pts, HullMode.LOWER, heights=h0)
    h1 = h0 + np.array([-2e-3, 0.0, -2e-3, 0.0])
    updated = flip_update(hull, h1)
    scratch = build_hull(pts, HullMode.LOWER, heights=h1)
    assert hull_face_set(updated) == hull_face_set(scratch)
    assert hull_face_set(updated) != hull_face_set(hull)
    assert updated.flips == 1


def test_flip_update_detects_hidden_site():
    pts = np.vstack([SQUARE, [[0.5, 0.5]]])
    h0 = np.zeros(5)
    h0[4] = 0.3   # center on the lower hull
    hull = build_hull(pts, HullMode.LOWER, heights=h0)
    assert hull.present.all()
    h1 = h0.copy()
    h1[4] = -5.0  # center must leave the hull side
    with pytest.raises(EmptyCellDetected) as exc:
        flip_update(hull, h1)
    assert 4 in exc.value.sites


def test_flip_equals_build_randomized():
    rng = np.random.default_rng(17)
    agree = 0
    raised = 0
    for _ in range(60):
        n = int(rng.integers(4, 16))
        pts = rng.uniform(0, 1, size=(n, 2))
        h0 = -0.5 * (pts ** 2).sum(axis=1)   # Voronoi lift, always complete
        h1 = h0 + rng.normal(0, 0.03, size=n)
        hull0 = build_hull(pts, HullMode.LOWER, heights=h0)
        assert hull0.present.all()
        scratch = build_hull(pts, HullMode.LOWER, heights=h1)
        if scratch.present.all():
            updated = flip_update(hull0, h1)
            assert hull_face_set(updated) == hull_face_set(scratch)
            agree += 1
        else:
            with pytest.raises(EmptyCellDetected):
                flip_update(hull0, h1)
            raised += 1
    assert agree >= 30
    assert raised >= 1


def test_dual_vertex_voronoi_circumcenter():
    pts = np.array([[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]])
    h = -0.5 * (pts ** 2).sum(axis=1)
    np.testing.assert_allclose(dual_vertex(pts, h, (0, 1, 2)), [0.5, 0.5],
                               atol=1e-14)


def test_dual_vertex_equal_heights_plane_intersection():
    # independent 2x2 solve of <p_a - p_b, x> = h_b - h_a for both pairs
    pts = np.array([[0.0, 0.0], [2.0, 0.0], [0.0, 2.0]])
    h = np.array([0.7, 0.7, 0.7])
    m = np.array([pts[0] - pts[1], pts[0] - pts[2]])
    rhs = np.array([h[1] - h[0], h[2] - h[0]])
    expected = np.linalg.solve(m, rhs)
    np.testing.assert_allclose(dual_vertex(pts, h, (0, 1, 2)), expected,
                               atol=1e-14)
    np.testing.assert_allclose(expected, [0.0, 0.0], atol=1e-14)


def test_dual_vertex_height_shift_invariant():
    rng = np.random.default_rng(23)
    pts = rng.uniform(0, 1, size=(3, 2))
    h = rng.normal(size=3)
    v0 = dual_vertex(pts, h, (0, 1, 2))
    v1 = dual_vertex(pts, h + 3.7, (0, 1, 2))
    np.testing.assert_allclose(v0, v1, atol=1e-12)


def test_dual_vertex_degenerate_face():
    pts = np.array([[0.0, 0.0], [1.0, 0.0], [2.0, 1e-15]])
    with pytest.raises(NearDegenerateFace):
        dual_vertex(pts, np.zeros(3), (0, 1, 2))


def test_hull_combinatorics_shift_invariant():
    rng = np.random.default_rng(29)
    pts = rng.uniform(0, 1, size=(10, 2))
    h = rng.normal(0, 0.3, size=10)
    hull0 = build_hull(pts, HullMode.LOWER, heights=h)
    hull1 = build_hull(pts, HullMode.LOWER, heights=h + 11.25)
    assert hull_face_set(hull0) == hull_face_set(hull1)
