from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from sdot.predicates import lifted_below, orient2d, orient3d

coord = st.floats(min_value=-1e6, max_value=1e6, allow_nan=False,
                  allow_infinity=False)
point = st.tuples(coord, coord)


def test_orient2d_examples():
    assert orient2d((0, 0), (1, 0), (0, 1)) == 1
    assert orient2d((0, 0), (1, 0), (2, 0)) == 0
    assert orient2d((0, 0), (0, 1), (1, 0)) == -1


def test_orient2d_near_degenerate_is_exact():
    # collinear up to double rounding: exact arithmetic must still say 0
    a = (0.1, 0.1)
    b = (0.3, 0.3)
    c = (0.7, 0.7)
    assert orient2d(a, b, c) == 0
    # tiny exact perturbation flips the sign deterministically
    eps = 2.0 ** -50
    assert orient2d(a, b, (0.7, 0.7 + 0.7 * eps)) == 1
    assert orient2d(a, b, (0.7, 0.7 - 0.7 * eps)) == -1


@given(point, point, point)
@settings(max_examples=300, deadline=None)
def test_orient2d_antisymmetry(a, b, c):
    s = orient2d(a, b, c)
    assert orient2d(b, a, c) == -s
    assert orient2d(a, c, b) == -s
    assert orient2d(c, b, a) == -s


@given(point, point, point)
@settings(max_examples=200, deadline=None)
def test_orient2d_matches_rational(a, b, c):
    det = ((Fraction(a[0]) - Fraction(c[0])) * (Fraction(b[1]) - Fraction(c[1]))
           - (Fraction(a[1]) - Fraction(c[1])) * (Fraction(b[0]) - Fraction(c[0])))
    expect = 0 if det == 0 else (1 if det > 0 else -1)
    assert orient2d(a, b, c) == expect


def test_orient3d_sign_convention():
    a, b, c = (0, 0, 0), (1, 0, 0), (0, 1, 0)
    assert orient3d(a, b, c, (0, 0, 1)) == 1
    assert orient3d(a, b, c, (0, 0, -1)) == -1
    assert orient3d(a, b, c, (5, -3, 0)) == 0


def test_orient3d_exact_fallback():
    # exactly coplanar points with non-representable-sum coordinates
    a = (0.0, 0.0, 0.1)
    b = (1.0, 0.0, 0.1)
    c = (0.0, 1.0, 0.1)
    d = (0.3, 0.4, 0.1)
    assert orient3d(a, b, c, d) == 0


def test_lifted_below_is_delaunay_incircle():
    # paraboloid lift turns the power test into the incircle test
    pa, pb, pc = (0.0, 0.0), (1.0, 0.0), (0.0, 1.0)

    def lift(p):
        return p[0] ** 2 + p[1] ** 2

    inside = (0.4, 0.4)     # inside circumcircle of the right triangle
    outside = (1.2, 1.2)
    assert lifted_below(pa, lift(pa), pb, lift(pb), pc, lift(pc),
                        inside, lift(inside))
    assert not lifted_below(pa, lift(pa), pb, lift(pb), pc, lift(pc),
                            outside, lift(outside))


@given(st.lists(st.tuples(coord, coord, coord), min_size=4, max_size=4,
                unique=True))
@settings(max_examples=150, deadline=None)
def test_orient3d_swap_antisymmetry(pts):
    a, b, c, d = pts
    assert orient3d(a, b, c, d) == -orient3d(b, a, c, d)
    assert orient3d(a, b, c, d) == -orient3d(a, c, b, d)
