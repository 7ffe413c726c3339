"""Exact-sign geometric predicates.

Each predicate evaluates a determinant sign in two stages: a fast floating
point computation guarded by a forward error bound, and an exact rational
fallback for the (rare) inputs the filter cannot decide.  The returned sign
is always the exact one; only the amount of precision spent adapts to the
input.  Coordinates must be finite floats.
"""

from fractions import Fraction

# Half-ulp of 1.0; the error-bound coefficients follow Shewchuk's analysis
# of the corresponding determinant expansions.
_EPS = 2.0 ** -53
_CCW_BOUND = (3.0 + 16.0 * _EPS) * _EPS
_O3D_BOUND = (7.0 + 56.0 * _EPS) * _EPS


def _sign(x):
    if x > 0.0:
        return 1
    if x < 0.0:
        return -1
    return 0


def _orient2d_exact(ax, ay, bx, by, cx, cy):
    ax, ay = Fraction(ax), Fraction(ay)
    bx, by = Fraction(bx), Fraction(by)
    cx, cy = Fraction(cx), Fraction(cy)
    det = (ax - cx) * (by - cy) - (ay - cy) * (bx - cx)
    return _sign(det)


def orient2d(a, b, c):
    """Sign of the doubled signed area of triangle (a, b, c).

    +1 for counterclockwise, -1 for clockwise, 0 for exactly collinear.
    """
    ax, ay = float(a[0]), float(a[1])
    bx, by = float(b[0]), float(b[1])
    cx, cy = float(c[0]), float(c[1])

    detleft = (ax - cx) * (by - cy)
    detright = (ay - cy) * (bx - cx)
    det = detleft - detright

    if detleft > 0.0:
        if detright <= 0.0:
            return _sign(det)
        detsum = detleft + detright
    elif detleft < 0.0:
        if detright >= 0.0:
            return _sign(det)
        detsum = -detleft - detright
    else:
        # detleft is an exact zero product, so det == -detright exactly.
        return _sign(det)

    if det >= _CCW_BOUND * detsum or -det >= _CCW_BOUND * detsum:
        return _sign(det)
    return _orient2d_exact(ax, ay, bx, by, cx, cy)


def _orient3d_exact(a, b, c, d):
    adx = Fraction(a[0]) - Fraction(d[0])
    ady = Fraction(a[1]) - Fraction(d[1])
    adz = Fraction(a[2]) - Fraction(d[2])
    bdx = Fraction(b[0]) - Fraction(d[0])
    bdy = Fraction(b[1]) - Fraction(d[1])
    bdz = Fraction(b[2]) - Fraction(d[2])
    cdx = Fraction(c[0]) - Fraction(d[0])
    cdy = Fraction(c[1]) - Fraction(d[1])
    cdz = Fraction(c[2]) - Fraction(d[2])
    det = (adx * (bdy * cdz - bdz * cdy)
           + bdx * (cdy * adz - cdz * ady)
           + cdx * (ady * bdz - adz * bdy))
    return _sign(det)


def orient3d(a, b, c, d):
    """Sign of det[b - a, c - a, d - a] for 3D points.

    When (a, b, c) projects counterclockwise onto the xy-plane, +1 means d
    lies above the plane through a, b, c and -1 means below.
    """
    adx = float(a[0]) - float(d[0])
    ady = float(a[1]) - float(d[1])
    adz = float(a[2]) - float(d[2])
    bdx = float(b[0]) - float(d[0])
    bdy = float(b[1]) - float(d[1])
    bdz = float(b[2]) - float(d[2])
    cdx = float(c[0]) - float(d[0])
    cdy = float(c[1]) - float(d[1])
    cdz = float(c[2]) - float(d[2])

    m_bc = bdy * cdz
    m_cb = bdz * cdy
    m_ca = cdy * adz
    m_ac = cdz * ady
    m_ab = ady * bdz
    m_ba = adz * bdy

    det = (adx * (m_bc - m_cb)
           + bdx * (m_ca - m_ac)
           + cdx * (m_ab - m_ba))
    permanent = ((abs(m_bc) + abs(m_cb)) * abs(adx)
                 + (abs(m_ca) + abs(m_ac)) * abs(bdx)
                 + (abs(m_ab) + abs(m_ba)) * abs(cdx))
    errbound = _O3D_BOUND * permanent
    if det > errbound or -det > errbound:
        # det[b-a, c-a, d-a] = -det[a-d, b-d, c-d] as computed above
        return -_sign(det)
    return -_orient3d_exact(a, b, c, d)


def lifted_below(pa, za, pb, zb, pc, zc, pd, zd):
    """Power test: is the lifted point (pd, zd) strictly below the plane
    through the lifted points (pa, za), (pb, zb), (pc, zc)?

    The triangle (pa, pb, pc) must be counterclockwise in the plane.  This
    is the 4x4 in-sphere determinant with heights in place of the paraboloid
    terms, reduced to a 3x3 orientation test.
    """
    return orient3d((pa[0], pa[1], za),
                    (pb[0], pb[1], zb),
                    (pc[0], pc[1], zc),
                    (pd[0], pd[1], zd)) < 0
