"""Convex polygon primitives used by the diagram and integration layers.

Points are length-2 float64 arrays (or anything array-like).  Polygons store
a counterclockwise vertex ring; the empty polygon is a valid value and all
operations treat it as measure zero.  Signs that drive combinatorial
decisions come from :mod:`sdot.predicates`; coordinate arithmetic elsewhere
is ordinary double precision.
"""

from dataclasses import dataclass

import numpy as np

from .predicates import orient2d

# Vertices closer than this fraction of the polygon diameter are merged on
# construction, which keeps sliver faces out of downstream overlays.
MERGE_TOL = 1e-14


@dataclass(frozen=True)
class Segment:
    """Directed segment between two points."""

    a: np.ndarray
    b: np.ndarray

    @property
    def length(self):
        return float(np.hypot(self.b[0] - self.a[0], self.b[1] - self.a[1]))

    def midpoint(self):
        return 0.5 * (self.a + self.b)


class ConvexPolygon:
    """Counterclockwise convex polygon, possibly empty."""

    __slots__ = ("vertices",)

    def __init__(self, vertices, clean=True):
        v = np.asarray(vertices, dtype=float).reshape(-1, 2)
        if clean and len(v) > 0:
            v = _clean_ring(v)
        if len(v) < 3:
            v = np.empty((0, 2))
        self.vertices = v

    @classmethod
    def empty(cls):
        return cls(np.empty((0, 2)), clean=False)

    @classmethod
    def rectangle(cls, xmin, ymin, xmax, ymax):
        return cls([(xmin, ymin), (xmax, ymin), (xmax, ymax), (xmin, ymax)])

    @property
    def is_empty(self):
        return len(self.vertices) == 0

    def __len__(self):
        return len(self.vertices)

    def area(self):
        return polygon_area(self)

    def centroid(self):
        """Area centroid; falls back to the vertex mean for zero area."""
        v = self.vertices
        if len(v) == 0:
            raise ValueError("empty polygon has no centroid")
        x, y = v[:, 0], v[:, 1]
        xn, yn = np.roll(x, -1), np.roll(y, -1)
        cross = x * yn - xn * y
        a = cross.sum() / 2.0
        if abs(a) < 1e-300:
            return v.mean(axis=0)
        cx = ((x + xn) * cross).sum() / (6.0 * a)
        cy = ((y + yn) * cross).sum() / (6.0 * a)
        return np.array([cx, cy])

    def diameter(self):
        if self.is_empty:
            return 0.0
        lo = self.vertices.min(axis=0)
        hi = self.vertices.max(axis=0)
        return float(np.hypot(*(hi - lo)))

    def bounds(self):
        if self.is_empty:
            raise ValueError("empty polygon has no bounds")
        lo = self.vertices.min(axis=0)
        hi = self.vertices.max(axis=0)
        return lo[0], lo[1], hi[0], hi[1]

    def contains(self, point, tol=0.0):
        """True if point is inside or on the boundary (within tol)."""
        if self.is_empty:
            return False
        v = self.vertices
        nxt = np.roll(v, -1, axis=0)
        d = nxt - v
        cross = d[:, 0] * (point[1] - v[:, 1]) - d[:, 1] * (point[0] - v[:, 0])
        return bool(np.all(cross >= -tol))

    def edges(self):
        v = self.vertices
        for i in range(len(v)):
            yield v[i], v[(i + 1) % len(v)]

    def __repr__(self):
        if self.is_empty:
            return "ConvexPolygon(empty)"
        return f"ConvexPolygon({len(self.vertices)} vertices, area={self.area():.6g})"


def _clean_ring(v):
    """Drop near-duplicate and collinear vertices, force counterclockwise."""
    lo = v.min(axis=0)
    hi = v.max(axis=0)
    tol = MERGE_TOL * max(float(np.hypot(*(hi - lo))), 1.0)
    keep = [v[0]]
    for p in v[1:]:
        if np.hypot(*(p - keep[-1])) > tol:
            keep.append(p)
    while len(keep) > 1 and np.hypot(*(keep[-1] - keep[0])) <= tol:
        keep.pop()
    if len(keep) < 3:
        return np.asarray(keep)
    ring = np.asarray(keep)
    x, y = ring[:, 0], ring[:, 1]
    doubled = np.dot(x, np.roll(y, -1)) - np.dot(np.roll(x, -1), y)
    if doubled < 0:
        ring = ring[::-1]
    # remove vertices that are collinear with their neighbours
    out = []
    m = len(ring)
    for i in range(m):
        if orient2d(ring[i - 1], ring[i], ring[(i + 1) % m]) > 0:
            out.append(ring[i])
    return np.asarray(out) if len(out) >= 3 else np.empty((0, 2))


def polygon_area(poly):
    """Shoelace area of a convex polygon; 0.0 when empty."""
    v = poly.vertices if isinstance(poly, ConvexPolygon) else np.asarray(poly, dtype=float)
    if len(v) < 3:
        return 0.0
    x, y = v[:, 0], v[:, 1]
    return 0.5 * abs(np.dot(x, np.roll(y, -1)) - np.dot(np.roll(x, -1), y))


def clip_halfplane(poly, normal, offset):
    """Intersect a convex polygon with the halfplane {x : <normal, x> <= offset}.

    Returns a new polygon; the result may be empty.
    """
    if poly.is_empty:
        return ConvexPolygon.empty()
    n = np.asarray(normal, dtype=float)
    if n[0] == 0.0 and n[1] == 0.0:
        raise ValueError("halfplane normal must be nonzero")
    v = poly.vertices
    side = v @ n - offset
    if np.all(side <= 0.0):
        return poly
    if np.all(side > 0.0):
        return ConvexPolygon.empty()
    out = []
    m = len(v)
    for i in range(m):
        j = (i + 1) % m
        si, sj = side[i], side[j]
        if si <= 0.0:
            out.append(v[i])
            if sj > 0.0:
                t = si / (si - sj)
                out.append(v[i] + t * (v[j] - v[i]))
        elif sj <= 0.0:
            t = si / (si - sj)
            out.append(v[i] + t * (v[j] - v[i]))
    return ConvexPolygon(out)


def convex_intersection(poly_a, poly_b):
    """Intersection of two convex polygons via successive halfplane clips."""
    if poly_a.is_empty or poly_b.is_empty:
        return ConvexPolygon.empty()
    result = poly_a
    for u, w in poly_b.edges():
        d = w - u
        n = np.array([d[1], -d[0]])
        c = d[1] * u[0] - d[0] * u[1]
        result = clip_halfplane(result, n, c)
        if result.is_empty:
            break
    return result


def clip_segment_to_polygon(a, b, poly, rel_tol=1e-12):
    """Parameter interval [t0, t1] of segment a->b inside a convex polygon.

    Returns None when the intersection is empty or a single point.  A
    segment running along a polygon edge (within rel_tol of parallel and
    of the edge line) counts as inside; power-cell walls lie exactly on
    cell boundaries, so an exact-zero test would reject them.
    """
    if poly.is_empty:
        return None
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    d = b - a
    seg_len = float(np.hypot(d[0], d[1]))
    t0, t1 = 0.0, 1.0
    for u, w in poly.edges():
        e = w - u
        n = np.array([e[1], -e[0]])
        c = e[1] * u[0] - e[0] * u[1]
        n_len = float(np.hypot(n[0], n[1]))
        denom = n @ d
        num = c - n @ a
        if abs(denom) <= rel_tol * n_len * seg_len:
            if num < -rel_tol * n_len * max(seg_len, 1.0):
                return None
            continue
        t = num / denom
        if denom > 0.0:
            t1 = min(t1, t)
        else:
            t0 = max(t0, t)
        if t0 >= t1:
            return None
    return t0, t1


def quadratic_moment(poly, p):
    """Integral of |x - p|^2 over a convex polygon, exactly.

    The polygon is fanned from its centroid and each triangle is integrated
    with the three-midpoint rule, which is exact for quadratics.
    """
    if poly.is_empty:
        return 0.0
    v = poly.vertices
    c = poly.centroid()
    p = np.asarray(p, dtype=float)
    total = 0.0
    m = len(v)
    for i in range(m):
        a = v[i]
        b = v[(i + 1) % m]
        area = 0.5 * abs((a[0] - c[0]) * (b[1] - c[1]) - (a[1] - c[1]) * (b[0] - c[0]))
        if area == 0.0:
            continue
        mids = (0.5 * (a + b), 0.5 * (b + c), 0.5 * (c + a))
        s = sum((mid[0] - p[0]) ** 2 + (mid[1] - p[1]) ** 2 for mid in mids)
        total += area * s / 3.0
    return total
