"""Convex hulls of height-lifted sites and their projected triangulations.

Sites (p_i, h_i) are lifted to (p_i, -h_i).  The projection of the lower
hull is the nearest weighted Delaunay triangulation (upper envelope of the
planes <p_i, x> + h_i); the upper hull projects to the farthest weighted
Delaunay triangulation (lower envelope).  The upper hull is computed by
negating the lift and reusing the lower-hull path.

Full builds go through Qhull; incremental height changes are handled by
local edge flips with exact lifted-plane tests, falling back to a scratch
rebuild when flipping alone cannot reach the target triangulation.
"""

import enum
from dataclasses import dataclass, field

import numpy as np
from scipy.spatial import ConvexHull, Delaunay

from .errors import DegenerateSites, EmptyCellDetected, NearDegenerateFace
from .predicates import lifted_below, orient2d, orient3d


class HullMode(enum.Enum):
    LOWER = "lower"   # nearest weighted Delaunay / OT side
    UPPER = "upper"   # farthest weighted Delaunay / WT side


@dataclass(frozen=True)
class LiftedPoint:
    """One site with its potential-plane height; lifted coordinate (p, -h)."""

    site_index: int
    p: tuple
    height: float


@dataclass
class HullTriangulation:
    """Projected one-sided hull of the lifted sites.

    faces are CCW triangles of site indices over the sites present on the
    requested hull side; sites absent from that side have empty power cells.
    """

    mode: HullMode
    points: np.ndarray
    heights: np.ndarray
    faces: list
    present: np.ndarray
    flips: int = 0
    rebuilt: bool = False
    _edge_faces: dict = field(default=None, repr=False)

    @property
    def edge_faces(self):
        if self._edge_faces is None:
            ef = {}
            for fi, (a, b, c) in enumerate(self.faces):
                for u, v in ((a, b), (b, c), (c, a)):
                    ef.setdefault((u, v) if u < v else (v, u), []).append(fi)
            self._edge_faces = ef
        return self._edge_faces

    def neighbors(self, i):
        """Site indices sharing a triangulation edge with site i."""
        out = set()
        for a, b, c in self.faces:
            if i == a or i == b or i == c:
                out.update((a, b, c))
        out.discard(i)
        return out

    def adjacency(self):
        """Map site -> set of adjacent site indices."""
        adj = {}
        for a, b, c in self.faces:
            for u, v in ((a, b), (b, c), (c, a)):
                adj.setdefault(u, set()).add(v)
                adj.setdefault(v, set()).add(u)
        return adj

    def interior_edges(self):
        return [e for e, fs in self.edge_faces.items() if len(fs) == 2]

    def absent_sites(self):
        return [int(i) for i in np.nonzero(~self.present)[0]]


def _lift_z(heights, mode):
    # Lower hull of (p, -h) for the nearest side; the farthest side mirrors
    # the lift so the same lower-hull code applies.
    z = -np.asarray(heights, dtype=float)
    if mode is HullMode.UPPER:
        z = -z
    return z


def _as_arrays(sites, heights=None):
    if heights is not None:
        pts = np.asarray(sites, dtype=float).reshape(-1, 2)
        h = np.asarray(heights, dtype=float).reshape(-1)
        return pts, h
    pts = np.array([s.p for s in sites], dtype=float)
    h = np.array([s.height for s in sites], dtype=float)
    order = [s.site_index for s in sites]
    if sorted(order) != list(range(len(order))):
        raise ValueError("site indices must be a permutation of 0..n-1")
    out_p = np.empty_like(pts)
    out_h = np.empty_like(h)
    out_p[order] = pts
    out_h[order] = h
    return out_p, out_h


def _all_collinear(points):
    n = len(points)
    for k in range(2, n):
        if orient2d(points[0], points[1], points[k]) != 0:
            return False
    # first two might coincide with others collinear; try all anchored pairs
    for j in range(1, n):
        for k in range(j + 1, n):
            if orient2d(points[0], points[j], points[k]) != 0:
                return False
    return True


def _coplanar_lift(points, z):
    """True if every lifted point lies exactly on one common plane."""
    n = len(points)
    base = None
    for j in range(1, n):
        for k in range(j + 1, n):
            if orient2d(points[0], points[j], points[k]) != 0:
                base = (0, j, k)
                break
        if base:
            break
    if base is None:
        raise DegenerateSites("all sites are collinear")
    a, b, c = base
    pa = (points[a][0], points[a][1], z[a])
    pb = (points[b][0], points[b][1], z[b])
    pc = (points[c][0], points[c][1], z[c])
    for d in range(n):
        if d in base:
            continue
        pd = (points[d][0], points[d][1], z[d])
        if orient3d(pa, pb, pc, pd) != 0:
            return False
    return True


def _ccw_face(points, a, b, c):
    s = orient2d(points[a], points[b], points[c])
    if s > 0:
        return (a, b, c)
    if s < 0:
        return (a, c, b)
    return None


def _plain_delaunay_faces(points):
    tri = Delaunay(points)
    faces = []
    for a, b, c in tri.simplices:
        f = _ccw_face(points, int(a), int(b), int(c))
        if f is not None:
            faces.append(f)
    return faces


def build_hull(sites, mode=HullMode.LOWER, heights=None):
    """Build the requested one-sided hull triangulation from scratch.

    ``sites`` is either a list of LiftedPoint or an (n, 2) point array with a
    separate ``heights`` vector.  Raises DegenerateSites when all sites are
    collinear.
    """
    points, h = _as_arrays(sites, heights)
    n = len(points)
    if n < 3:
        raise ValueError("need at least 3 sites to build a hull")
    if not np.all(np.isfinite(points)) or not np.all(np.isfinite(h)):
        raise ValueError("sites and heights must be finite")
    z = _lift_z(h, mode)

    if _all_collinear(points):
        raise DegenerateSites("all sites are collinear")

    present = np.zeros(n, dtype=bool)
    if n == 3 or _coplanar_lift(points, z):
        # A flat lift puts every site on both hull sides; the projected
        # triangulation is the ordinary Delaunay one.
        faces = ([_ccw_face(points, 0, 1, 2)] if n == 3
                 else _plain_delaunay_faces(points))
        for f in faces:
            present[list(f)] = True
        return HullTriangulation(mode, points, np.array(h), faces, present)

    lifted = np.column_stack([points, z])
    hull3d = ConvexHull(lifted, qhull_options="Qt")
    faces = []
    for simplex, eq in zip(hull3d.simplices, hull3d.equations):
        if eq[2] >= 0.0:
            continue
        f = _ccw_face(points, int(simplex[0]), int(simplex[1]), int(simplex[2]))
        if f is not None:
            faces.append(f)
    if not faces:
        raise DegenerateSites("lower side of the lifted hull is degenerate")
    for f in faces:
        present[list(f)] = True
    return HullTriangulation(mode, points, np.array(h), faces, present)


def dual_vertex(points, heights, face):
    """Planar position of the envelope vertex dual to a hull face.

    The three support planes <p_i, x> + h_i intersect in a single lifted
    point; its projection solves the 2x2 system <p_a - p_b, x> = h_b - h_a,
    <p_a - p_c, x> = h_c - h_a.  Raises NearDegenerateFace when the face is
    too close to degenerate for a reliable solve.
    """
    a, b, c = face
    points = np.asarray(points, dtype=float)
    heights = np.asarray(heights, dtype=float)
    m = np.array([points[a] - points[b], points[a] - points[c]])
    rhs = np.array([heights[b] - heights[a], heights[c] - heights[a]])
    det = m[0, 0] * m[1, 1] - m[0, 1] * m[1, 0]
    scale = np.linalg.norm(m[0]) * np.linalg.norm(m[1])
    if scale == 0.0 or abs(det) < 1e-12 * scale:
        raise NearDegenerateFace(f"face {face} support planes nearly parallel")
    return np.linalg.solve(m, rhs)


class _FlipMesh:
    """Mutable triangulation with an edge map, used only by flip_update."""

    def __init__(self, faces):
        self.faces = [tuple(f) for f in faces]
        self.alive = [True] * len(faces)
        self.edge_faces = {}
        for fi, f in enumerate(self.faces):
            for u, v in self._face_edges(f):
                self.edge_faces.setdefault(self._key(u, v), []).append(fi)

    @staticmethod
    def _key(u, v):
        return (u, v) if u < v else (v, u)

    @staticmethod
    def _face_edges(f):
        a, b, c = f
        return ((a, b), (b, c), (c, a))

    def faces_of_edge(self, key):
        return [fi for fi in self.edge_faces.get(key, ()) if self.alive[fi]]

    def replace_face(self, fi, new_face):
        for u, v in self._face_edges(self.faces[fi]):
            self.edge_faces[self._key(u, v)].remove(fi)
        self.faces[fi] = tuple(new_face)
        for u, v in self._face_edges(new_face):
            self.edge_faces.setdefault(self._key(u, v), []).append(fi)

    def live_faces(self):
        return [f for f, ok in zip(self.faces, self.alive) if ok]


def _edge_context(mesh, key):
    """For interior edge (i, j) return (i, j, k, l) with faces (i,j,k), (j,i,l) CCW."""
    fs = mesh.faces_of_edge(key)
    if len(fs) != 2:
        return None
    f0, f1 = (mesh.faces[fi] for fi in fs)
    i, j = key
    # orient so that f0 contains the directed edge i->j
    if not any(e == (i, j) for e in _FlipMesh._face_edges(f0)):
        f0, f1 = f1, f0
        fs = fs[::-1]
    k = next(v for v in f0 if v != i and v != j)
    l = next(v for v in f1 if v != i and v != j)
    return fs[0], fs[1], i, j, k, l


def flip_update(hull, new_heights, max_flip_factor=30):
    """Update a hull triangulation to new heights by local edge flips.

    Follows the stack-of-suspect-edges scheme: test each edge's local lifted
    convexity, flip violations, and revert (skip) flips that would create
    overlapping triangles.  If the stack drains while violations remain the
    heights are outside the admissible space for this site set and
    EmptyCellDetected is raised; if flipping stalls without a verdict the
    triangulation is rebuilt from scratch and compared.
    """
    new_heights = np.asarray(new_heights, dtype=float).reshape(-1)
    if len(new_heights) != len(hull.points):
        raise ValueError("height vector length mismatch")
    points = hull.points
    z = _lift_z(new_heights, hull.mode)

    mesh = _FlipMesh(hull.faces)
    pending = list(mesh.edge_faces.keys())
    in_stack = set(pending)
    blocked = {}
    flips = 0
    budget = max_flip_factor * max(len(points) ** 2, 16)

    def locally_convex(i, j, k, l):
        # faces (i,j,k) CCW; l is across edge (i,j); a violation means the
        # lifted l pokes below the lifted (i,j,k) plane.
        return not lifted_below(points[i], z[i], points[j], z[j],
                                points[k], z[k], points[l], z[l])

    while pending:
        if flips > budget:
            return _rebuild_and_compare(hull, new_heights, flips)
        key = pending.pop()
        in_stack.discard(key)
        ctx = _edge_context(mesh, key)
        if ctx is None:
            continue
        f0, f1, i, j, k, l = ctx
        if locally_convex(i, j, k, l):
            blocked.pop(key, None)
            continue
        # flip legality: the quad (i, l, j, k) must be strictly convex
        if orient2d(points[i], points[l], points[k]) <= 0 or \
           orient2d(points[l], points[j], points[k]) <= 0:
            count = blocked.get(key, 0)
            if count < 2:
                blocked[key] = count + 1
                if key not in in_stack:
                    pending.insert(0, key)
                    in_stack.add(key)
            else:
                blocked[key] = count + 1
            continue
        mesh.replace_face(f0, (i, l, k))
        mesh.replace_face(f1, (l, j, k))
        flips += 1
        blocked.pop(key, None)
        for u, v in ((i, l), (l, j), (j, k), (k, i)):
            ek = mesh._key(u, v)
            if ek not in in_stack and len(mesh.faces_of_edge(ek)) == 2:
                pending.append(ek)
                in_stack.add(ek)

    # final sweep: any remaining local violation means flips alone cannot
    # realize these heights (a site must leave the hull side)
    violations = []
    for key in list(mesh.edge_faces.keys()):
        ctx = _edge_context(mesh, key)
        if ctx is None:
            continue
        _, _, i, j, k, l = ctx
        if not locally_convex(i, j, k, l):
            violations.append(key)
    if violations:
        return _rebuild_and_compare(hull, new_heights, flips)

    present = np.zeros(len(points), dtype=bool)
    faces = mesh.live_faces()
    for f in faces:
        present[list(f)] = True
    if not np.array_equal(present, hull.present):
        missing = [int(s) for s in np.nonzero(hull.present & ~present)[0]]
        raise EmptyCellDetected("sites dropped off the hull", sites=missing)
    return HullTriangulation(hull.mode, points, np.array(new_heights), faces,
                             present, flips=flips)


def _rebuild_and_compare(hull, new_heights, flips):
    fresh = build_hull(hull.points, hull.mode, heights=new_heights)
    lost = [int(s) for s in np.nonzero(hull.present & ~fresh.present)[0]]
    if lost:
        raise EmptyCellDetected(
            "heights left the admissible space during flip update", sites=lost)
    fresh.flips = flips
    fresh.rebuilt = True
    return fresh
