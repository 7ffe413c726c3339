"""Piecewise-constant source densities and their diagram overlays.

The source measure is a triangulated convex domain with one density value
per triangle.  Cell masses, wall masses, and quadratic transport costs are
all exact integrals of that piecewise-constant density: polygon areas for
masses, clipped segment lengths for walls, and closed-form second moments
for costs.
"""

from dataclasses import dataclass, field

import numpy as np

from .diagram import Domain
from .errors import CoincidentSites
from .geometry import (ConvexPolygon, clip_segment_to_polygon,
                       convex_intersection, polygon_area, quadratic_moment)

TILING_RTOL = 1e-9


class DensityMesh:
    """Triangulation of a convex domain with per-triangle constant density."""

    def __init__(self, vertices, triangles, density, domain=None, check=True):
        self.vertices = np.asarray(vertices, dtype=float).reshape(-1, 2)
        self.triangles = np.asarray(triangles, dtype=int).reshape(-1, 3)
        self.density = np.asarray(density, dtype=float).reshape(-1)
        if len(self.density) != len(self.triangles):
            raise ValueError("one density value per triangle required")
        if np.any(self.density < 0):
            raise ValueError("densities must be nonnegative")
        self._orient_triangles()
        if domain is None:
            domain = Domain(ConvexPolygon(_hull_ring(self.vertices)))
        self.domain = domain
        self._polys = None
        self._areas = None
        if check:
            self._check_tiling()

    def _orient_triangles(self):
        v = self.vertices
        t = self.triangles
        a, b, c = v[t[:, 0]], v[t[:, 1]], v[t[:, 2]]
        cross = ((b[:, 0] - a[:, 0]) * (c[:, 1] - a[:, 1])
                 - (b[:, 1] - a[:, 1]) * (c[:, 0] - a[:, 0]))
        flip = cross < 0
        if np.any(flip):
            t = t.copy()
            t[flip] = t[flip][:, ::-1]
            self.triangles = t

    def _check_tiling(self):
        total = self.triangle_areas().sum()
        dom = self.domain.area()
        if dom <= 0 or abs(total - dom) > TILING_RTOL * max(dom, 1.0):
            raise ValueError(
                f"triangles do not tile the domain: areas {total} vs {dom}")
        if self.total_mass() <= 0:
            raise ValueError("total mesh mass must be positive")

    def triangle_polygons(self):
        if self._polys is None:
            self._polys = [ConvexPolygon(self.vertices[t], clean=False)
                           for t in self.triangles]
        return self._polys

    def triangle_areas(self):
        if self._areas is None:
            v = self.vertices
            t = self.triangles
            a, b, c = v[t[:, 0]], v[t[:, 1]], v[t[:, 2]]
            self._areas = 0.5 * np.abs(
                (b[:, 0] - a[:, 0]) * (c[:, 1] - a[:, 1])
                - (b[:, 1] - a[:, 1]) * (c[:, 0] - a[:, 0]))
        return self._areas

    def total_mass(self):
        return float(self.density @ self.triangle_areas())

    def normalize(self):
        """Rescaled copy with total mass exactly 1."""
        mass = self.total_mass()
        if mass <= 0:
            raise ValueError("cannot normalize a zero-mass mesh")
        return DensityMesh(self.vertices, self.triangles, self.density / mass,
                           domain=self.domain, check=False)

    def __repr__(self):
        return (f"DensityMesh({len(self.vertices)} vertices, "
                f"{len(self.triangles)} triangles, mass={self.total_mass():.6g})")


def _hull_ring(points):
    from scipy.spatial import ConvexHull
    hull = ConvexHull(points)
    return points[hull.vertices]


def unit_square_mesh(density=(1.0, 1.0)):
    """Two-triangle unit square split along the main diagonal.

    density[0] applies below the diagonal (lower-right triangle), density[1]
    above it.
    """
    vertices = [(0.0, 0.0), (1.0, 0.0), (1.0, 1.0), (0.0, 1.0)]
    triangles = [(0, 1, 2), (0, 2, 3)]
    return DensityMesh(vertices, triangles, list(density))


def grid_mesh(nx, ny, densities=None, bounds=(0.0, 0.0, 1.0, 1.0)):
    """Regular nx-by-ny grid of the rectangle, two triangles per cell."""
    xmin, ymin, xmax, ymax = bounds
    xs = np.linspace(xmin, xmax, nx + 1)
    ys = np.linspace(ymin, ymax, ny + 1)
    vid = lambda i, j: j * (nx + 1) + i
    vertices = [(x, y) for y in ys for x in xs]
    triangles = []
    for j in range(ny):
        for i in range(nx):
            triangles.append((vid(i, j), vid(i + 1, j), vid(i + 1, j + 1)))
            triangles.append((vid(i, j), vid(i + 1, j + 1), vid(i, j + 1)))
    if densities is None:
        densities = np.ones(len(triangles))
    return DensityMesh(vertices, triangles, densities)


@dataclass
class Overlay:
    """Common refinement of a density mesh and a power diagram.

    Each atom is one (triangle, cell) intersection polygon; together the
    atoms partition the domain and, per site, partition that site's cell.
    """

    atoms: list
    n_triangles: int
    n_sites: int
    tie_events: int = 0

    def atoms_of_site(self, i):
        return [(t, poly) for t, s, poly in self.atoms if s == i]

    def total_area(self):
        return float(sum(polygon_area(poly) for _, _, poly in self.atoms))


def _lex_range(poly):
    v = poly.vertices
    order = np.lexsort((v[:, 1], v[:, 0]))
    return tuple(v[order[0]]), tuple(v[order[-1]])


def build_overlay(mesh, diagram):
    """Sweep-line overlay of mesh triangles with diagram cells.

    Objects are swept in lexicographic (x, then y) order; a cell or triangle
    is alive between its minimal and maximal vertex, and only co-alive
    triangle/cell pairs are intersected.  Exactly coincident event keys are
    broken by object index and counted in ``tie_events``.
    """
    tris = mesh.triangle_polygons()
    cells = diagram.cells

    # events: (x, y, birth_first, object_kind, index); kind 0 = triangle
    events = []
    for t, poly in enumerate(tris):
        lo, hi = _lex_range(poly)
        events.append((lo[0], lo[1], 0, 0, t))
        events.append((hi[0], hi[1], 1, 0, t))
    for s, poly in enumerate(cells):
        if poly.is_empty:
            continue
        lo, hi = _lex_range(poly)
        events.append((lo[0], lo[1], 0, 1, s))
        events.append((hi[0], hi[1], 1, 1, s))
    events.sort()

    tie_events = 0
    for a, b in zip(events, events[1:]):
        if a[0] == b[0] and a[1] == b[1] and a[3:] != b[3:]:
            tie_events += 1

    atoms = []
    alive_tris = []
    alive_cells = []
    for x, y, death, kind, idx in events:
        if death:
            target = alive_tris if kind == 0 else alive_cells
            if idx in target:
                target.remove(idx)
            continue
        if kind == 0:
            for s in alive_cells:
                piece = convex_intersection(tris[idx], cells[s])
                if not piece.is_empty and piece.area() > 0.0:
                    atoms.append((idx, s, piece))
            alive_tris.append(idx)
        else:
            for t in alive_tris:
                piece = convex_intersection(tris[t], cells[idx])
                if not piece.is_empty and piece.area() > 0.0:
                    atoms.append((t, idx, piece))
            alive_cells.append(idx)
    atoms.sort(key=lambda a: (a[0], a[1]))
    return Overlay(atoms, len(tris), len(cells), tie_events)


def mu_cell_volumes(overlay, mesh, n):
    """Density-weighted cell areas w_i; empty cells contribute 0."""
    w = np.zeros(n)
    density = mesh.density
    for t, s, poly in overlay.atoms:
        w[s] += density[t] * polygon_area(poly)
    return w


def mu_edge_length(segment, i, j, points, mesh):
    """Density-weighted wall length divided by the site distance.

    This is the mixed second derivative of the cell masses with respect to
    the two heights that share the wall.
    """
    points = np.asarray(points, dtype=float)
    dist = float(np.hypot(*(points[i] - points[j])))
    if dist < 1e-14 * mesh.domain.diameter():
        raise CoincidentSites(f"sites {i} and {j} coincide")
    a, b = segment.a, segment.b
    seg_len = segment.length
    if seg_len == 0.0:
        return 0.0
    total = 0.0
    for t, poly in enumerate(mesh.triangle_polygons()):
        dens = mesh.density[t]
        if dens == 0.0:
            continue
        span = clip_segment_to_polygon(a, b, poly)
        if span is None:
            continue
        total += dens * (span[1] - span[0]) * seg_len
    return total / dist


def quadratic_cost(overlay, mesh, points):
    """Half the density-weighted integral of |x - p_site|^2 over all atoms."""
    points = np.asarray(points, dtype=float)
    density = mesh.density
    total = 0.0
    for t, s, poly in overlay.atoms:
        dens = density[t]
        if dens == 0.0:
            continue
        total += dens * quadratic_moment(poly, points[s])
    return 0.5 * total
