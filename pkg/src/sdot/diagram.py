"""Nearest/farthest power diagrams clipped to a convex domain.

A nearest diagram assigns x to the site whose plane <p_i, x> + h_i is
highest (upper envelope); a farthest diagram assigns x to the lowest plane
(lower envelope).  Cells are built by halfplane clipping against the
hull-adjacent sites only; the weighted Delaunay adjacency guarantees this
yields the exact cell.
"""

import enum
from dataclasses import dataclass, field

import numpy as np

from .errors import DegenerateSites
from .geometry import ConvexPolygon, Segment, clip_halfplane, clip_segment_to_polygon
from .hull import HullMode, HullTriangulation, build_hull


class DiagramMode(enum.Enum):
    NEAREST = "nearest"    # OT side, upper envelope
    FARTHEST = "farthest"  # WT side, lower envelope


_HULL_FOR_MODE = {DiagramMode.NEAREST: HullMode.LOWER,
                  DiagramMode.FARTHEST: HullMode.UPPER}
_MODE_FOR_HULL = {v: k for k, v in _HULL_FOR_MODE.items()}


@dataclass(frozen=True)
class Domain:
    """Compact convex source domain."""

    boundary: ConvexPolygon

    def __post_init__(self):
        if self.boundary.is_empty:
            raise ValueError("domain polygon must be nonempty")

    @classmethod
    def unit_square(cls):
        return cls(ConvexPolygon.rectangle(0.0, 0.0, 1.0, 1.0))

    @classmethod
    def from_points(cls, ring):
        return cls(ConvexPolygon(ring))

    def area(self):
        return self.boundary.area()

    def diameter(self):
        return self.boundary.diameter()

    def centroid(self):
        return self.boundary.centroid()

    def contains(self, point, tol=0.0):
        return self.boundary.contains(point, tol=tol)


@dataclass
class PowerDiagram:
    """Power cells of every site, clipped to the domain (possibly empty)."""

    mode: DiagramMode
    points: np.ndarray
    heights: np.ndarray
    domain: Domain
    cells: list
    neighbor_pairs: list
    _walls: list = field(default=None, repr=False)

    @property
    def n_sites(self):
        return len(self.points)

    def empty_sites(self):
        return [i for i, cell in enumerate(self.cells) if cell.is_empty]

    def is_admissible(self):
        return not any(cell.is_empty for cell in self.cells)

    def cell_areas(self):
        return np.array([cell.area() for cell in self.cells])


def _halfplane_for_pair(points, heights, i, j, mode):
    """Halfplane {x : <n, x> <= c} containing cell i against site j."""
    n = points[j] - points[i]
    c = heights[i] - heights[j]
    if mode is DiagramMode.FARTHEST:
        n = -n
        c = -c
    return n, c


def _clip_cell(points, heights, i, neighbor_ids, domain, mode):
    cell = domain.boundary
    for j in neighbor_ids:
        n, c = _halfplane_for_pair(points, heights, i, j, mode)
        cell = clip_halfplane(cell, n, c)
        if cell.is_empty:
            break
    return cell


def project_diagram(hull, domain):
    """Project a hull triangulation to the matching clipped power diagram."""
    mode = _MODE_FOR_HULL[hull.mode]
    points, heights = hull.points, hull.heights
    adj = hull.adjacency()
    cells = []
    for i in range(len(points)):
        if not hull.present[i]:
            cells.append(ConvexPolygon.empty())
            continue
        cells.append(_clip_cell(points, heights, i, sorted(adj.get(i, ())),
                                domain, mode))
    pairs = sorted({(min(i, j), max(i, j))
                    for i, js in adj.items() for j in js})
    return PowerDiagram(mode, points, heights, domain, cells, pairs)


def power_diagram(points, heights, domain, mode, hull=None):
    """Build the clipped power diagram for arbitrary n >= 1.

    For n >= 3 non-collinear sites this goes through the lifted hull; tiny
    or collinear configurations fall back to direct all-pairs clipping.
    """
    points = np.asarray(points, dtype=float).reshape(-1, 2)
    heights = np.asarray(heights, dtype=float).reshape(-1)
    if len(points) != len(heights):
        raise ValueError("points and heights length mismatch")
    if len(points) == 0:
        raise ValueError("need at least one site")
    if hull is not None:
        return project_diagram(hull, domain)
    if len(points) >= 3:
        try:
            hull = build_hull(points, _HULL_FOR_MODE[mode], heights=heights)
        except DegenerateSites:
            return power_diagram_all_pairs(points, heights, domain, mode)
        return project_diagram(hull, domain)
    return power_diagram_all_pairs(points, heights, domain, mode)


def power_diagram_all_pairs(points, heights, domain, mode):
    """Reference construction clipping every cell against all other sites.

    Quadratic in n; used for n < 3, collinear site sets, and as an
    independent check of the hull-pruned construction.
    """
    points = np.asarray(points, dtype=float).reshape(-1, 2)
    heights = np.asarray(heights, dtype=float).reshape(-1)
    n = len(points)
    cells = []
    for i in range(n):
        others = [j for j in range(n) if j != i]
        cells.append(_clip_cell(points, heights, i, others, domain, mode))
    pairs = [(i, j) for i in range(n) for j in range(i + 1, n)]
    return PowerDiagram(mode, points, heights, domain, cells, pairs)


def cell_boundary_edges(diagram, min_length_scale=1e-12):
    """Shared walls (i, j, Segment) between nonempty cells, clipped to the domain."""
    if diagram._walls is not None:
        return diagram._walls
    points, heights = diagram.points, diagram.heights
    diam = diagram.domain.diameter()
    min_len = min_length_scale * diam
    center = diagram.domain.centroid()
    walls = []
    for i, j in diagram.neighbor_pairs:
        ci, cj = diagram.cells[i], diagram.cells[j]
        if ci.is_empty or cj.is_empty:
            continue
        d = points[j] - points[i]
        nrm = float(np.hypot(d[0], d[1]))
        if nrm == 0.0:
            continue
        # bisector line <d, x> = h_i - h_j, parameterized around the domain
        c = heights[i] - heights[j]
        base = d * (c / (nrm * nrm))
        tangent = np.array([-d[1], d[0]]) / nrm
        mid = base + tangent * float(tangent @ (center - base))
        a = mid - tangent * diam
        b = mid + tangent * diam
        ti = clip_segment_to_polygon(a, b, ci)
        if ti is None:
            continue
        tj = clip_segment_to_polygon(a, b, cj)
        if tj is None:
            continue
        t0 = max(ti[0], tj[0])
        t1 = min(ti[1], tj[1])
        if t1 - t0 <= 0.0:
            continue
        seg = Segment(a + t0 * (b - a), a + t1 * (b - a))
        if seg.length <= min_len:
            continue
        walls.append((i, j, seg))
    diagram._walls = walls
    return walls
