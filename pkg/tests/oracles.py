"""Independent reference implementations used only by the tests.

These deliberately avoid the library's own algorithms: overlays via
shapely booleans, hulls via exhaustive facet enumeration, integrals via
Monte Carlo, derivatives via finite differences.
"""

import itertools

import numpy as np
from shapely.geometry import Polygon as ShapelyPolygon

from sdot.predicates import orient2d, orient3d


def shapely_overlay_areas(mesh, diagram):
    """(triangle, site) -> intersection area via shapely, all pairs."""
    out = {}
    tris = [ShapelyPolygon(poly.vertices) for poly in mesh.triangle_polygons()]
    for s, cell in enumerate(diagram.cells):
        if cell.is_empty:
            continue
        cp = ShapelyPolygon(cell.vertices)
        for t, tp in enumerate(tris):
            area = tp.intersection(cp).area
            if area > 0.0:
                out[(t, s)] = area
    return out


def exhaustive_lower_hull_faces(points, heights, upper=False):
    """Brute-force one-sided hull: every triple whose lifted plane has all
    other lifted points strictly above (below for the upper side) or on it,
    with at least one strictly off only on the correct side."""
    n = len(points)
    z = -np.asarray(heights, dtype=float)
    if upper:
        z = -z
    faces = []
    for a, b, c in itertools.combinations(range(n), 3):
        if orient2d(points[a], points[b], points[c]) == 0:
            continue
        # orient CCW in projection
        if orient2d(points[a], points[b], points[c]) < 0:
            a, b, c = a, c, b
        pa = (points[a][0], points[a][1], z[a])
        pb = (points[b][0], points[b][1], z[b])
        pc = (points[c][0], points[c][1], z[c])
        ok = True
        for d in range(n):
            if d in (a, b, c):
                continue
            pd = (points[d][0], points[d][1], z[d])
            if orient3d(pa, pb, pc, pd) < 0:
                ok = False
                break
        if ok:
            faces.append(tuple(sorted((a, b, c))))
    # keep only faces whose projection is not covered by a larger coplanar
    # face set; for generic inputs the list is already the triangulation
    return set(faces)


def hull_face_set(hull):
    return {tuple(sorted(f)) for f in hull.faces}


def monte_carlo_cell_masses(mesh, diagram, n_samples, seed=0):
    """Monte Carlo estimate of the density-weighted cell areas.

    Returns (estimates, standard_errors).
    """
    rng = np.random.default_rng(seed)
    xmin, ymin, xmax, ymax = mesh.domain.boundary.bounds()
    box_area = (xmax - xmin) * (ymax - ymin)
    pts = rng.uniform((xmin, ymin), (xmax, ymax), size=(n_samples, 2))

    # density value at each sample (0 outside every triangle)
    dens = np.zeros(n_samples)
    claimed = np.zeros(n_samples, dtype=bool)
    verts = mesh.vertices
    for tri, d in zip(mesh.triangles, mesh.density):
        a, b, c = verts[tri[0]], verts[tri[1]], verts[tri[2]]
        s1 = ((b[0] - a[0]) * (pts[:, 1] - a[1])
              - (b[1] - a[1]) * (pts[:, 0] - a[0])) >= 0
        s2 = ((c[0] - b[0]) * (pts[:, 1] - b[1])
              - (c[1] - b[1]) * (pts[:, 0] - b[0])) >= 0
        s3 = ((a[0] - c[0]) * (pts[:, 1] - c[1])
              - (a[1] - c[1]) * (pts[:, 0] - c[0])) >= 0
        inside = s1 & s2 & s3 & ~claimed
        dens[inside] = d
        claimed |= inside

    # plane winner per sample
    vals = pts @ diagram.points.T + diagram.heights
    if diagram.mode.value == "nearest":
        winner = np.argmax(vals, axis=1)
    else:
        winner = np.argmin(vals, axis=1)
    winner[~claimed] = -1

    n_cells = diagram.n_sites
    est = np.zeros(n_cells)
    err = np.zeros(n_cells)
    for i in range(n_cells):
        ind = (winner == i) * dens * box_area
        est[i] = ind.mean()
        err[i] = ind.std(ddof=1) / np.sqrt(n_samples)
    return est, err


def fd_mass_jacobian(mesh, points, weights, mode, h, delta=1e-6):
    """Central finite differences of the cell masses in the heights."""
    from sdot.density import build_overlay, mu_cell_volumes
    from sdot.diagram import power_diagram
    from sdot.diagram import DiagramMode

    dmode = DiagramMode.NEAREST if mode == "ot" else DiagramMode.FARTHEST
    n = len(points)

    def masses(hv):
        diagram = power_diagram(points, hv, mesh.domain, dmode)
        overlay = build_overlay(mesh, diagram)
        return mu_cell_volumes(overlay, mesh, n)

    jac = np.zeros((n, n))
    for j in range(n):
        hp = h.copy()
        hm = h.copy()
        hp[j] += delta
        hm[j] -= delta
        jac[:, j] = (masses(hp) - masses(hm)) / (2 * delta)
    return jac


def sample_points_in_polygon(poly, count, rng):
    """Rejection-sample points uniformly from a convex polygon."""
    xmin, ymin, xmax, ymax = poly.bounds()
    out = []
    while len(out) < count:
        cand = rng.uniform((xmin, ymin), (xmax, ymax), size=(count * 4, 2))
        for p in cand:
            if poly.contains(p, tol=0.0):
                out.append(p)
                if len(out) == count:
                    break
    return np.array(out)
