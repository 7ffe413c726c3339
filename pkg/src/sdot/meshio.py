"""File formats and measure construction.

A parameterized surface arrives as a single POFF text file carrying both
the 3D embedding and the 2D parameter coordinates per vertex:

    POFF
    V F
    x3 y3 z3 u v     (V vertex lines)
    3 i j k          (F face lines, 0-based)

The source density on the parameter domain assigns each triangle the ratio
of its 3D area to its 2D area; the target measure assigns each vertex one
third of its incident 3D face areas.  Both are normalized to unit total
mass so solver inputs balance by construction.
"""

import warnings
from dataclasses import dataclass, field

import numpy as np

from .density import DensityMesh
from .diagram import Domain
from .errors import DegenerateTriangle
from .geometry import ConvexPolygon


@dataclass
class ParameterizedMesh:
    """Surface triangle mesh with per-vertex parameter-plane coordinates."""

    vertices3d: np.ndarray
    vertices2d: np.ndarray
    faces: np.ndarray

    def __post_init__(self):
        self.vertices3d = np.asarray(self.vertices3d, dtype=float).reshape(-1, 3)
        self.vertices2d = np.asarray(self.vertices2d, dtype=float).reshape(-1, 2)
        self.faces = np.asarray(self.faces, dtype=int).reshape(-1, 3)
        if len(self.vertices3d) != len(self.vertices2d):
            raise ValueError("3D and 2D vertex counts differ")
        if self.faces.size and self.faces.max() >= len(self.vertices3d):
            raise ValueError("face index out of range")

    def face_areas_3d(self):
        v = self.vertices3d
        a = v[self.faces[:, 0]]
        b = v[self.faces[:, 1]]
        c = v[self.faces[:, 2]]
        return 0.5 * np.linalg.norm(np.cross(b - a, c - a), axis=1)

    def face_areas_2d(self):
        v = self.vertices2d
        a = v[self.faces[:, 0]]
        b = v[self.faces[:, 1]]
        c = v[self.faces[:, 2]]
        return 0.5 * np.abs((b[:, 0] - a[:, 0]) * (c[:, 1] - a[:, 1])
                            - (b[:, 1] - a[:, 1]) * (c[:, 0] - a[:, 0]))

    def total_area_3d(self):
        return float(self.face_areas_3d().sum())


@dataclass
class MeasureFile:
    """Discrete target measure: planar points with positive weights."""

    points: np.ndarray
    weights: np.ndarray
    boundary: np.ndarray = field(default=None)

    def __post_init__(self):
        self.points = np.asarray(self.points, dtype=float).reshape(-1, 2)
        self.weights = np.asarray(self.weights, dtype=float).reshape(-1)
        if len(self.points) != len(self.weights):
            raise ValueError("points and weights length mismatch")

    def total(self):
        return float(self.weights.sum())

    def normalized(self):
        return MeasureFile(self.points, self.weights / self.total(),
                           self.boundary)


def read_poff(path):
    with open(path, "r") as fh:
        tokens = fh.read().split()
    if not tokens or tokens[0] != "POFF":
        raise ValueError(f"{path}: missing POFF header")
    nv, nf = int(tokens[1]), int(tokens[2])
    pos = 3
    need = nv * 5
    vals = np.array(tokens[pos:pos + need], dtype=float).reshape(nv, 5)
    pos += need
    vertices3d = vals[:, :3]
    vertices2d = vals[:, 3:]
    faces = np.empty((nf, 3), dtype=int)
    for f in range(nf):
        if tokens[pos] != "3":
            raise ValueError(f"{path}: only triangle faces are supported")
        faces[f] = [int(tokens[pos + 1]), int(tokens[pos + 2]),
                    int(tokens[pos + 3])]
        pos += 4
    return ParameterizedMesh(vertices3d, vertices2d, faces)


def write_poff(mesh, path):
    lines = ["POFF", f"{len(mesh.vertices3d)} {len(mesh.faces)}"]
    for v3, v2 in zip(mesh.vertices3d, mesh.vertices2d):
        lines.append(f"{v3[0]!r} {v3[1]!r} {v3[2]!r} {v2[0]!r} {v2[1]!r}")
    for f in mesh.faces:
        lines.append(f"3 {f[0]} {f[1]} {f[2]}")
    with open(path, "w") as fh:
        fh.write("\n".join(lines) + "\n")


def extract_source_density(template):
    """Density mesh on the parameter plane with per-triangle density equal
    to the 3D/2D area ratio, normalized to unit total mass."""
    a2 = template.face_areas_2d()
    a3 = template.face_areas_3d()
    scale = max(float(a2.max()), 1e-300) if len(a2) else 0.0
    bad = np.nonzero(a2 <= 1e-14 * scale)[0]
    if len(bad):
        raise DegenerateTriangle(
            f"parameter-plane triangle {bad[0]} has zero area",
            face_index=int(bad[0]))
    density = a3 / a2
    mesh = DensityMesh(template.vertices2d, template.faces, density)
    return mesh.normalize()


def extract_target_measure(subject):
    """Vertex measure: one third of the incident 3D face areas, normalized.

    Isolated vertices carry no measure and are dropped with a warning.
    Boundary vertices (incident to an edge with a single face) are flagged
    in the ``boundary`` mask; they receive measure by the same rule.
    """
    areas = subject.face_areas_3d()
    n = len(subject.vertices2d)
    weights = np.zeros(n)
    for f, area in zip(subject.faces, areas):
        weights[f] += area / 3.0

    edge_count = {}
    for f in subject.faces:
        for u, v in ((f[0], f[1]), (f[1], f[2]), (f[2], f[0])):
            key = (u, v) if u < v else (v, u)
            edge_count[key] = edge_count.get(key, 0) + 1
    boundary = np.zeros(n, dtype=bool)
    for (u, v), cnt in edge_count.items():
        if cnt == 1:
            boundary[u] = True
            boundary[v] = True

    keep = weights > 0
    if not np.all(keep):
        warnings.warn(f"dropping {int((~keep).sum())} isolated vertices with "
                      f"zero measure", stacklevel=2)
    total = weights[keep].sum()
    return MeasureFile(subject.vertices2d[keep], weights[keep] / total,
                       boundary[keep])


def normalize_into_domain(points, domain):
    """Map points into the domain interior by a uniform scale and offset.

    Identity when every point already sits inside with a 1% margin.  A
    degenerate (single-point) cloud goes to the domain centroid.  Returns
    (mapped_points, scale, offset) with mapped = scale * p + offset.
    """
    points = np.asarray(points, dtype=float).reshape(-1, 2)
    if len(points) == 0:
        raise ValueError("need at least one point")
    boundary = domain.boundary
    dl = np.array(boundary.bounds()[:2])
    dh = np.array(boundary.bounds()[2:])
    dom_center = 0.5 * (dl + dh)
    dom_extent = dh - dl

    lo = points.min(axis=0)
    hi = points.max(axis=0)
    extent = hi - lo
    if float(extent.max()) == 0.0:
        offset = domain.centroid() - points[0]
        return points + offset, 1.0, offset

    margin = 0.01
    if all(_inside_with_margin(p, boundary, margin) for p in points):
        return points.copy(), 1.0, np.zeros(2)

    with np.errstate(divide="ignore"):
        ratios = np.where(extent > 0, dom_extent / extent, np.inf)
    scale = (1.0 - 2.0 * margin) * float(ratios.min())
    center = 0.5 * (lo + hi)
    for _ in range(200):
        offset = dom_center - scale * center
        mapped = scale * points + offset
        if all(_inside_with_margin(p, boundary, margin * 0.5) for p in mapped):
            return mapped, scale, offset
        scale *= 0.95
    raise ValueError("could not fit points inside the domain")


def _inside_with_margin(point, polygon, margin):
    v = polygon.vertices
    nxt = np.roll(v, -1, axis=0)
    d = nxt - v
    lengths = np.hypot(d[:, 0], d[:, 1])
    cross = d[:, 0] * (point[1] - v[:, 1]) - d[:, 1] * (point[0] - v[:, 0])
    dist = (cross / lengths).min()
    span = min(polygon.bounds()[2] - polygon.bounds()[0],
               polygon.bounds()[3] - polygon.bounds()[1])
    return dist >= margin * span


def read_measure_csv(path):
    pts, wts = [], []
    with open(path, "r") as fh:
        header = fh.readline().strip().lower().replace(" ", "")
        if header != "x,y,weight":
            raise ValueError(f"{path}: expected header 'x,y,weight'")
        for line in fh:
            line = line.strip()
            if not line:
                continue
            x, y, w = line.split(",")
            pts.append((float(x), float(y)))
            wts.append(float(w))
    return MeasureFile(np.array(pts), np.array(wts))


def write_measure_csv(measure, path):
    with open(path, "w") as fh:
        fh.write("x,y,weight\n")
        for (x, y), w in zip(measure.points, measure.weights):
            fh.write(f"{x!r},{y!r},{w!r}\n")


def read_domain_csv(path):
    ring = []
    with open(path, "r") as fh:
        header = fh.readline().strip().lower().replace(" ", "")
        if header != "x,y":
            raise ValueError(f"{path}: expected header 'x,y'")
        for line in fh:
            line = line.strip()
            if not line:
                continue
            x, y = line.split(",")
            ring.append((float(x), float(y)))
    return Domain(ConvexPolygon(ring))


def write_domain_csv(domain, path):
    with open(path, "w") as fh:
        fh.write("x,y\n")
        for x, y in domain.boundary.vertices:
            fh.write(f"{x!r},{y!r}\n")


def read_density_csv(density_path, domain_path):
    """Density mesh from one-triangle-per-line CSV plus a domain ring CSV."""
    domain = read_domain_csv(domain_path)
    vertex_ids = {}
    vertices = []
    triangles = []
    densities = []

    def vid(x, y):
        key = (x, y)
        if key not in vertex_ids:
            vertex_ids[key] = len(vertices)
            vertices.append(key)
        return vertex_ids[key]

    with open(density_path, "r") as fh:
        header = fh.readline().strip().lower().replace(" ", "")
        if header != "x1,y1,x2,y2,x3,y3,density":
            raise ValueError(
                f"{density_path}: expected header 'x1,y1,x2,y2,x3,y3,density'")
        for line in fh:
            line = line.strip()
            if not line:
                continue
            vals = [float(tok) for tok in line.split(",")]
            if len(vals) != 7:
                raise ValueError(f"{density_path}: bad row {line!r}")
            triangles.append((vid(vals[0], vals[1]), vid(vals[2], vals[3]),
                              vid(vals[4], vals[5])))
            densities.append(vals[6])
    return DensityMesh(vertices, triangles, densities, domain=domain)


def write_density_csv(mesh, density_path, domain_path):
    with open(density_path, "w") as fh:
        fh.write("x1,y1,x2,y2,x3,y3,density\n")
        for tri, dens in zip(mesh.triangles, mesh.density):
            coords = mesh.vertices[tri].reshape(-1)
            row = ",".join(repr(float(c)) for c in coords)
            fh.write(f"{row},{dens!r}\n")
    write_domain_csv(mesh.domain, domain_path)
