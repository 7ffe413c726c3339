"""Independent transportation-LP oracle for testing the geometric solver.

The continuous source is atomized on a grid, then the balanced
transportation problem with cost |x - y|^2 / 2 is solved exactly by a
specialized network simplex: least-cost greedy start, Dantzig pricing with
a Bland fallback for cycling safety, and tree-based pivots.  Built for
auditability at small scale, not for speed.
"""

from dataclasses import dataclass

import numpy as np

from .errors import Infeasible
from .geometry import ConvexPolygon, convex_intersection, polygon_area


@dataclass
class AtomizedSource:
    """Point masses standing in for the continuous source measure."""

    points: np.ndarray
    masses: np.ndarray

    def __post_init__(self):
        self.points = np.asarray(self.points, dtype=float).reshape(-1, 2)
        self.masses = np.asarray(self.masses, dtype=float).reshape(-1)

    def total(self):
        return float(self.masses.sum())


def atomize(mesh, grid_n):
    """One atom per nonempty (grid cell x triangle) piece, at its centroid.

    The grid covers the domain bounding box, so the pieces partition every
    triangle exactly and the total mass is conserved.  Cells entirely
    inside or outside a triangle are classified by corner signs; only the
    boundary cells need polygon clipping.
    """
    if grid_n < 1:
        raise ValueError("grid_n must be >= 1")
    xmin, ymin, xmax, ymax = mesh.domain.boundary.bounds()
    xs = np.linspace(xmin, xmax, grid_n + 1)
    ys = np.linspace(ymin, ymax, grid_n + 1)
    pts = []
    masses = []
    verts = mesh.vertices
    for tri_idx, (tri, dens) in enumerate(zip(mesh.triangles, mesh.density)):
        corners = verts[tri]
        txmin, tymin = corners.min(axis=0)
        txmax, tymax = corners.max(axis=0)
        i0 = max(int(np.searchsorted(xs, txmin, side="right")) - 1, 0)
        i1 = min(int(np.searchsorted(xs, txmax, side="left")), grid_n)
        j0 = max(int(np.searchsorted(ys, tymin, side="right")) - 1, 0)
        j1 = min(int(np.searchsorted(ys, tymax, side="left")), grid_n)
        if i1 <= i0 or j1 <= j0:
            continue
        gx = xs[i0:i1 + 1]
        gy = ys[j0:j1 + 1]
        cx, cy = np.meshgrid(gx, gy, indexing="ij")
        inside = np.ones(cx.shape, dtype=bool)
        outside_any = np.zeros((cx.shape[0] - 1, cx.shape[1] - 1), dtype=bool)
        for e in range(3):
            u = corners[e]
            w = corners[(e + 1) % 3]
            s = (w[0] - u[0]) * (cy - u[1]) - (w[1] - u[1]) * (cx - u[0])
            inside &= s >= 0.0
            out = s < 0.0
            outside_any |= (out[:-1, :-1] & out[1:, :-1]
                            & out[:-1, 1:] & out[1:, 1:])
        full = (inside[:-1, :-1] & inside[1:, :-1]
                & inside[:-1, 1:] & inside[1:, 1:])
        mixed = ~full & ~outside_any

        fi, fj = np.nonzero(full)
        if len(fi):
            x0, x1 = gx[fi], gx[fi + 1]
            y0, y1 = gy[fj], gy[fj + 1]
            pts.append(np.column_stack([(x0 + x1) / 2, (y0 + y1) / 2]))
            masses.append(dens * (x1 - x0) * (y1 - y0))
        tri_poly = ConvexPolygon(corners, clean=False)
        for ii, jj in zip(*np.nonzero(mixed)):
            cell = ConvexPolygon.rectangle(gx[ii], gy[jj],
                                           gx[ii + 1], gy[jj + 1])
            piece = convex_intersection(tri_poly, cell)
            area = polygon_area(piece)
            if area > 0.0:
                pts.append(piece.centroid().reshape(1, 2))
                masses.append(np.array([dens * area]))
    if not pts:
        return AtomizedSource(np.empty((0, 2)), np.empty(0))
    return AtomizedSource(np.vstack(pts), np.concatenate(masses))


def lp_transport(source, measure, objective="min"):
    """Exact optimum of the balanced transportation problem.

    objective 'min' gives the cheapest plan, 'max' the costliest (solved by
    cost negation).  Returns (cost, plan) where plan is a list of
    (atom_index, target_index, flow) rows satisfying both marginals.
    """
    if objective not in ("min", "max"):
        raise ValueError("objective must be 'min' or 'max'")
    a = np.asarray(source.masses, dtype=float).copy()
    pts = np.asarray(source.points, dtype=float)
    b = np.asarray(measure.weights, dtype=float).copy()
    tgt = np.asarray(measure.points, dtype=float)
    total_a, total_b = float(a.sum()), float(b.sum())
    if abs(total_a - total_b) > 1e-9 * max(total_a, total_b, 1.0):
        raise Infeasible(f"marginals do not balance: {total_a} vs {total_b}")
    b *= total_a / total_b
    b[-1] += total_a - b.sum()

    keep = a > 0
    pts, a_pos = pts[keep], a[keep]
    cost_matrix = 0.5 * ((pts[:, None, :] - tgt[None, :, :]) ** 2).sum(axis=2)
    sign = 1.0 if objective == "min" else -1.0
    flows = _network_simplex(sign * cost_matrix, a_pos, b)

    cost = 0.0
    plan = []
    atom_ids = np.nonzero(keep)[0]
    for i, j, f in flows:
        if f > 0.0:
            cost += f * cost_matrix[i, j]
            plan.append((int(atom_ids[i]), int(j), float(f)))
    return float(cost), plan


def _initial_tree(cost, supply, demand):
    """Least-cost greedy allocation completed to a spanning tree."""
    m, k = cost.shape
    order = np.argsort(cost, axis=None, kind="stable")
    rows, cols = np.unravel_index(order, cost.shape)
    rem_a = supply.copy()
    rem_b = demand.copy()
    flow_map = {}
    arcs = []
    for i, j in zip(rows, cols):
        if rem_a[i] <= 0.0 or rem_b[j] <= 0.0:
            continue
        f = min(rem_a[i], rem_b[j])
        flow_map[(int(i), int(j))] = f
        arcs.append((int(i), int(j)))
        rem_a[i] -= f
        rem_b[j] -= f

    parent_uf = list(range(m + k))

    def find(x):
        while parent_uf[x] != x:
            parent_uf[x] = parent_uf[parent_uf[x]]
            x = parent_uf[x]
        return x

    tree_arcs = []
    for i, j in arcs:
        ra, rb = find(i), find(m + j)
        if ra != rb:
            parent_uf[ra] = rb
            tree_arcs.append((i, j))
    if len(tree_arcs) < m + k - 1:
        for i, j in zip(rows, cols):
            if len(tree_arcs) == m + k - 1:
                break
            i, j = int(i), int(j)
            ra, rb = find(i), find(m + j)
            if ra != rb:
                parent_uf[ra] = rb
                tree_arcs.append((i, j))
                flow_map.setdefault((i, j), 0.0)
    return tree_arcs, flow_map


def _network_simplex(cost, supply, demand, max_pivots=None):
    """Transportation simplex on an m x k cost matrix.

    Returns the basic optimal flows as (row, col, flow) triples.  Pricing is
    Dantzig (most negative reduced cost) and switches to Bland's rule after
    a run of degenerate pivots so cycling cannot occur.  The basis tree is
    bipartite with atoms always parented to sinks, so potentials are
    recomputed per pivot from the k-node contracted sink tree.
    """
    m, k = cost.shape
    n_nodes = m + k
    tol = 1e-11 * max(1.0, float(np.abs(cost).max()))
    tree_arcs, flow_map = _initial_tree(cost, supply, demand)

    adj = [[] for _ in range(n_nodes)]
    for i, j in tree_arcs:
        adj[i].append(m + j)
        adj[m + j].append(i)
    parent = np.full(n_nodes, -1, dtype=int)
    root = m
    stack = [root]
    seen = np.zeros(n_nodes, dtype=bool)
    seen[root] = True
    bfs_order = []
    while stack:
        u = stack.pop()
        bfs_order.append(u)
        for v in adj[u]:
            if not seen[v]:
                seen[v] = True
                parent[v] = u
                stack.append(v)
    if not seen.all():
        raise Infeasible("transportation basis is disconnected")

    def arc_of(node):
        p = parent[node]
        return (node, p - m) if node < m else (p, node - m)

    tree_flow = np.zeros(n_nodes)
    for u in bfs_order[1:]:
        tree_flow[u] = flow_map.get(arc_of(u), 0.0)

    rows_idx = np.arange(m)

    def refresh_potentials():
        # v on the contracted sink tree, then u vectorized from atom parents
        sink_parent = np.full(k, -1, dtype=int)
        for j in range(k):
            pa = parent[m + j]
            if pa >= 0:
                sink_parent[j] = parent[pa] - m
        v = np.zeros(k)
        sdepth = np.zeros(k, dtype=int)
        done = np.zeros(k, dtype=bool)
        done[root - m] = True
        pending = [j for j in range(k) if j != root - m]
        while pending:
            rest = []
            for j in pending:
                pj = sink_parent[j]
                if pj >= 0 and done[pj]:
                    a = parent[m + j]
                    v[j] = cost[a, j] - cost[a, pj] + v[pj]
                    sdepth[j] = sdepth[pj] + 2
                    done[j] = True
                else:
                    rest.append(j)
            if len(rest) == len(pending):
                raise Infeasible("transportation basis tree is inconsistent")
            pending = rest
        atom_sink = parent[:m] - m
        u = cost[rows_idx, atom_sink] - v[atom_sink]
        return u, v, sdepth

    def node_depth(node, sdepth):
        if node >= m:
            return sdepth[node - m]
        return sdepth[parent[node] - m] + 1

    degenerate_run = 0
    bland = False
    pivots = 0
    budget = max_pivots or 400 * (m + k)

    while True:
        pivots += 1
        if pivots > budget:
            raise Infeasible("network simplex exceeded its pivot budget")
        u_pot, v_pot, sdepth = refresh_potentials()
        reduced = cost - u_pot[:, None] - v_pot[None, :]
        if bland:
            mask = reduced.ravel() < -tol
            if not mask.any():
                break
            flat = int(np.argmax(mask))
        else:
            flat = int(np.argmin(reduced.ravel()))
            if reduced.ravel()[flat] >= -tol:
                break
        ei, ej = divmod(flat, k)
        enter_src, enter_snk = ei, m + ej

        path_src, path_snk = [], []
        x, y = enter_src, enter_snk
        dx, dy = node_depth(x, sdepth), node_depth(y, sdepth)
        while dx > dy:
            path_src.append(x)
            x = parent[x]
            dx -= 1
        while dy > dx:
            path_snk.append(y)
            y = parent[y]
            dy -= 1
        while x != y:
            path_src.append(x)
            path_snk.append(y)
            x = parent[x]
            y = parent[y]

        theta = np.inf
        leave_node = None
        leave_in_src = True
        for which, path in enumerate((path_src, path_snk)):
            sgn = -1.0
            for node in path:
                if sgn < 0 and tree_flow[node] < theta:
                    theta = tree_flow[node]
                    leave_node = node
                    leave_in_src = which == 0
                sgn = -sgn
        if leave_node is None:
            raise Infeasible("unbounded pivot in transportation simplex")

        for path in (path_src, path_snk):
            sgn = -1.0
            for node in path:
                tree_flow[node] += sgn * theta
                sgn = -sgn

        if theta <= tol:
            degenerate_run += 1
            if degenerate_run > 40:
                bland = True
        else:
            degenerate_run = 0
            bland = False

        sub_end = enter_src if leave_in_src else enter_snk
        other_end = enter_snk if leave_in_src else enter_src
        chain = []
        x = sub_end
        while x != leave_node:
            chain.append(x)
            x = parent[x]
        chain.append(leave_node)
        prev = other_end
        flow_prev = theta
        for node in chain:
            old_flow = tree_flow[node]
            parent[node] = prev
            tree_flow[node] = flow_prev
            prev = node
            flow_prev = old_flow

    flows = []
    for node in range(n_nodes):
        if parent[node] == -1:
            continue
        i, j = arc_of(node)
        flows.append((i, j, float(tree_flow[node])))
    return flows
