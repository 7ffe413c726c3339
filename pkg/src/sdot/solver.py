"""Damped Newton solver for semi-discrete optimal and worst transport.

The unknown is the height vector of the site planes, gauge-fixed to zero
sum.  Each iteration builds the mode's power diagram, measures cell masses
against the target weights, assembles the mass Jacobian from wall
integrals, and takes a damped Newton step that is shrunk until the trial
diagram keeps every cell nonempty (and the residual improves).

OT minimizes a convex energy over the admissible height space; WT
maximizes the concave mirror image.  Both reduce to the same
positive-definite reduced system; only the initial step sign differs
(-1 for OT, +1 for WT).
"""

import warnings
from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from .density import build_overlay, mu_cell_volumes, mu_edge_length, quadratic_cost
from .diagram import (DiagramMode, cell_boundary_edges, power_diagram_all_pairs,
                      project_diagram)
from .errors import (EmptyCellDetected, InadmissibleState, MassMismatch,
                     SingularReducedSystem, StepExhausted)
from .hull import HullMode, _all_collinear, build_hull, flip_update

_DIAGRAM_FOR = {"ot": DiagramMode.NEAREST, "wt": DiagramMode.FARTHEST}
_HULL_FOR = {"ot": HullMode.LOWER, "wt": HullMode.UPPER}

_DENSE_LIMIT = 400
_DIRECT_LIMIT = 5000


@dataclass
class SolverConfig:
    """Knobs for :func:`solve`.

    epsilon is an absolute tolerance on the worst cell-mass error (masses
    are normalized, so it reads as a mass fraction).  The solver is
    single-threaded; ``threads`` is carried for interface parity and
    anything other than 1 is ignored.
    """

    mode: str = "ot"
    epsilon: float = 1e-7
    max_iterations: int = 100
    max_halvings: int = 62
    use_flip_updates: bool = True
    threads: int = 1

    def __post_init__(self):
        if self.mode not in ("ot", "wt"):
            raise ValueError("mode must be 'ot' or 'wt'")
        if self.epsilon <= 0:
            raise ValueError("epsilon must be positive")
        if self.max_iterations < 1:
            raise ValueError("max_iterations must be >= 1")


@dataclass(frozen=True)
class IterationStats:
    iteration: int
    residual: float
    step: float
    halvings: int
    flips: int


@dataclass
class TransportSolution:
    mode: str
    heights: np.ndarray
    assignment: list
    cost: float
    residual: float
    iterations: int
    converged: bool
    status: str
    trace: list
    points: np.ndarray = None
    weights: np.ndarray = None
    recovery_steps: int = 0


def zero_sum(h):
    """Project a height vector onto the zero-sum gauge."""
    h = np.asarray(h, dtype=float)
    return h - h.mean()


def init_heights(points, mode):
    """Paper initialization: h_i = -|p_i|^2/2 for OT, +|p_i|^2/2 for WT,
    shifted to zero sum."""
    points = np.asarray(points, dtype=float).reshape(-1, 2)
    sign = -0.5 if mode == "ot" else 0.5
    return zero_sum(sign * (points ** 2).sum(axis=1))


def assemble_system(diagram, mesh, weights, overlay=None):
    """Gradient w(h) - nu and the mass Jacobian at an admissible diagram.

    The Hessian of the transport energy: off-diagonal entries are the
    density-weighted wall lengths divided by site distances, with sign +
    for the farthest (WT) diagram and - for the nearest (OT) diagram;
    diagonals make every row sum to zero.
    """
    n = diagram.n_sites
    if diagram.empty_sites():
        raise InadmissibleState(f"empty cells at sites {diagram.empty_sites()}")
    if overlay is None:
        overlay = build_overlay(mesh, diagram)
    w = mu_cell_volumes(overlay, mesh, n)
    if np.any(w <= 0.0):
        raise InadmissibleState("some cell has zero source mass")
    gradient = w - np.asarray(weights, dtype=float)

    sign = 1.0 if diagram.mode is DiagramMode.FARTHEST else -1.0
    rows, cols, vals = [], [], []
    diag = np.zeros(n)
    for i, j, seg in cell_boundary_edges(diagram):
        lij = mu_edge_length(seg, i, j, diagram.points, mesh)
        if lij == 0.0:
            continue
        rows += [i, j]
        cols += [j, i]
        vals += [sign * lij, sign * lij]
        diag[i] -= sign * lij
        diag[j] -= sign * lij
    rows += list(range(n))
    cols += list(range(n))
    vals += list(diag)
    hessian = sp.csr_matrix((vals, (rows, cols)), shape=(n, n))
    return gradient, hessian


def _cg_zero_sum(m, b, rtol=1e-12, max_iter=None):
    """Conjugate gradient on the zero-sum subspace with Jacobi scaling."""
    n = len(b)
    precond = m.diagonal()
    precond = np.where(precond > 0, 1.0 / precond, 1.0)
    project = lambda v: v - v.mean()
    x = np.zeros(n)
    r = project(b)
    z = project(precond * r)
    p = z.copy()
    rz = r @ z
    bnorm = np.linalg.norm(b) or 1.0
    for _ in range(max_iter or 20 * n):
        if np.linalg.norm(r) <= rtol * bnorm:
            break
        mp = project(m @ p)
        alpha = rz / (p @ mp)
        x += alpha * p
        r -= alpha * mp
        z = project(precond * r)
        rz_next = r @ z
        p = z + (rz_next / rz) * p
        rz = rz_next
    return x


def newton_direction(gradient, hessian, method=None):
    """Solve the reduced Newton system on the zero-sum subspace.

    The assembled Hessian has the all-ones null vector; the sign of its
    diagonal tells which mode it came from.  We solve (s H) d = g with
    s chosen so the system is positive semidefinite, which makes the
    paper's step signs (-1 for OT, +1 for WT) the classical Newton update.
    """
    g = np.asarray(gradient, dtype=float)
    n = len(g)
    if n == 1:
        return np.zeros(1)
    diag = hessian.diagonal()
    s = 1.0 if diag.sum() >= 0 else -1.0
    m = (hessian * s).tocsr()

    if method is None:
        method = "dense" if n <= _DENSE_LIMIT else (
            "direct" if n <= _DIRECT_LIMIT else "cg")
    try:
        if method == "dense":
            rho = float(np.abs(m.diagonal()).mean()) or 1.0
            a = m.toarray() + rho / n
            d = np.linalg.solve(a, g)
        elif method == "direct":
            one = np.ones((n, 1))
            k = sp.bmat([[m, one], [one.T, None]], format="csc")
            rhs = np.concatenate([g, [0.0]])
            d = spla.spsolve(k, rhs)[:n]
        elif method == "cg":
            d = _cg_zero_sum(m, g)
        else:
            raise ValueError(f"unknown method {method!r}")
    except Exception as exc:  # numerical failure surfaces as a typed error
        raise SingularReducedSystem(str(exc)) from exc

    if not np.all(np.isfinite(d)):
        raise SingularReducedSystem("non-finite Newton direction")
    resid = m @ d - g
    gscale = max(1.0, float(np.abs(g).max()))
    if float(np.abs(resid).max()) > 1e-6 * gscale:
        raise SingularReducedSystem("reduced system solve did not converge")
    return d - d.mean()


def damped_update(h, d, mode, max_halvings, is_admissible):
    """Shrink the step by halving until the diagram keeps all cells alive.

    ``is_admissible`` receives a candidate height vector and reports
    whether the mode's power diagram has no empty cell.  Returns the
    accepted heights and the signed step length actually used.
    """
    h = np.asarray(h, dtype=float)
    d = np.asarray(d, dtype=float)
    lam = -1.0 if mode == "ot" else 1.0
    for _ in range(max_halvings + 1):
        trial = zero_sum(h + lam * d)
        if is_admissible(trial):
            return trial, lam
        lam *= 0.5
    raise StepExhausted(
        f"no admissible step after {max_halvings} halvings")


class _State:
    __slots__ = ("h", "diagram", "hull", "overlay", "w", "empty", "flips")

    def __init__(self, h, diagram=None, hull=None, overlay=None, w=None,
                 empty=(), flips=0):
        self.h = h
        self.diagram = diagram
        self.hull = hull
        self.overlay = overlay
        self.w = w
        self.empty = list(empty)
        self.flips = flips


class _Workspace:
    """Shared geometry context for one solve call."""

    def __init__(self, mesh, points, weights, mode, use_flips=True):
        self.mesh = mesh
        self.points = points
        self.weights = weights
        self.mode = mode
        self.dmode = _DIAGRAM_FOR[mode]
        self.hmode = _HULL_FOR[mode]
        self.use_flips = use_flips
        self.n = len(points)
        self.use_hull = self.n >= 3 and not _all_collinear(points)

    def evaluate(self, h, base_hull=None):
        """Diagram, overlay and cell masses at h; never raises on emptiness."""
        hull = None
        if self.use_hull:
            if base_hull is not None and self.use_flips:
                try:
                    hull = flip_update(base_hull, h)
                except EmptyCellDetected as exc:
                    return _State(h, empty=exc.sites or [-1])
            else:
                hull = build_hull(self.points, self.hmode, heights=h)
            diagram = project_diagram(hull, self.mesh.domain)
        else:
            diagram = power_diagram_all_pairs(self.points, h, self.mesh.domain,
                                              self.dmode)
        empty = diagram.empty_sites()
        if empty:
            return _State(h, diagram, hull, empty=empty,
                          flips=hull.flips if hull else 0)
        overlay = build_overlay(self.mesh, diagram)
        w = mu_cell_volumes(overlay, self.mesh, self.n)
        empty = [i for i in range(self.n) if w[i] <= 0.0]
        return _State(h, diagram, hull, overlay, w, empty,
                      flips=hull.flips if hull else 0)


def _plane_activation(ws, h, state, boost=1.0):
    """Lower (raise) the planes of empty farthest (nearest) cells just enough
    to become active somewhere over the domain.

    The envelope restricted to any cell is linear, so its extreme values
    over the domain are attained at cell vertices; probing those vertices
    gives the exact activation threshold.
    """
    points = ws.points
    probes = [ws.mesh.domain.boundary.vertices]
    for cell in state.diagram.cells:
        if not cell.is_empty:
            probes.append(cell.vertices)
    probe = np.vstack(probes)
    active = [i for i in range(ws.n) if i not in state.empty]
    vals = probe @ points[active].T + h[active]
    if ws.dmode is DiagramMode.NEAREST:
        envelope = vals.max(axis=1)
    else:
        envelope = vals.min(axis=1)
    h = h.copy()
    spread = float(envelope.max() - envelope.min())
    delta = 1e-3 * (spread + 1e-9) * boost
    for i in state.empty:
        margin = envelope - probe @ points[i]
        if ws.dmode is DiagramMode.NEAREST:
            h[i] = float(margin.min()) + delta
        else:
            h[i] = float(margin.max()) - delta
    return zero_sum(h)


def _recover_admissibility(ws, h, state):
    """Move an inadmissible start into the admissible space.

    The WT initialization of the height vector can leave some farthest
    cells off the domain entirely (the paper's formula does not guarantee
    admissibility once cells are clipped).  First try the closed-form
    reflected start, then activate missing planes one sweep at a time.
    """
    steps = 0
    if ws.dmode is DiagramMode.FARTHEST:
        t = ws.mesh.domain.centroid() + ws.points.mean(axis=0)
        mirrored = t - ws.points
        margin = 1e-9 * ws.mesh.domain.diameter()
        if all(ws.mesh.domain.contains(q, tol=-margin) for q in mirrored):
            cand = zero_sum(0.5 * (ws.points ** 2).sum(axis=1) - ws.points @ t)
            st = ws.evaluate(cand)
            steps += 1
            if not st.empty:
                return cand, st, steps
            h, state = cand, st
    for attempt in range(80):
        if not state.empty:
            return h, state, steps
        if state.diagram is None:
            state = ws.evaluate(h)
            steps += 1
            continue
        h = _plane_activation(ws, h, state, boost=2.0 ** (attempt // 4))
        state = ws.evaluate(h)
        steps += 1
    raise StepExhausted("failed to reach the admissible space from the "
                        "initial heights")


def _extract_measure(measure):
    if hasattr(measure, "points") and hasattr(measure, "weights"):
        points = np.asarray(measure.points, dtype=float).reshape(-1, 2)
        weights = np.asarray(measure.weights, dtype=float).reshape(-1)
    else:
        points, weights = measure
        points = np.asarray(points, dtype=float).reshape(-1, 2)
        weights = np.asarray(weights, dtype=float).reshape(-1)
    if len(points) != len(weights):
        raise ValueError("points and weights length mismatch")
    if len(points) == 0:
        raise ValueError("measure must contain at least one point")
    if np.any(weights <= 0):
        raise ValueError("target weights must be positive")
    return points, weights


def _merge_duplicates(points, weights, domain):
    scale = max(domain.diameter(), 1e-300)
    keys = np.round(points / (1e-13 * scale)).astype(np.int64)
    _, first, inverse = np.unique(keys, axis=0, return_index=True,
                                  return_inverse=True)
    if len(first) == len(points):
        return points, weights
    order = np.argsort(first)
    rank = np.empty_like(order)
    rank[order] = np.arange(len(order))
    merged_points = points[np.sort(first)]
    merged_weights = np.zeros(len(first))
    np.add.at(merged_weights, rank[inverse], weights)
    return merged_points, merged_weights


def _boundary_distance(point, polygon):
    v = polygon.vertices
    nxt = np.roll(v, -1, axis=0)
    d = nxt - v
    lengths = np.hypot(d[:, 0], d[:, 1])
    cross = d[:, 0] * (point[1] - v[:, 1]) - d[:, 1] * (point[0] - v[:, 0])
    return float((cross / lengths).min())


def _nudge_inside(points, domain):
    margin = 1e-9 * domain.diameter()
    center = domain.centroid()
    out = points.copy()
    nudged = []
    for i, p in enumerate(points):
        dist = _boundary_distance(p, domain.boundary)
        if dist < -margin:
            raise ValueError(
                f"target point {i} lies outside the domain; normalize first")
        if dist < margin:
            direction = center - p
            nrm = np.hypot(*direction)
            if nrm > 0:
                out[i] = p + direction * (margin / nrm) * 2.0
                nudged.append(i)
    if nudged:
        warnings.warn(f"nudged {len(nudged)} boundary sites into the domain "
                      f"interior", stacklevel=2)
    return out


def solve(mesh, measure, config=None, initial_heights=None):
    """Compute the semi-discrete OT or WT map from a density mesh to a
    discrete measure.

    Returns a TransportSolution whose residual is the worst cell-mass error
    max_i |w_i - nu_i|.  Raises MassMismatch when the measures do not
    balance and StepExhausted when damping cannot keep the iterate
    admissible.
    """
    config = config or SolverConfig()
    mode = config.mode
    points, weights = _extract_measure(measure)
    points, weights = _merge_duplicates(points, weights, mesh.domain)
    total = float(weights.sum())
    mass = mesh.total_mass()
    if abs(total - mass) > 1e-12 * max(abs(mass), 1.0):
        raise MassMismatch(f"target mass {total} != source mass {mass}")
    points = _nudge_inside(points, mesh.domain)

    ws = _Workspace(mesh, points, weights, mode, config.use_flip_updates)
    if initial_heights is not None:
        h = zero_sum(np.asarray(initial_heights, dtype=float))
        if len(h) != len(points):
            raise ValueError("initial heights length mismatch")
    else:
        h = init_heights(points, mode)

    state = ws.evaluate(h)
    recovery_steps = 0
    if state.empty:
        h, state, recovery_steps = _recover_admissibility(ws, h, state)

    lam0 = -1.0 if mode == "ot" else 1.0
    trace = []
    converged = False
    weak_steps = False
    residual = float("inf")
    iterations = 0

    for it in range(1, config.max_iterations + 1):
        iterations = it
        gradient = state.w - weights
        residual = float(np.abs(gradient).max())
        if residual < config.epsilon:
            trace.append(IterationStats(it, residual, 0.0, 0, 0))
            converged = True
            break

        _, hessian = assemble_system(state.diagram, mesh, weights,
                                     overlay=state.overlay)
        d = newton_direction(gradient, hessian)

        lam = lam0
        halvings = 0
        accepted = None
        fallback = None
        base_hull = state.hull if it >= 2 else None
        while halvings <= config.max_halvings:
            trial_h = zero_sum(h + lam * d)
            trial = ws.evaluate(trial_h, base_hull=base_hull)
            if not trial.empty:
                trial_res = float(np.abs(trial.w - weights).max())
                if trial_res <= (1.0 - 0.5 * abs(lam)) * residual:
                    accepted = (trial_h, trial, lam)
                    break
                if fallback is None or trial_res < fallback[3]:
                    fallback = (trial_h, trial, lam, trial_res)
            lam *= 0.5
            halvings += 1

        if accepted is None and fallback is not None and fallback[3] < residual:
            accepted = fallback[:3]
            weak_steps = True
        if accepted is None:
            raise StepExhausted(
                f"no admissible improving step at iteration {it} "
                f"(residual {residual:.3e})")
        h, state, lam_used = accepted
        trace.append(IterationStats(it, residual, lam_used, halvings,
                                    state.flips))

    if converged:
        status = "converged"
    else:
        status = "max_iterations_exceeded"
    if weak_steps:
        status += "+weak_steps"

    cost = quadratic_cost(state.overlay, mesh, points)
    final_residual = float(np.abs(state.w - weights).max())
    return TransportSolution(
        mode=mode,
        heights=state.h,
        assignment=list(state.diagram.cells),
        cost=float(cost),
        residual=final_residual,
        iterations=iterations,
        converged=converged,
        status=status,
        trace=trace,
        points=points,
        weights=weights,
        recovery_steps=recovery_steps,
    )
