"""Semi-discrete optimal and worst transportation on planar densities.

The package computes Brenier-potential heights, clipped power diagrams,
and quadratic transport costs between a piecewise-constant planar density
and a weighted point set, in both the cheapest (OT) and costliest (WT)
direction, plus a permutation-test harness that uses the scalar costs as
per-subject shape features.
"""

__version__ = "0.1.0"

from .density import (DensityMesh, Overlay, build_overlay, grid_mesh,
                      mu_cell_volumes, mu_edge_length, quadratic_cost,
                      unit_square_mesh)
from .diagram import (DiagramMode, Domain, PowerDiagram, cell_boundary_edges,
                      power_diagram, power_diagram_all_pairs, project_diagram)
from .geometry import (ConvexPolygon, Segment, clip_halfplane,
                       convex_intersection, polygon_area, quadratic_moment)
from .hull import (HullMode, HullTriangulation, LiftedPoint, build_hull,
                   dual_vertex, flip_update)
from .meshio import (MeasureFile, ParameterizedMesh, extract_source_density,
                     extract_target_measure, normalize_into_domain,
                     read_density_csv, read_measure_csv, read_poff,
                     write_density_csv, write_measure_csv, write_poff)
from .oracle import AtomizedSource, atomize, lp_transport
from .predicates import orient2d, orient3d
from .solver import (IterationStats, SolverConfig, TransportSolution,
                     assemble_system, damped_update, init_heights,
                     newton_direction, solve, zero_sum)
from .stats import (CohortResult, batch_costs, disk_mesh, flat_disk_template,
                    permutation_test, synthesize_cohort)

__all__ = [
    "AtomizedSource", "CohortResult", "ConvexPolygon", "DensityMesh",
    "DiagramMode", "Domain", "HullMode", "HullTriangulation",
    "IterationStats", "LiftedPoint", "MeasureFile", "Overlay",
    "ParameterizedMesh", "PowerDiagram", "Segment", "SolverConfig",
    "TransportSolution", "assemble_system", "atomize", "batch_costs",
    "build_hull", "build_overlay", "cell_boundary_edges", "clip_halfplane",
    "convex_intersection", "damped_update", "disk_mesh", "dual_vertex",
    "extract_source_density", "extract_target_measure", "flat_disk_template",
    "flip_update", "grid_mesh", "init_heights", "lp_transport",
    "mu_cell_volumes", "mu_edge_length", "newton_direction",
    "normalize_into_domain", "orient2d", "orient3d", "permutation_test",
    "polygon_area", "power_diagram", "power_diagram_all_pairs",
    "project_diagram", "quadratic_cost", "quadratic_moment",
    "read_density_csv", "read_measure_csv", "read_poff", "solve",
    "synthesize_cohort", "unit_square_mesh", "write_density_csv",
    "write_measure_csv", "write_poff", "zero_sum",
]
