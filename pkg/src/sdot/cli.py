"""Command-line front end.

Subcommands: solve | cohort | oracle | render | synth.  Every run writes
its primary output plus a sibling ``<out>.manifest.json`` with the
invocation record; the manifest carries the wall time and is the only
output that is not byte-reproducible across reruns.  Exit codes: 0 on
success, 1 on any module error (with a machine-readable error JSON), 2 on
bad usage.
"""

import argparse
import json
import logging
import os
import sys
import time
from pathlib import Path

import numpy as np

from . import __version__
from .diagram import DiagramMode, power_diagram
from .errors import SdotError
from .meshio import (MeasureFile, extract_source_density,
                     extract_target_measure, normalize_into_domain,
                     read_density_csv, read_domain_csv, read_measure_csv,
                     read_poff, write_poff)
from .oracle import atomize, lp_transport
from .solver import SolverConfig, solve
from .stats import (batch_costs, flat_disk_template, permutation_test,
                    synthesize_cohort)
from .svg import diagram_svg, write_svg

log = logging.getLogger("sdot")


def _json_dumps(obj):
    return json.dumps(obj, sort_keys=True, indent=2) + "\n"


def _write_json(path, obj):
    Path(path).write_text(_json_dumps(obj))


def _write_manifest(out_path, subcommand, args, summary, started):
    manifest = {
        "subcommand": subcommand,
        "inputs": {k: v for k, v in vars(args).items()
                   if isinstance(v, (str, int, float, bool)) or v is None},
        "tool_version": __version__,
        "wall_time_s": time.monotonic() - started,
        "summary": summary,
    }
    _write_json(str(out_path) + ".manifest.json", manifest)


def _solution_payload(solution, scale, offset):
    return {
        "mode": solution.mode,
        "n_sites": int(len(solution.heights)),
        "cost": float(solution.cost),
        "residual": float(solution.residual),
        "iterations": int(solution.iterations),
        "heights": [float(h) for h in solution.heights],
        "transform": {"scale": float(scale),
                      "offset": [float(offset[0]), float(offset[1])]},
        "trace": [
            {"iteration": t.iteration, "residual": t.residual,
             "step": t.step, "halvings": t.halvings, "flips": t.flips}
            for t in solution.trace
        ],
    }


def _load_problem(args):
    mesh = read_density_csv(args.density, args.domain).normalize()
    measure = read_measure_csv(args.measure).normalized()
    points, scale, offset = normalize_into_domain(measure.points, mesh.domain)
    return mesh, points, measure.weights, scale, offset


def cmd_solve(args):
    started = time.monotonic()
    mesh, points, weights, scale, offset = _load_problem(args)
    config = SolverConfig(mode=args.mode, epsilon=args.epsilon,
                          max_iterations=args.max_iter, threads=args.threads)
    solution = solve(mesh, (points, weights), config)
    payload = _solution_payload(solution, scale, offset)
    _write_json(args.out, payload)
    if args.svg:
        write_svg(args.svg, diagram_svg(mesh.domain, solution.assignment,
                                        solution.points, px=args.px))
    _write_manifest(args.out, "solve", args,
                    {"cost": payload["cost"], "residual": payload["residual"],
                     "converged": solution.converged}, started)
    log.info("solve %s: cost=%.8g residual=%.3g iterations=%d", args.mode,
             solution.cost, solution.residual, solution.iterations)
    return 0


def cmd_oracle(args):
    started = time.monotonic()
    mesh, points, weights, scale, offset = _load_problem(args)
    source = atomize(mesh, args.grid)
    measure = MeasureFile(points, weights)
    min_cost, _ = lp_transport(source, measure, "min")
    max_cost, _ = lp_transport(source, measure, "max")
    payload = {"grid": args.grid, "n_atoms": int(len(source.masses)),
               "min_cost": float(min_cost), "max_cost": float(max_cost),
               "transform": {"scale": float(scale),
                             "offset": [float(offset[0]), float(offset[1])]}}
    text = _json_dumps(payload)
    sys.stdout.write(text)
    if args.out:
        Path(args.out).write_text(text)
        _write_manifest(args.out, "oracle", args,
                        {"min_cost": payload["min_cost"],
                         "max_cost": payload["max_cost"]}, started)
    return 0


def cmd_render(args):
    started = time.monotonic()
    with open(args.solution) as fh:
        payload = json.load(fh)
    domain = read_domain_csv(args.domain)
    measure = read_measure_csv(args.measure).normalized()
    transform = payload["transform"]
    points = (np.asarray(measure.points) * transform["scale"]
              + np.asarray(transform["offset"]))
    heights = np.asarray(payload["heights"], dtype=float)
    if len(heights) != len(points):
        raise SdotError("solution heights do not match the measure file")
    mode = (DiagramMode.NEAREST if payload["mode"] == "ot"
            else DiagramMode.FARTHEST)
    diagram = power_diagram(points, heights, domain, mode)
    write_svg(args.out, diagram_svg(domain, diagram.cells, points, px=args.px))
    _write_manifest(args.out, "render", args,
                    {"cells": int(sum(1 for c in diagram.cells
                                      if not c.is_empty))}, started)
    return 0


def cmd_synth(args):
    started = time.monotonic()
    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    subjects = synthesize_cohort(args.n, args.amplitude, args.seed,
                                 rings=args.rings)
    template = flat_disk_template(rings=args.rings)
    write_poff(template, out_dir / "template.poff")
    for idx, subject in enumerate(subjects):
        write_poff(subject, out_dir / f"subject_{idx:03d}.poff")
    _write_manifest(out_dir / "synth", "synth", args,
                    {"subjects": args.n}, started)
    return 0


def _cohort_features(group_dir, domain):
    files = sorted(Path(group_dir).glob("*.poff"))
    files = [f for f in files if f.name != "template.poff"]
    measures = []
    areas = []
    masses = []
    for f in files:
        m = read_poff(str(f))
        meas = extract_target_measure(m)
        pts, _, _ = normalize_into_domain(meas.points, domain)
        measures.append((pts, meas.weights))
        areas.append(m.total_area_3d())
        # cortical volume is not recoverable from a parameterized patch;
        # substitute the raw 1/3-rule measure mass (see manifest note)
        masses.append(float((m.face_areas_3d() / 3.0).sum() * 3.0))
    return files, measures, np.array(areas), np.array(masses)


def cmd_cohort(args):
    started = time.monotonic()
    template = read_poff(args.template)
    mesh = extract_source_density(template)

    files_a, measures_a, area_a, mass_a = _cohort_features(
        args.group_a, mesh.domain)
    files_b, measures_b, area_b, mass_b = _cohort_features(
        args.group_b, mesh.domain)
    if not files_a or not files_b:
        raise SdotError("cohort groups must both be nonempty")

    features = {"area": (area_a, area_b), "volume": (mass_a, mass_b)}
    failures = {}
    for mode in ("ot", "wt"):
        config = SolverConfig(mode=mode, epsilon=args.epsilon,
                              max_iterations=args.max_iter)
        costs_a, fail_a = batch_costs(mesh, measures_a, mode, config)
        costs_b, fail_b = batch_costs(mesh, measures_b, mode, config)
        features[mode] = (costs_a, costs_b)
        failures[mode] = {"group_a": fail_a, "group_b": fail_b}

    prefix = Path(args.out_prefix)
    prefix.parent.mkdir(parents=True, exist_ok=True)

    with open(f"{prefix}_costs.csv", "w") as fh:
        fh.write("group,subject,area,volume,ot,wt\n")
        for g, files, sel in (("a", files_a, 0), ("b", files_b, 1)):
            for row, f in enumerate(files):
                vals = [features[name][sel][row]
                        for name in ("area", "volume", "ot", "wt")]
                cells = ",".join(repr(float(v)) for v in vals)
                fh.write(f"{g},{f.name},{cells}\n")

    results = {}
    for name, (va, vb) in features.items():
        ok_a = ~np.isnan(va)
        ok_b = ~np.isnan(vb)
        res = permutation_test(va[ok_a], vb[ok_b], n_perm=args.n_perm,
                               seed=args.seed)
        results[name] = res.to_dict()
        _write_json(f"{prefix}_{name}.json", results[name])

    summary = {name: {"p_value": results[name]["p_value"]}
               for name in results}
    summary["failures"] = failures
    summary["volume_feature"] = ("total 1/3-rule measure mass substituted "
                                 "for cortical volume")
    _write_json(f"{prefix}_summary.json",
                {"features": {k: results[k]["p_value"] for k in results},
                 "failures": failures})
    _write_manifest(f"{prefix}_summary.json", "cohort", args, summary, started)
    return 0


def build_parser():
    parser = argparse.ArgumentParser(
        prog="sdot",
        description="Semi-discrete optimal/worst transportation toolkit")
    sub = parser.add_subparsers(dest="subcommand", required=True)

    def add_common(p):
        p.add_argument("--threads", type=int, default=1,
                       help="worker cap; 1 guarantees determinism")

    p_solve = sub.add_parser("solve", help="compute one OT or WT map")
    p_solve.add_argument("--mode", choices=("ot", "wt"), required=True)
    p_solve.add_argument("--density", required=True)
    p_solve.add_argument("--domain", required=True)
    p_solve.add_argument("--measure", required=True)
    p_solve.add_argument("--out", required=True)
    p_solve.add_argument("--svg")
    p_solve.add_argument("--px", type=int, default=640)
    p_solve.add_argument("--epsilon", type=float, default=1e-7)
    p_solve.add_argument("--max-iter", type=int, default=100)
    add_common(p_solve)
    p_solve.set_defaults(func=cmd_solve)

    p_oracle = sub.add_parser("oracle", help="brute-force LP min/max costs")
    p_oracle.add_argument("--density", required=True)
    p_oracle.add_argument("--domain", required=True)
    p_oracle.add_argument("--measure", required=True)
    p_oracle.add_argument("--grid", type=int, default=64)
    p_oracle.add_argument("--out")
    add_common(p_oracle)
    p_oracle.set_defaults(func=cmd_oracle)

    p_render = sub.add_parser("render", help="SVG of a solved diagram")
    p_render.add_argument("--solution", required=True)
    p_render.add_argument("--domain", required=True)
    p_render.add_argument("--measure", required=True)
    p_render.add_argument("--out", required=True)
    p_render.add_argument("--px", type=int, default=640)
    add_common(p_render)
    p_render.set_defaults(func=cmd_render)

    p_synth = sub.add_parser("synth", help="synthesize a cohort of subjects")
    p_synth.add_argument("--out-dir", required=True)
    p_synth.add_argument("--n", type=int, default=20)
    p_synth.add_argument("--amplitude", type=float, default=0.2)
    p_synth.add_argument("--seed", type=int, default=0)
    p_synth.add_argument("--rings", type=int, default=4)
    add_common(p_synth)
    p_synth.set_defaults(func=cmd_synth)

    p_cohort = sub.add_parser("cohort", help="two-group feature comparison")
    p_cohort.add_argument("--template", required=True)
    p_cohort.add_argument("--group-a", required=True)
    p_cohort.add_argument("--group-b", required=True)
    p_cohort.add_argument("--out-prefix", required=True)
    p_cohort.add_argument("--n-perm", type=int, default=50_000)
    p_cohort.add_argument("--seed", type=int, default=0)
    p_cohort.add_argument("--epsilon", type=float, default=1e-7)
    p_cohort.add_argument("--max-iter", type=int, default=100)
    add_common(p_cohort)
    p_cohort.set_defaults(func=cmd_cohort)

    return parser


def main(argv=None):
    level = os.environ.get("WT_LOG", "WARNING").upper()
    logging.basicConfig(level=getattr(logging, level, logging.WARNING),
                        format="%(levelname)s %(name)s: %(message)s")
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except SdotError as exc:
        sys.stderr.write(_json_dumps(
            {"error": type(exc).__name__, "message": str(exc)}))
        return 1
    except (OSError, ValueError) as exc:
        sys.stderr.write(_json_dumps(
            {"error": type(exc).__name__, "message": str(exc)}))
        return 1


if __name__ == "__main__":
    sys.exit(main())
