"""Command-line front end.

Subcommands mirror the pipeline stages so failures are bisectable:
``generate``, ``layout``, ``detect``, ``render`` each run one stage on the
interchange files; ``bench`` runs the full experiment grid.

Exit codes: 0 full success, 1 any experiment cell failed, 2 configuration
error.  ``CWBOUND_OUT`` sets the default output directory.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from pathlib import Path

import numpy as np

from .bench import ExperimentConfig, emit_svg, run_experiment
from .boundary import default_alpha, evaluate, extract_boundary, save_prediction_csv
from .errors import ConfigError, CWBoundError
from .graph import load_topology, save_topology
from .layout import LayoutConfig, run_cwbound, run_fr_baseline, save_layout_csv, save_trace_csv
from .netgen import ShapeSpec, connect_by_radius, generate_points, perturb_weights, save_points_csv
from .whispers import WhispersConfig, save_clusters_csv


def _default_out():
    return os.environ.get("CWBOUND_OUT", ".")


def _out_dir(args):
    path = Path(args.out_dir)
    path.mkdir(parents=True, exist_ok=True)
    return path


def load_layout_csv(path):
    rows = np.loadtxt(path, delimiter=",", skiprows=1, ndmin=2)
    order = np.argsort(rows[:, 0])
    return rows[order, 1:3]


def load_prediction_csv(path):
    rows = np.loadtxt(path, delimiter=",", skiprows=1, dtype=np.int64, ndmin=2)
    predicted = set(rows[rows[:, 1] == 1, 0].tolist())
    truth = set(rows[rows[:, 2] == 1, 0].tolist())
    return predicted, truth


def cmd_generate(args):
    out = _out_dir(args)
    shape = ShapeSpec(
        kind=args.shape, scale=args.scale,
        inner_ratio=args.inner_ratio, star_points=args.star_points,
    )
    points = generate_points(shape, args.n, args.boundary_fraction, args.seed)
    exact, radius = connect_by_radius(points, args.degree, args.degree_tol)
    topology = perturb_weights(exact, points, args.noise, args.seed)
    truth = points.mandatory_boundary_ids.tolist()
    save_points_csv(points, out / "points.csv")
    save_topology(topology, out / "topology.json", ground_truth_boundary=truth)
    print(json.dumps({
        "out_dir": str(out),
        "nodes": len(points),
        "edges": topology.edge_count,
        "average_degree": topology.average_degree,
        "radius": radius,
        "boundary_nodes": len(truth),
    }))
    return 0


def cmd_layout(args):
    out = _out_dir(args)
    topology, _ = load_topology(args.topology)
    config = LayoutConfig(
        canvas_size=args.canvas_size,
        expansion_multiplier=args.expansion_multiplier,
        gravity_coefficient=args.gravity,
        time_budget=args.time_budget,
        proportionality_threshold=args.proportionality_threshold,
        recluster_period=args.recluster_period,
        cooling_factor=args.cooling_factor,
        seed=args.seed,
        init_estdist=args.init_estdist,
    )
    if args.algorithm == "cwbound":
        wconfig = WhispersConfig(delta=args.delta, seed=args.seed)
        result = run_cwbound(topology, config, wconfig)
        if result.state.assignment is not None:
            save_clusters_csv(result.state.assignment, out / "clusters.csv")
    else:
        result = run_fr_baseline(topology, config)
    save_layout_csv(result.positions, out / "layout.csv")
    save_trace_csv(result.trace, out / "trace.csv")
    print(json.dumps({
        "out_dir": str(out),
        "algorithm": args.algorithm,
        "iterations": result.iterations,
        "elapsed_s": result.elapsed,
        "converged": result.converged,
        "stop_reason": result.stop_reason,
        "final_proportionality": result.final_proportionality,
    }))
    return 0


def cmd_detect(args):
    out = _out_dir(args)
    positions = load_layout_csv(args.layout)
    topology, truth = (None, None)
    if args.topology:
        topology, truth = load_topology(args.topology)
    alpha = args.alpha if args.alpha is not None else default_alpha(positions, topology)
    prediction = extract_boundary(positions, alpha)
    doc = {
        "alpha": alpha,
        "predicted_boundary_count": len(prediction.boundary_ids),
        "inner_boundary_count": len(prediction.inner_boundary_ids),
        "degenerate": prediction.degenerate,
    }
    if truth is not None:
        report = evaluate(prediction, truth, len(positions))
        doc["metrics"] = report.to_dict()
        save_prediction_csv(prediction, truth, len(positions), out / "prediction.csv")
    else:
        save_prediction_csv(prediction, set(), len(positions), out / "prediction.csv")
    with open(out / "metrics.json", "w", encoding="utf-8") as fh:
        json.dump(doc, fh, indent=2)
        fh.write("\n")
    print(json.dumps(doc))
    return 0


def cmd_render(args):
    positions = load_layout_csv(args.layout)
    edges = []
    truth = set()
    if args.topology:
        topology, gt = load_topology(args.topology)
        edges = topology.edges
        truth = set(gt or [])
    predicted = set()
    if args.prediction:
        predicted, pred_truth = load_prediction_csv(args.prediction)
        truth = truth or pred_truth
    emit_svg(positions, edges, predicted, truth, args.canvas_size, args.out)
    print(json.dumps({"out": str(args.out), "nodes": len(positions), "edges": len(edges)}))
    return 0


def cmd_bench(args):
    doc = {}
    if args.config:
        with open(args.config, "r", encoding="utf-8") as fh:
            doc = json.load(fh)
    if args.shapes:
        doc["shapes"] = [s.strip() for s in args.shapes.split(",") if s.strip()]
    if args.node_counts:
        doc["node_counts"] = [int(s) for s in args.node_counts.split(",")]
    if args.degrees:
        doc["target_avg_degrees"] = [float(s) for s in args.degrees.split(",")]
    if args.algorithms:
        doc["algorithms"] = [s.strip() for s in args.algorithms.split(",")]
    if args.seeds:
        doc["seeds"] = [int(s) for s in args.seeds.split(",")]
    if args.seed is not None:
        doc["seeds"] = [args.seed]
    if args.time_budget is not None:
        doc["time_budget"] = args.time_budget
    if args.sensitivity_target is not None:
        doc["sensitivity_target"] = args.sensitivity_target
    if args.eval_every is not None:
        doc["eval_every"] = args.eval_every
    if args.out_dir is not None:
        doc["out_dir"] = args.out_dir
    doc.setdefault("out_dir", _default_out())
    if args.sequential:
        doc["sequential"] = True

    config = ExperimentConfig.from_dict(doc)
    result = run_experiment(config)
    print(json.dumps({
        "out_dir": str(result.out_dir),
        "cells": len(result.rows),
        "failures": [name for name, _ in result.failures],
    }))
    return 0 if result.ok else 1


def build_parser():
    parser = argparse.ArgumentParser(prog="cwbound", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("generate", help="generate a labeled network topology")
    p.add_argument("--shape", required=True, choices=["u_shape", "doughnut", "smile", "star"])
    p.add_argument("--n", type=int, default=500)
    p.add_argument("--degree", type=float, default=8.0)
    p.add_argument("--boundary-fraction", type=float, default=0.25)
    p.add_argument("--noise", type=float, default=0.1)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--scale", type=float, default=1000.0)
    p.add_argument("--inner-ratio", type=float, default=0.5)
    p.add_argument("--star-points", type=int, default=5)
    p.add_argument("--degree-tol", type=float, default=0.25)
    p.add_argument("--out-dir", default=_default_out())
    p.set_defaults(func=cmd_generate)

    p = sub.add_parser("layout", help="lay out a topology")
    p.add_argument("--topology", required=True)
    p.add_argument("--algorithm", choices=["cwbound", "fr"], default="cwbound")
    p.add_argument("--time-budget", type=float, default=60.0)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--canvas-size", type=float, default=1000.0)
    p.add_argument("--expansion-multiplier", type=float, default=1.5)
    p.add_argument("--gravity", type=float, default=0.05)
    p.add_argument("--proportionality-threshold", type=float, default=0.9)
    p.add_argument("--recluster-period", type=int, default=10)
    p.add_argument("--cooling-factor", type=float, default=0.97)
    p.add_argument("--delta", type=float, default=0.0)
    p.add_argument("--init-estdist", action="store_true")
    p.add_argument("--out-dir", default=_default_out())
    p.set_defaults(func=cmd_layout)

    p = sub.add_parser("detect", help="extract boundary nodes from a layout")
    p.add_argument("--layout", required=True)
    p.add_argument("--topology", help="topology JSON for edge lengths and ground truth")
    p.add_argument("--alpha", type=float)
    p.add_argument("--out-dir", default=_default_out())
    p.set_defaults(func=cmd_detect)

    p = sub.add_parser("render", help="render a layout to SVG")
    p.add_argument("--layout", required=True)
    p.add_argument("--topology")
    p.add_argument("--prediction")
    p.add_argument("--canvas-size", type=float, default=1000.0)
    p.add_argument("--out", default="layout.svg")
    p.set_defaults(func=cmd_render)

    p = sub.add_parser("bench", help="run the experiment grid")
    p.add_argument("--config", help="JSON file mirroring ExperimentConfig fields")
    p.add_argument("--shapes", help="comma-separated shape kinds")
    p.add_argument("--node-counts")
    p.add_argument("--degrees")
    p.add_argument("--algorithms")
    p.add_argument("--seeds", help="comma-separated seeds")
    p.add_argument("--seed", type=int, help="single seed shorthand")
    p.add_argument("--time-budget", type=float)
    p.add_argument("--sensitivity-target", type=float)
    p.add_argument("--eval-every", type=int)
    p.add_argument("--out-dir")
    p.add_argument("--sequential", action="store_true",
                   help="pin cells to sequential execution (always on in this build)")
    p.set_defaults(func=cmd_bench)

    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except CWBoundError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
