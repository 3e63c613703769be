"""Experiment harness: generate -> cluster -> lay out -> extract -> score.

Every experiment cell (shape x node count x degree x algorithm x seed) runs
the full pipeline with periodic boundary evaluation, stops early at the
sensitivity target or on a sensitivity plateau, and leaves its artifacts in
its own subdirectory.  An aggregate summary.csv has one row per cell.
"""

from __future__ import annotations

import json
import sys
import traceback
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .boundary import default_alpha, evaluate, extract_boundary, save_prediction_csv
from .errors import ConfigError
from .graph import save_topology
from .layout import LayoutConfig, run_cwbound, run_fr_baseline, save_layout_csv
from .netgen import ShapeSpec, connect_by_radius, generate_points, perturb_weights, save_points_csv
from .whispers import WhispersConfig, save_clusters_csv

__all__ = ["ExperimentConfig", "ExperimentResult", "run_experiment", "emit_svg"]

ALGORITHMS = ("cwbound", "fr")

SUMMARY_COLUMNS = [
    "shape", "n", "degree", "algorithm", "seed",
    "sensitivity", "specificity", "accuracy", "time_to_target_s", "iterations",
]


@dataclass
class ExperimentConfig:
    shapes: list = field(default_factory=lambda: [ShapeSpec("doughnut")])
    node_counts: list = field(default_factory=lambda: [500])
    target_avg_degrees: list = field(default_factory=lambda: [8.0])
    algorithms: list = field(default_factory=lambda: ["cwbound", "fr"])
    time_budget: float = 60.0
    sensitivity_target: float = 0.9
    plateau_iters: int = 100
    seeds: list = field(default_factory=lambda: [0])
    out_dir: str = "cwbound-out"
    eval_every: int = 10
    boundary_fraction: float = 0.25
    weight_noise: float = 0.1
    degree_tol: float = 0.25
    alpha: float | None = None
    alpha_factor: float = 1.5
    sequential: bool = True
    layout: dict = field(default_factory=dict)
    whispers: dict = field(default_factory=dict)

    def __post_init__(self):
        self.shapes = [_as_shape(s) for s in self.shapes]
        for name in ("shapes", "node_counts", "target_avg_degrees", "algorithms", "seeds"):
            if not getattr(self, name):
                raise ConfigError(f"{name} must be a nonempty list")
        for alg in self.algorithms:
            if alg not in ALGORITHMS:
                raise ConfigError(f"unknown algorithm {alg!r}, expected subset of {ALGORITHMS}")
        if not 0.0 < self.sensitivity_target <= 1.0:
            raise ConfigError(f"sensitivity_target must be in (0, 1], got {self.sensitivity_target}")
        if self.plateau_iters < 1:
            raise ConfigError(f"plateau_iters must be >= 1, got {self.plateau_iters}")
        if self.eval_every < 1:
            raise ConfigError(f"eval_every must be >= 1, got {self.eval_every}")
        if self.time_budget <= 0:
            raise ConfigError(f"time_budget must be > 0, got {self.time_budget}")

    @classmethod
    def from_dict(cls, doc: dict) -> "ExperimentConfig":
        known = set(cls.__dataclass_fields__)
        unknown = set(doc) - known
        if unknown:
            raise ConfigError(f"unknown config fields: {sorted(unknown)}")
        try:
            return cls(**doc)
        except (TypeError, ValueError) as exc:
            raise ConfigError(str(exc)) from exc

    @classmethod
    def from_json_file(cls, path) -> "ExperimentConfig":
        try:
            with open(path, "r", encoding="utf-8") as fh:
                doc = json.load(fh)
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigError(f"cannot read config {path}: {exc}") from exc
        return cls.from_dict(doc)


def _as_shape(s):
    if isinstance(s, ShapeSpec):
        return s
    if isinstance(s, str):
        return ShapeSpec(kind=s)
    if isinstance(s, dict):
        return ShapeSpec(**s)
    raise ConfigError(f"cannot interpret shape spec {s!r}")


@dataclass
class ExperimentResult:
    rows: list
    failures: list
    out_dir: Path

    @property
    def ok(self) -> bool:
        return not self.failures


def run_experiment(config: ExperimentConfig) -> ExperimentResult:
    """Run every experiment cell sequentially and write all report files.

    Failing cells are reported and skipped; completed artifacts stay on disk.
    """
    out_dir = Path(config.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)

    rows, failures = [], []
    for shape in config.shapes:
        for n in config.node_counts:
            for degree in config.target_avg_degrees:
                for alg in config.algorithms:
                    for seed in config.seeds:
                        name = f"{shape.kind}_n{n}_d{degree:g}_{alg}_s{seed}"
                        cell_dir = out_dir / name
                        try:
                            row = _run_cell(config, shape, int(n), float(degree), alg, int(seed), cell_dir)
                            rows.append(row)
                        except Exception as exc:
                            failures.append((name, exc))
                            print(f"cell {name} failed: {exc}", file=sys.stderr)
                            traceback.print_exc()
        # write after each shape so partial results survive an abort
        _write_summary(rows, out_dir / "summary.csv")

    _write_summary(rows, out_dir / "summary.csv")
    return ExperimentResult(rows=rows, failures=failures, out_dir=out_dir)


def _run_cell(config, shape, n, degree, alg, seed, cell_dir):
    cell_dir.mkdir(parents=True, exist_ok=True)

    points = generate_points(shape, n, config.boundary_fraction, seed)
    exact, radius = connect_by_radius(points, degree, config.degree_tol)
    topology = perturb_weights(exact, points, config.weight_noise, seed)
    truth = set(points.mandatory_boundary_ids.tolist())

    save_points_csv(points, cell_dir / "points.csv")
    save_topology(topology, cell_dir / "topology.json", ground_truth_boundary=truth)

    lcfg = LayoutConfig(time_budget=config.time_budget, seed=seed, **config.layout)
    wcfg = WhispersConfig(seed=seed, **config.whispers)

    evals = []

    def _evaluate_positions(positions, elapsed):
        alpha = config.alpha if config.alpha is not None else default_alpha(
            positions, topology, config.alpha_factor
        )
        prediction = extract_boundary(positions, alpha)
        report = evaluate(prediction, truth, n)
        report.elapsed = elapsed
        return alpha, prediction, report

    def callback(state):
        if state.iteration % config.eval_every:
            return None
        _, _, report = _evaluate_positions(state.positions, state.elapsed)
        evals.append((state.iteration, state.elapsed, report))
        if report.sensitivity is not None and report.sensitivity >= config.sensitivity_target:
            return "sensitivity_target"
        if len(evals) >= config.plateau_iters:
            window = [r.sensitivity for _, _, r in evals[-config.plateau_iters:]]
            if None not in window and max(window) - min(window) <= 0.001:
                return "plateau"
        return None

    if alg == "cwbound":
        result = run_cwbound(topology, lcfg, wcfg, callback=callback)
    else:
        result = run_fr_baseline(topology, lcfg, callback=callback)

    alpha, prediction, final_report = _evaluate_positions(result.positions, result.elapsed)
    if not evals or evals[-1][0] != result.iterations:
        evals.append((result.iterations, result.elapsed, final_report))

    time_to_target = None
    for _, elapsed, report in evals:
        if report.sensitivity is not None and report.sensitivity >= config.sensitivity_target:
            time_to_target = elapsed
            break

    save_layout_csv(result.positions, cell_dir / "layout.csv")
    _write_cell_trace(result.trace, evals, cell_dir / "trace.csv")
    save_prediction_csv(prediction, truth, n, cell_dir / "prediction.csv")
    if result.state.assignment is not None:
        save_clusters_csv(result.state.assignment, cell_dir / "clusters.csv")
    emit_svg(
        result.positions, topology.edges,
        prediction.boundary_ids, truth,
        lcfg.canvas_size, cell_dir / "layout.svg",
    )

    meta = {
        "cell": cell_dir.name,
        "shape": shape.kind,
        "n": n,
        "degree": degree,
        "algorithm": alg,
        "seed": seed,
        "radius": radius,
        "alpha": alpha,
        "iterations": result.iterations,
        "elapsed_s": result.elapsed,
        "converged": result.converged,
        "stop_reason": result.stop_reason,
        "time_to_target_s": time_to_target,
        "phase_history": result.phase_history,
        "metrics": final_report.to_dict(),
    }
    with open(cell_dir / "metrics.json", "w", encoding="utf-8") as fh:
        json.dump(meta, fh, indent=2)
        fh.write("\n")

    return {
        "shape": shape.kind,
        "n": n,
        "degree": degree,
        "algorithm": alg,
        "seed": seed,
        "sensitivity": final_report.sensitivity,
        "specificity": final_report.specificity,
        "accuracy": final_report.accuracy,
        "time_to_target_s": time_to_target,
        "iterations": result.iterations,
    }


def _fmt(value):
    if value is None:
        return ""
    if isinstance(value, float):
        return repr(value)
    return str(value)


def _write_cell_trace(trace, evals, path):
    by_iter = {it: rep for it, _, rep in evals}
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("iteration,elapsed_s,proportionality,phase,total_displacement,"
                 "sensitivity,specificity,accuracy\n")
        for row in trace:
            rep = by_iter.get(row.iteration)
            cells = [
                str(row.iteration),
                repr(row.elapsed_s),
                "" if row.proportionality is None else repr(row.proportionality),
                row.phase,
                repr(row.total_displacement),
                _fmt(rep.sensitivity) if rep else "",
                _fmt(rep.specificity) if rep else "",
                _fmt(rep.accuracy) if rep else "",
            ]
            fh.write(",".join(cells) + "\n")


def _write_summary(rows, path):
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(",".join(SUMMARY_COLUMNS) + "\n")
        for row in rows:
            fh.write(",".join(_fmt(row[c]) for c in SUMMARY_COLUMNS) + "\n")


def emit_svg(positions, edges, predicted_ids, truth_ids, canvas_size, path):
    """Deterministic SVG snapshot of a layout with its detection outcome.

    Node colors distinguish true positives (green), false positives (orange),
    false negatives (red) and true negatives (slate); edges are light gray.
    """
    positions = np.asarray(positions, dtype=float)
    predicted_ids = set(predicted_ids)
    truth_ids = set(truth_ids)
    a = float(canvas_size)
    r = max(2.0, a / 250.0)

    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" viewBox="0 0 {a:.2f} {a:.2f}">',
        f'<rect width="{a:.2f}" height="{a:.2f}" fill="white"/>',
    ]
    for u, v, _ in edges:
        x1, y1 = positions[u]
        x2, y2 = positions[v]
        parts.append(
            f'<line x1="{x1:.2f}" y1="{y1:.2f}" x2="{x2:.2f}" y2="{y2:.2f}" '
            f'stroke="#cccccc" stroke-width="{a / 2000.0:.2f}"/>'
        )
    for i, (x, y) in enumerate(positions):
        pred = i in predicted_ids
        true = i in truth_ids
        if pred and true:
            color = "#2a9d2a"
        elif pred:
            color = "#e07b20"
        elif true:
            color = "#d62728"
        else:
            color = "#5b7fa6"
        parts.append(f'<circle cx="{x:.2f}" cy="{y:.2f}" r="{r:.2f}" fill="{color}"/>')
    parts.append("</svg>")
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("\n".join(parts) + "\n")
