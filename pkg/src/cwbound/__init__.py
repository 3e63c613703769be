"""Boundary node detection for complex non-convex ad hoc networks.

Pipeline: generate a labeled topology (netgen), cluster it (whispers), lay it
out with the cluster-aware two-phase force model (layout), extract boundary
nodes from the drawing (boundary), and score against ground truth (bench).
"""

from .bench import ExperimentConfig, emit_svg, run_experiment
from .boundary import BoundaryPrediction, MetricsReport, default_alpha, evaluate, extract_boundary
from .graph import (
    NetworkTopology,
    RadioParams,
    build_topology,
    estdist_fspl,
    load_topology,
    neighbors,
    save_topology,
)
from .layout import (
    LayoutConfig,
    LayoutResult,
    LayoutState,
    Phase,
    attraction_mag,
    gravity_mag,
    ideal_k,
    proportionality,
    repulsion_mag,
    run_cwbound,
    run_fr_baseline,
    step,
)
from .netgen import LabeledPointSet, ShapeSpec, connect_by_radius, generate_points, perturb_weights
from .whispers import ClusterAssignment, WhispersConfig, centroid, chinese_whispers, medoid, vote_update

__version__ = "0.1.0"

__all__ = [
    "BoundaryPrediction",
    "ClusterAssignment",
    "ExperimentConfig",
    "LabeledPointSet",
    "LayoutConfig",
    "LayoutResult",
    "LayoutState",
    "MetricsReport",
    "NetworkTopology",
    "Phase",
    "RadioParams",
    "ShapeSpec",
    "WhispersConfig",
    "attraction_mag",
    "build_topology",
    "centroid",
    "chinese_whispers",
    "connect_by_radius",
    "default_alpha",
    "emit_svg",
    "estdist_fspl",
    "evaluate",
    "extract_boundary",
    "generate_points",
    "gravity_mag",
    "ideal_k",
    "load_topology",
    "medoid",
    "neighbors",
    "perturb_weights",
    "proportionality",
    "repulsion_mag",
    "run_cwbound",
    "run_experiment",
    "run_fr_baseline",
    "save_topology",
    "step",
    "vote_update",
]
