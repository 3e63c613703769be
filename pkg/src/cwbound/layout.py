"""Cluster-aware two-phase force-directed layout and a classical baseline.

The CWBound layout drives node positions with three displacement families per
iteration, each computed from the iteration's starting positions and then
combined into one net per-node displacement:

- repulsion between every node pair, scaled by the product of their cluster
  cardinalities and inversely by distance,
- logarithmic (LinLog-style) attraction along edges, boosted by the edge
  weight when both endpoints share a cluster,
- linear gravity pulling each node toward an attractor: the canvas center in
  the first phase, the node's own cluster centroid in the second.

The net displacement is capped at the current temperature, positions are
clamped to the canvas, and the temperature cools geometrically.  The run
switches phase once the canvas distances between cluster medoids correlate
with their graph (estimated) distances beyond a threshold; from then on it
re-clusters on current canvas edge lengths every ``recluster_period``
iterations.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, field
from enum import Enum

import numpy as np
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import dijkstra
from scipy.spatial.distance import cdist, pdist

from .errors import DegenerateInput
from .graph import NetworkTopology
from .whispers import ClusterAssignment, WhispersConfig, centroid, chinese_whispers, medoid

__all__ = [
    "Phase",
    "LayoutConfig",
    "LayoutState",
    "LayoutResult",
    "TraceRow",
    "ideal_k",
    "attraction_mag",
    "repulsion_mag",
    "gravity_mag",
    "proportionality",
    "step",
    "run_cwbound",
    "run_fr_baseline",
    "save_layout_csv",
    "save_trace_csv",
]

# A sweep whose total node displacement falls below this fraction of the
# ideal pairwise distance k counts as converged.
CONVERGENCE_K_FRACTION = 1e-3


class Phase(str, Enum):
    CENTER_GRAVITY = "center-gravity"
    CENTROID_GRAVITY = "centroid-gravity"
    FR = "fr"


@dataclass(frozen=True)
class LayoutConfig:
    """Tunables for both layout algorithms.

    ``displacement_cap`` defaults to a tenth of the canvas side and is also
    the starting temperature.  ``init_estdist`` seeds initial positions by
    walking the graph and offsetting each node from an already-placed
    neighbor by the edge's estimated distance, instead of uniform random
    placement.
    """

    canvas_size: float = 1000.0
    expansion_multiplier: float = 1.5
    gravity_coefficient: float = 0.05
    time_budget: float = 60.0
    proportionality_threshold: float = 0.9
    recluster_period: int = 10
    displacement_cap: float | None = None
    cooling_factor: float = 0.97
    min_distance: float = 1e-6
    seed: int = 0
    init_estdist: bool = False
    fr_cooling_iters: int = 500

    def __post_init__(self):
        if self.displacement_cap is None:
            object.__setattr__(self, "displacement_cap", self.canvas_size / 10.0)
        checks = [
            ("canvas_size", self.canvas_size > 0),
            ("expansion_multiplier", self.expansion_multiplier > 0),
            ("gravity_coefficient", self.gravity_coefficient >= 0),
            ("time_budget", self.time_budget > 0),
            ("proportionality_threshold", 0 < self.proportionality_threshold <= 1),
            ("recluster_period", self.recluster_period >= 1),
            ("displacement_cap", self.displacement_cap > 0),
            ("cooling_factor", 0 < self.cooling_factor <= 1),
            ("min_distance", self.min_distance > 0),
            ("fr_cooling_iters", self.fr_cooling_iters >= 1),
        ]
        for name, ok in checks:
            if not ok:
                raise ValueError(f"invalid LayoutConfig.{name}: {getattr(self, name)}")


@dataclass
class LayoutState:
    """Mutable per-run layout state advanced by :func:`step`."""

    positions: np.ndarray
    phase: Phase
    assignment: ClusterAssignment | None
    medoids: dict
    centroids: dict
    temperature: float
    iteration: int = 0
    elapsed: float = 0.0
    rng: np.random.Generator = field(default_factory=np.random.default_rng, repr=False)


@dataclass
class TraceRow:
    iteration: int
    elapsed_s: float
    proportionality: float | None
    phase: str
    total_displacement: float


@dataclass
class LayoutResult:
    positions: np.ndarray
    iterations: int
    elapsed: float
    final_proportionality: float | None
    phase_history: list
    converged: bool
    stop_reason: str
    trace: list
    state: LayoutState


def ideal_k(m: float, a: float, n: int) -> float:
    """Ideal pairwise distance k = m*a/(n+1) for an n-node layout on side a."""
    return m * a / (n + 1)


def attraction_mag(d: float, w: float) -> float:
    """Logarithmic attraction log(1 + d*w); zero iff d*w = 0."""
    return math.log1p(d * w)


def repulsion_mag(size1: int, size2: int, d: float, d_min: float = 1e-6) -> float:
    """Cluster-size-scaled repulsion size1*size2 / max(d, d_min)."""
    return size1 * size2 / max(d, d_min)


def gravity_mag(k: float, g: float, dist: float) -> float:
    """Linear gravity k*G*dist toward the active attractor."""
    return k * g * dist


def proportionality(canvas_dists, est_dists) -> float:
    """Pearson correlation between canvas and estimated distance lists.

    Raises DegenerateInput when either list has fewer than two entries or
    zero variance.
    """
    x = np.asarray(canvas_dists, dtype=float)
    y = np.asarray(est_dists, dtype=float)
    if x.shape != y.shape:
        raise ValueError(f"length mismatch: {x.shape} vs {y.shape}")
    if x.size < 2:
        raise DegenerateInput("need at least 2 distance pairs")
    sx, sy = x.std(), y.std()
    if sx == 0.0 or sy == 0.0:
        raise DegenerateInput("zero variance in distance list")
    r = float(((x - x.mean()) * (y - y.mean())).mean() / (sx * sy))
    return max(-1.0, min(1.0, r))


# ---------------------------------------------------------------------------
# One iteration
# ---------------------------------------------------------------------------

def _pairwise_distances(pos):
    return cdist(pos, pos)


def _jitter_coincident(pos, d, rng, d_min):
    """Break exact node overlaps with a seeded infinitesimal offset."""
    for _ in range(4):
        coincident = (d == 0.0) & ~np.eye(len(pos), dtype=bool)
        if not coincident.any():
            return pos, d
        stuck = np.unique(np.nonzero(coincident)[0])
        pos = pos.copy()
        pos[stuck] += rng.uniform(-d_min, d_min, size=(len(stuck), 2))
        d = _pairwise_distances(pos)
    return pos, d


def _pair_repulsion(pos, coeff_matrix):
    """Sum over j of coeff[i, j] * (pos_i - pos_j) via matrix products.

    coeff must be symmetric with a zero diagonal; equal and opposite pair
    contributions hold exactly.
    """
    return coeff_matrix.sum(axis=1)[:, None] * pos - coeff_matrix @ pos


def _cap_and_clamp(pos, disp, temperature, canvas_size):
    norms = np.linalg.norm(disp, axis=1)
    factor = np.where(norms > temperature, np.divide(temperature, norms, where=norms > 0), 1.0)
    return np.clip(pos + disp * factor[:, None], 0.0, canvas_size)


def step(state: LayoutState, topology: NetworkTopology, config: LayoutConfig, *,
         enable_repulsion=True, enable_attraction=True, enable_gravity=True) -> LayoutState:
    """Advance the cluster-aware layout by one full force sweep.

    All three displacement families are computed from the iteration's starting
    positions, summed per node, capped at the current temperature, and applied
    once; positions are then clamped to the canvas and the temperature cools.
    The enable flags exist for tests that isolate one force family.
    """
    n = topology.node_count
    k = ideal_k(config.expansion_multiplier, config.canvas_size, n)
    pos = state.positions

    d = _pairwise_distances(pos)
    pos, d = _jitter_coincident(pos, d, state.rng, config.min_distance)

    disp = np.zeros((n, 2))

    if enable_repulsion:
        sizes = state.assignment.node_sizes().astype(float)
        dc = np.maximum(d, config.min_distance)
        coeff = np.outer(sizes, sizes) / (dc * dc)
        np.fill_diagonal(coeff, 0.0)
        disp += _pair_repulsion(pos, coeff)

    if enable_attraction and topology.edge_count:
        eu, ev = topology.edge_u, topology.edge_v
        labels = state.assignment.labels
        w_e = np.where(labels[eu] == labels[ev], topology.edge_weight, 1.0)
        delta = pos[eu] - pos[ev]
        de = np.linalg.norm(delta, axis=1)
        ok = de > 0.0
        mag_e = np.where(ok, np.log1p(de * w_e), 0.0)
        unit = np.divide(delta, de[:, None], where=ok[:, None], out=np.zeros_like(delta))
        contrib = unit * mag_e[:, None]
        np.subtract.at(disp, eu, contrib)
        np.add.at(disp, ev, contrib)

    if enable_gravity:
        attractor = _attractors(state, config, n)
        disp += k * config.gravity_coefficient * (attractor - pos)

    new_pos = _cap_and_clamp(pos, disp, state.temperature, config.canvas_size)
    return LayoutState(
        positions=new_pos,
        phase=state.phase,
        assignment=state.assignment,
        medoids=state.medoids,
        centroids=state.centroids,
        temperature=state.temperature * config.cooling_factor,
        iteration=state.iteration + 1,
        elapsed=state.elapsed,
        rng=state.rng,
    )


def _attractors(state, config, n):
    if state.phase is Phase.CENTER_GRAVITY or not state.centroids:
        return np.full((n, 2), config.canvas_size / 2.0)
    labels = state.assignment.labels
    out = np.empty((n, 2))
    for lab, cen in state.centroids.items():
        out[labels == lab] = cen
    return out


def _fr_displacement(pos, d, topology, config, k):
    """Classical spring-embedder forces: k^2/d repulsion, d^2/k attraction,
    plus the same linear center gravity."""
    n = len(pos)
    dc = np.maximum(d, config.min_distance)
    coeff = (k * k) / (dc * dc)
    np.fill_diagonal(coeff, 0.0)
    disp = _pair_repulsion(pos, coeff)

    if topology.edge_count:
        eu, ev = topology.edge_u, topology.edge_v
        delta = pos[eu] - pos[ev]
        de = np.linalg.norm(delta, axis=1)
        ok = de > 0.0
        mag_e = np.where(ok, de * de / k, 0.0)
        unit = np.divide(delta, de[:, None], where=ok[:, None], out=np.zeros_like(delta))
        contrib = unit * mag_e[:, None]
        np.subtract.at(disp, eu, contrib)
        np.add.at(disp, ev, contrib)

    disp += k * config.gravity_coefficient * (np.full((n, 2), config.canvas_size / 2.0) - pos)
    return disp


# ---------------------------------------------------------------------------
# Full runs
# ---------------------------------------------------------------------------

def _graph_distance_matrix(topology):
    n = topology.node_count
    m = csr_matrix(
        (topology.edge_weight, (topology.edge_u, topology.edge_v)), shape=(n, n)
    )
    return dijkstra(m, directed=False)


def _initial_positions(topology, config, rng):
    n = topology.node_count
    a = config.canvas_size
    if not config.init_estdist:
        return rng.uniform(0.0, a, size=(n, 2))
    # Greedy BFS placement: offset each node from an already-placed neighbor
    # by the edge's estimated distance, in a random direction.
    pos = np.zeros((n, 2))
    placed = np.zeros(n, dtype=bool)
    for root in range(n):
        if placed[root]:
            continue
        pos[root] = rng.uniform(0.25 * a, 0.75 * a, size=2)
        placed[root] = True
        queue = [root]
        while queue:
            u = queue.pop(0)
            idx, wgt = topology.neighbor_arrays(u)
            for v, w in zip(idx.tolist(), wgt.tolist()):
                if placed[v]:
                    continue
                theta = rng.uniform(0.0, 2.0 * np.pi)
                pos[v] = np.clip(pos[u] + w * np.array([np.cos(theta), np.sin(theta)]), 0.0, a)
                placed[v] = True
                queue.append(v)
    return pos


def _cluster_geometry(assignment, positions):
    """Medoids (canvas metric) and centroids for every cluster."""
    meds, cents = {}, {}
    for lab, members in assignment.members.items():
        sub = cdist(positions[members], positions[members])
        meds[lab] = int(members[int(np.argmin(sub.sum(axis=1)))])
        cents[lab] = positions[members].mean(axis=0)
    return meds, cents


def _medoid_proportionality(state, graph_d):
    """Correlation of medoid canvas distances vs graph distances, or None."""
    ids = [state.medoids[lab] for lab in sorted(state.medoids)]
    if len(ids) < 2:
        return None
    canvas = pdist(state.positions[ids])
    est = graph_d[np.ix_(ids, ids)][np.triu_indices(len(ids), k=1)]
    finite = np.isfinite(est)
    if finite.sum() < 2:
        return None
    try:
        return proportionality(canvas[finite], est[finite])
    except DegenerateInput:
        return None


def _recluster_on_canvas(state, topology, wconfig, config):
    """Re-run clustering with current canvas edge lengths as the weights."""
    if topology.edge_count:
        lengths = np.linalg.norm(
            state.positions[topology.edge_u] - state.positions[topology.edge_v], axis=1
        )
        weights = np.maximum(lengths, config.min_distance)
    else:
        weights = None
    assignment, _ = chinese_whispers(topology, wconfig, weights=weights)
    state.assignment = assignment
    state.medoids, state.centroids = _cluster_geometry(assignment, state.positions)


def run_cwbound(topology: NetworkTopology, config: LayoutConfig, wconfig: WhispersConfig,
                callback=None) -> LayoutResult:
    """Full cluster-aware layout run.

    Pipeline: cluster on estimated-distance weights, pick medoids by graph
    shortest-path distance, place nodes, iterate force sweeps under canvas-
    center gravity until medoid canvas distances correlate with their graph
    distances beyond the threshold, then switch to cluster-centroid gravity
    and re-cluster on canvas edge lengths every ``recluster_period``
    iterations.  Stops when the time budget is exhausted or a sweep's total
    displacement drops below 1e-3 * k.

    ``callback(state)`` runs after every iteration; a truthy return value
    stops the run and is recorded as the stop reason.  A topology with fewer
    than 2 clusters skips the proportionality gate and starts directly in the
    centroid-gravity phase.
    """
    t0 = time.perf_counter()
    n = topology.node_count
    k = ideal_k(config.expansion_multiplier, config.canvas_size, n)

    assignment, _ = chinese_whispers(topology, wconfig)
    graph_d = _graph_distance_matrix(topology)
    medoids = {lab: medoid(members, graph_d) for lab, members in assignment.members.items()}

    rng = np.random.default_rng(config.seed)
    positions = _initial_positions(topology, config, rng)

    state = LayoutState(
        positions=positions,
        phase=Phase.CENTER_GRAVITY,
        assignment=assignment,
        medoids=medoids,
        centroids={},
        temperature=config.displacement_cap,
        rng=rng,
    )
    phase_history = [(0, state.phase.value)]
    if assignment.cluster_count < 2:
        state.phase = Phase.CENTROID_GRAVITY
        state.medoids, state.centroids = _cluster_geometry(assignment, positions)
        phase_history = [(0, state.phase.value)]

    trace = []
    final_prop = None
    last_recluster = 0
    converged = False
    stop_reason = "time_budget"

    while True:
        state.elapsed = time.perf_counter() - t0
        if state.elapsed >= config.time_budget:
            stop_reason = "time_budget"
            break

        prop = _medoid_proportionality(state, graph_d)
        if prop is not None:
            final_prop = prop

        if state.phase is Phase.CENTER_GRAVITY:
            if prop is not None and prop >= config.proportionality_threshold:
                state.phase = Phase.CENTROID_GRAVITY
                _recluster_on_canvas(state, topology, wconfig, config)
                phase_history.append((state.iteration, state.phase.value))
                last_recluster = state.iteration
        elif state.iteration - last_recluster >= config.recluster_period:
            _recluster_on_canvas(state, topology, wconfig, config)
            last_recluster = state.iteration

        old_pos = state.positions
        state = step(state, topology, config)
        total_disp = float(np.linalg.norm(state.positions - old_pos, axis=1).sum())
        state.elapsed = time.perf_counter() - t0
        trace.append(TraceRow(state.iteration, state.elapsed, prop, state.phase.value, total_disp))

        if callback is not None:
            reason = callback(state)
            if reason:
                stop_reason = str(reason)
                break

        if total_disp < CONVERGENCE_K_FRACTION * k:
            converged = True
            stop_reason = "converged"
            break

    return LayoutResult(
        positions=state.positions,
        iterations=state.iteration,
        elapsed=time.perf_counter() - t0,
        final_proportionality=final_prop,
        phase_history=phase_history,
        converged=converged,
        stop_reason=stop_reason,
        trace=trace,
        state=state,
    )


def run_fr_baseline(topology: NetworkTopology, config: LayoutConfig, callback=None) -> LayoutResult:
    """Classical force-directed baseline: no clustering, no phases, linear
    cooling from the displacement cap to zero over ``fr_cooling_iters``."""
    t0 = time.perf_counter()
    n = topology.node_count
    k = ideal_k(config.expansion_multiplier, config.canvas_size, n)

    rng = np.random.default_rng(config.seed)
    state = LayoutState(
        positions=rng.uniform(0.0, config.canvas_size, size=(n, 2)),
        phase=Phase.FR,
        assignment=None,
        medoids={},
        centroids={},
        temperature=config.displacement_cap,
        rng=rng,
    )

    trace = []
    converged = False
    stop_reason = "time_budget"

    while True:
        state.elapsed = time.perf_counter() - t0
        if state.elapsed >= config.time_budget:
            break

        pos = state.positions
        d = _pairwise_distances(pos)
        pos, d = _jitter_coincident(pos, d, state.rng, config.min_distance)
        disp = _fr_displacement(pos, d, topology, config, k)
        new_pos = _cap_and_clamp(pos, disp, state.temperature, config.canvas_size)

        total_disp = float(np.linalg.norm(new_pos - state.positions, axis=1).sum())
        cooled = config.displacement_cap * max(0.0, 1.0 - (state.iteration + 1) / config.fr_cooling_iters)
        state = LayoutState(
            positions=new_pos,
            phase=Phase.FR,
            assignment=None,
            medoids={},
            centroids={},
            temperature=cooled,
            iteration=state.iteration + 1,
            elapsed=time.perf_counter() - t0,
            rng=state.rng,
        )
        trace.append(TraceRow(state.iteration, state.elapsed, None, Phase.FR.value, total_disp))

        if callback is not None:
            reason = callback(state)
            if reason:
                stop_reason = str(reason)
                break

        if total_disp < CONVERGENCE_K_FRACTION * k:
            converged = True
            stop_reason = "converged"
            break

    return LayoutResult(
        positions=state.positions,
        iterations=state.iteration,
        elapsed=time.perf_counter() - t0,
        final_proportionality=None,
        phase_history=[(0, Phase.FR.value)],
        converged=converged,
        stop_reason=stop_reason,
        trace=trace,
        state=state,
    )


def save_layout_csv(positions, path):
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("node_id,x,y\n")
        for i, (x, y) in enumerate(np.asarray(positions)):
            fh.write(f"{i},{float(x)!r},{float(y)!r}\n")


def save_trace_csv(trace, path):
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("iteration,elapsed_s,proportionality,phase,total_displacement\n")
        for row in trace:
            prop = "" if row.proportionality is None else repr(row.proportionality)
            fh.write(f"{row.iteration},{row.elapsed_s!r},{prop},{row.phase},{row.total_displacement!r}\n")
