"""Boundary extraction from a finished layout, and detection scoring.

The detector computes the alpha shape of the laid-out points: the Delaunay
triangulation keeps only triangles whose circumradius is at most alpha, and
the prediction is every point on the *outer* rim of that complex.  Hole rims
(e.g. a doughnut's inner ring) are reported separately and never count as
positives.  Outer/hole classification uses a flood fill from the infinite
face through the removed triangles, which is robust to pinch points and
multiple components.  Points covered by no kept triangle float in the outer
void (or sit inside a hole) and are classified by the triangles around them.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.spatial import Delaunay, QhullError, cKDTree

__all__ = [
    "BoundaryPrediction",
    "MetricsReport",
    "extract_boundary",
    "evaluate",
    "default_alpha",
    "save_prediction_csv",
]


@dataclass
class BoundaryPrediction:
    """Detected boundary node ids plus the outer hull polygon walked in order."""

    boundary_ids: set
    alpha: float
    hull: list
    inner_boundary_ids: set = field(default_factory=set)
    degenerate: bool = False


@dataclass
class MetricsReport:
    """Confusion counts and the derived ratios.

    A ratio whose denominator is zero is None and listed in ``undefined``
    instead of being reported as a number.
    """

    tp: int
    fp: int
    tn: int
    fn: int
    sensitivity: float | None
    specificity: float | None
    accuracy: float | None
    undefined: list
    elapsed: float = 0.0

    def to_dict(self):
        return {
            "tp": self.tp,
            "fp": self.fp,
            "tn": self.tn,
            "fn": self.fn,
            "sensitivity": self.sensitivity,
            "specificity": self.specificity,
            "accuracy": self.accuracy,
            "undefined": list(self.undefined),
            "elapsed": self.elapsed,
        }


def _circumradii(points, simplices):
    """Circumradius of each triangle; degenerate (zero-area) ones get inf."""
    pa = points[simplices[:, 0]]
    pb = points[simplices[:, 1]]
    pc = points[simplices[:, 2]]
    a = np.linalg.norm(pb - pc, axis=1)
    b = np.linalg.norm(pa - pc, axis=1)
    c = np.linalg.norm(pa - pb, axis=1)
    cross = (pb[:, 0] - pa[:, 0]) * (pc[:, 1] - pa[:, 1]) - (pb[:, 1] - pa[:, 1]) * (pc[:, 0] - pa[:, 0])
    area2 = np.abs(cross)  # twice the triangle area
    with np.errstate(divide="ignore", invalid="ignore"):
        r = a * b * c / (2.0 * area2)
    r[area2 == 0.0] = np.inf
    return r


def _degenerate_prediction(n, alpha):
    return BoundaryPrediction(
        boundary_ids=set(range(n)), alpha=alpha, hull=list(range(n)), degenerate=True
    )


def extract_boundary(positions, alpha: float) -> BoundaryPrediction:
    """Alpha-shape boundary of a 2-D point set, outer rim only.

    Fewer than 3 points (or a fully collinear set) yields a degenerate
    prediction containing every point.
    """
    points = np.asarray(positions, dtype=float)
    n = len(points)
    if alpha <= 0:
        raise ValueError(f"alpha must be > 0, got {alpha}")
    if n < 3:
        return _degenerate_prediction(n, alpha)
    try:
        tri = Delaunay(points)
    except QhullError:
        return _degenerate_prediction(n, alpha)
    if len(tri.simplices) == 0:
        return _degenerate_prediction(n, alpha)

    kept = _circumradii(points, tri.simplices) <= alpha

    # Flood fill from the infinite face through removed triangles: triangles
    # reached this way bound the outer void; unreached removed ones are holes.
    outside = np.zeros(len(tri.simplices), dtype=bool)
    stack = [
        t for t in np.flatnonzero(~kept)
        if -1 in tri.neighbors[t]
    ]
    outside[stack] = True
    while stack:
        t = stack.pop()
        for nb in tri.neighbors[t]:
            if nb != -1 and not kept[nb] and not outside[nb]:
                outside[nb] = True
                stack.append(nb)

    outer_edges = []
    hole_edges = []
    for t in np.flatnonzero(kept):
        simplex = tri.simplices[t]
        for i in range(3):
            nb = tri.neighbors[t][i]
            # edge opposite vertex i
            edge = (int(simplex[(i + 1) % 3]), int(simplex[(i + 2) % 3]))
            if nb == -1 or (not kept[nb] and outside[nb]):
                outer_edges.append(edge)
            elif not kept[nb]:
                hole_edges.append(edge)

    covered = np.zeros(n, dtype=bool)
    if kept.any():
        covered[np.unique(tri.simplices[kept])] = True

    boundary = set()
    for u, v in outer_edges:
        boundary.add(u)
        boundary.add(v)
    inner = set()
    for u, v in hole_edges:
        inner.add(u)
        inner.add(v)
    inner -= boundary

    # Points in no kept triangle: outer if any incident triangle touches the
    # outer void (or they are missing from the triangulation entirely).
    incident = [[] for _ in range(n)]
    for t, simplex in enumerate(tri.simplices):
        for vtx in simplex:
            incident[vtx].append(t)
    for p in np.flatnonzero(~covered):
        tris = incident[p]
        if not tris or any(outside[t] for t in tris):
            boundary.add(int(p))
            inner.discard(int(p))
        else:
            inner.add(int(p))

    hull = _walk_largest_cycle(outer_edges, points)
    return BoundaryPrediction(
        boundary_ids=boundary, alpha=alpha, hull=hull, inner_boundary_ids=inner
    )


def _walk_largest_cycle(edges, points):
    """Order boundary edges into cycles and return the largest-area one."""
    if not edges:
        return []
    adj = {}
    for u, v in edges:
        adj.setdefault(u, []).append(v)
        adj.setdefault(v, []).append(u)
    for lst in adj.values():
        lst.sort()
    unused = set(tuple(sorted(e)) for e in edges)

    best_cycle, best_area = [], -1.0
    while unused:
        start_edge = min(unused)
        unused.discard(start_edge)
        start, cur = start_edge
        cycle = [start, cur]
        while True:
            nxt = next((v for v in adj[cur] if tuple(sorted((cur, v))) in unused), None)
            if nxt is None:
                break
            unused.discard(tuple(sorted((cur, nxt))))
            cur = nxt
            if cur == start:
                break
            cycle.append(cur)
        area = _shoelace(points[cycle])
        if area > best_area:
            best_area, best_cycle = area, cycle
    return best_cycle


def _shoelace(poly):
    x, y = poly[:, 0], poly[:, 1]
    return 0.5 * abs(np.dot(x, np.roll(y, -1)) - np.dot(y, np.roll(x, -1)))


def default_alpha(positions, topology=None, factor: float = 1.5) -> float:
    """1.5x the mean canvas edge length; falls back to mean nearest-neighbor
    distance when there are no edges."""
    positions = np.asarray(positions, dtype=float)
    if topology is not None and topology.edge_count:
        lengths = np.linalg.norm(positions[topology.edge_u] - positions[topology.edge_v], axis=1)
        mean = float(lengths.mean())
        if mean > 0:
            return factor * mean
    if len(positions) < 2:
        return 1.0
    tree = cKDTree(positions)
    nn, _ = tree.query(positions, k=2)
    mean = float(nn[:, 1].mean())
    return factor * mean if mean > 0 else 1.0


def evaluate(predicted, truth, total: int) -> MetricsReport:
    """Score a prediction against the ground-truth boundary set.

    ``predicted`` is a BoundaryPrediction or a bare id set.  Counts satisfy
    tp+fp+tn+fn == total; sensitivity = tp/(tp+fn), specificity = tn/(tn+fp),
    accuracy = (tp+tn)/total.
    """
    if total < 1:
        raise ValueError(f"total must be >= 1, got {total}")
    pred_ids = predicted.boundary_ids if isinstance(predicted, BoundaryPrediction) else set(predicted)
    pred_ids = {int(i) for i in pred_ids}
    truth = {int(i) for i in truth}
    for name, ids in (("predicted", pred_ids), ("truth", truth)):
        bad = [i for i in ids if not 0 <= i < total]
        if bad:
            raise ValueError(f"{name} ids outside 0..{total - 1}: {bad[:5]}")

    tp = len(pred_ids & truth)
    fp = len(pred_ids - truth)
    fn = len(truth - pred_ids)
    tn = total - tp - fp - fn

    undefined = []

    def ratio(num, den, name):
        if den == 0:
            undefined.append(name)
            return None
        return num / den

    return MetricsReport(
        tp=tp, fp=fp, tn=tn, fn=fn,
        sensitivity=ratio(tp, tp + fn, "sensitivity"),
        specificity=ratio(tn, tn + fp, "specificity"),
        accuracy=ratio(tp + tn, total, "accuracy"),
        undefined=undefined,
    )


def save_prediction_csv(prediction: BoundaryPrediction, truth, total, path):
    truth = set(int(i) for i in truth)
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("node_id,predicted_boundary,truth_boundary\n")
        for i in range(total):
            fh.write(f"{i},{int(i in prediction.boundary_ids)},{int(i in truth)}\n")
