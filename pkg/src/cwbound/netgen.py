"""Synthetic non-convex ad hoc network generator with ground-truth labels.

Produces 2-D point sets shaped like the four benchmark silhouettes (u-shape,
doughnut, smile, star), connects them with a unit-disk rule tuned to a target
average degree, and assigns noisy estimated-distance edge weights.

Each shape is a closed border polyline (plus hole polylines where the shape
has interior holes) at a resolution of 256 segments.  Border points are
sampled exactly on the polylines; interior points are rejected until they lie
strictly inside the region and farther than ``eps_border`` from every border.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field

import numpy as np
from scipy.spatial.distance import pdist

from . import geometry
from .errors import DegenerateShape, EmptyNetwork, UnreachableDegree
from .graph import NetworkTopology, build_topology

__all__ = [
    "ShapeSpec",
    "LabeledPointSet",
    "generate_points",
    "connect_by_radius",
    "perturb_weights",
    "save_points_csv",
]

SHAPE_KINDS = ("u_shape", "doughnut", "smile", "star")
BORDER_RESOLUTION = 256

# Ground-truth tolerance: a point counts as "on the border" within 0.5% of
# the shape scale.
EPS_BORDER_FRACTION = 1.0 / 200.0


@dataclass(frozen=True)
class ShapeSpec:
    """One of the four benchmark silhouettes, scaled to a square canvas.

    ``scale`` is the canvas side length; the silhouette fits inside it with a
    margin.  ``inner_ratio`` is the doughnut hole radius as a fraction of the
    outer ring radius; ``star_points`` the number of star tips.
    """

    kind: str
    scale: float = 1000.0
    inner_ratio: float = 0.5
    star_points: int = 5

    def __post_init__(self):
        if self.kind not in SHAPE_KINDS:
            raise DegenerateShape(f"unknown shape kind {self.kind!r}, expected one of {SHAPE_KINDS}")
        if not self.scale > 0:
            raise DegenerateShape(f"scale must be > 0, got {self.scale}")
        if not 0.0 < self.inner_ratio < 1.0:
            raise DegenerateShape(f"doughnut inner/outer ratio must be in (0, 1), got {self.inner_ratio}")
        if self.star_points < 3:
            raise DegenerateShape(f"star needs at least 3 points, got {self.star_points}")

    def border_polylines(self):
        """(outer_polyline, [hole_polylines]) at 256-segment resolution."""
        return _shape_borders(self)

    @property
    def eps_border(self) -> float:
        return self.scale * EPS_BORDER_FRACTION


def _shape_borders(spec: ShapeSpec):
    s = spec.scale
    c = np.array([0.5 * s, 0.5 * s])
    res = BORDER_RESOLUTION
    if spec.kind == "u_shape":
        outer = np.array(
            [
                [0.10, 0.10], [0.90, 0.10], [0.90, 0.90], [0.65, 0.90],
                [0.65, 0.40], [0.35, 0.40], [0.35, 0.90], [0.10, 0.90],
            ]
        ) * s
        return geometry.resample_closed_polyline(outer, res), []
    if spec.kind == "doughnut":
        outer_r = 0.40 * s
        inner_r = spec.inner_ratio * outer_r
        outer = geometry.circle_polyline(c, outer_r, res)
        hole = geometry.circle_polyline(c, inner_r, res)
        return outer, [hole]
    if spec.kind == "smile":
        face = geometry.circle_polyline(c, 0.40 * s, res)
        eye_r = 0.06 * s
        eyes = [
            geometry.circle_polyline(c + np.array([-0.15 * s, 0.13 * s]), eye_r, res),
            geometry.circle_polyline(c + np.array([0.15 * s, 0.13 * s]), eye_r, res),
        ]
        mouth = _annular_sector(c, 0.20 * s, 0.28 * s, np.deg2rad(200.0), np.deg2rad(340.0))
        return face, eyes + [mouth]
    # star
    k = spec.star_points
    angles = np.pi / 2.0 + np.arange(2 * k) * np.pi / k
    radii = np.where(np.arange(2 * k) % 2 == 0, 0.45 * s, 0.20 * s)
    outer = np.column_stack([c[0] + radii * np.cos(angles), c[1] + radii * np.sin(angles)])
    return geometry.resample_closed_polyline(outer, res), []


def _annular_sector(center, r_in, r_out, theta0, theta1, arc_pts=100):
    """Closed polyline of a thickened arc (the smile's mouth slot)."""
    t_fwd = np.linspace(theta0, theta1, arc_pts)
    t_bwd = t_fwd[::-1]
    outer = np.column_stack([center[0] + r_out * np.cos(t_fwd), center[1] + r_out * np.sin(t_fwd)])
    inner = np.column_stack([center[0] + r_in * np.cos(t_bwd), center[1] + r_in * np.sin(t_bwd)])
    poly = np.vstack([outer, inner])
    return geometry.resample_closed_polyline(poly, BORDER_RESOLUTION)


@dataclass
class LabeledPointSet:
    """Generated 2-D points with geometric ground-truth border flags.

    ``is_boundary`` marks points sampled on any border polyline;
    ``is_inner_boundary`` marks the subset on hole polylines (doughnut hole,
    smile eyes/mouth).  The detection target — Mandatory Boundary Nodes — is
    the outer border only: ``is_boundary & ~is_inner_boundary``.
    """

    positions: np.ndarray
    is_boundary: np.ndarray
    is_inner_boundary: np.ndarray
    shape: ShapeSpec
    seed: int
    boundary_fraction: float = 0.0
    radius: float = field(default=0.0, compare=False)

    def __len__(self):
        return len(self.positions)

    @property
    def mandatory_boundary_ids(self) -> np.ndarray:
        """Ids of outer-border points (the positive class for detection)."""
        return np.flatnonzero(self.is_boundary & ~self.is_inner_boundary)

    @property
    def inner_boundary_ids(self) -> np.ndarray:
        return np.flatnonzero(self.is_inner_boundary)


def generate_points(shape: ShapeSpec, n: int, boundary_fraction: float, seed: int) -> LabeledPointSet:
    """Sample n labeled points: a border quota exactly on the polylines, the
    rest uniform in the interior.

    round(n * boundary_fraction) points are placed uniformly along the border
    polylines (split across outer and hole polylines proportionally to their
    perimeter); the remaining points are rejection-sampled strictly inside the
    region, farther than eps_border from every border.  Deterministic per seed.
    """
    if n < 3:
        raise EmptyNetwork(f"need at least 3 nodes, got {n}")
    if not 0.0 < boundary_fraction < 1.0:
        raise ValueError(f"boundary_fraction must be in (0, 1), got {boundary_fraction}")

    rng = np.random.default_rng(seed)
    outer, holes = shape.border_polylines()
    polylines = [outer] + holes
    eps = shape.eps_border

    n_border = int(round(n * boundary_fraction))
    counts = _split_by_perimeter(polylines, n_border)

    positions = []
    is_boundary = []
    is_inner = []
    for i, (poly, count) in enumerate(zip(polylines, counts)):
        pts = geometry.sample_on_polyline(poly, count, rng)
        positions.append(pts)
        is_boundary.append(np.ones(count, dtype=bool))
        is_inner.append(np.full(count, i > 0, dtype=bool))

    n_interior = n - n_border
    interior = _sample_interior(shape, outer, holes, n_interior, eps, rng)
    positions.append(interior)
    is_boundary.append(np.zeros(n_interior, dtype=bool))
    is_inner.append(np.zeros(n_interior, dtype=bool))

    return LabeledPointSet(
        positions=np.vstack(positions),
        is_boundary=np.concatenate(is_boundary),
        is_inner_boundary=np.concatenate(is_inner),
        shape=shape,
        seed=seed,
        boundary_fraction=boundary_fraction,
    )


def _split_by_perimeter(polylines, total):
    """Largest-remainder split of `total` proportional to perimeter."""
    perims = np.array([geometry.polyline_perimeter(p) for p in polylines])
    quota = total * perims / perims.sum()
    counts = np.floor(quota).astype(int)
    for i in np.argsort(-(quota - np.floor(quota)))[: total - counts.sum()]:
        counts[i] += 1
    return counts


def region_mask(shape: ShapeSpec, points: np.ndarray) -> np.ndarray:
    """True where points are inside the shape region (outer minus holes)."""
    outer, holes = shape.border_polylines()
    mask = geometry.points_in_polygon(points, outer)
    for hole in holes:
        mask &= ~geometry.points_in_polygon(points, hole)
    return mask


def _sample_interior(shape, outer, holes, count, eps, rng, max_rounds=500):
    lo = outer.min(axis=0)
    hi = outer.max(axis=0)
    out = []
    got = 0
    for _ in range(max_rounds):
        if got >= count:
            break
        batch = max(4 * (count - got), 64)
        cand = rng.uniform(lo, hi, size=(batch, 2))
        ok = geometry.points_in_polygon(cand, outer)
        for hole in holes:
            ok &= ~geometry.points_in_polygon(cand, hole)
        cand = cand[ok]
        if len(cand) == 0:
            continue
        far = geometry.distance_to_polyline(cand, outer) > eps
        for hole in holes:
            far &= geometry.distance_to_polyline(cand, hole) > eps
        cand = cand[far]
        take = cand[: count - got]
        out.append(take)
        got += len(take)
    if got < count:
        raise DegenerateShape(f"could not place {count} interior points in shape {shape.kind}")
    if not out:
        return np.empty((0, 2))
    return np.vstack(out)


def connect_by_radius(points: LabeledPointSet, target_avg_degree: float, tol: float = 0.25):
    """Unit-disk connect: edges join all pairs within radius r, r found by
    bisection so the achieved average degree lands within tol of the target.

    Returns (topology, r).  Edge weights are the exact Euclidean distances;
    apply perturb_weights for noisy estimates.
    """
    n = len(points)
    if target_avg_degree < 1.0:
        raise ValueError(f"target_avg_degree must be >= 1, got {target_avg_degree}")
    if target_avg_degree > n - 1:
        raise UnreachableDegree(f"target degree {target_avg_degree} exceeds n-1 = {n - 1}")

    dists = pdist(points.positions)
    sorted_d = np.sort(dists)

    def avg_degree(r):
        return 2.0 * np.searchsorted(sorted_d, r, side="right") / n

    diag = points.shape.scale * np.sqrt(2.0)
    if avg_degree(diag) + 1e-12 < target_avg_degree:
        raise UnreachableDegree(
            f"bisection cannot bracket target degree {target_avg_degree} (max {avg_degree(diag)})"
        )

    lo, hi = 0.0, diag
    for _ in range(40):
        mid = 0.5 * (lo + hi)
        if avg_degree(mid) >= target_avg_degree:
            hi = mid
        else:
            lo = mid
    # hi achieves >= target, lo falls short; keep the closer of the two
    r = hi if abs(avg_degree(hi) - target_avg_degree) <= abs(avg_degree(lo) - target_avg_degree) else lo
    if abs(avg_degree(r) - target_avg_degree) > tol:
        raise UnreachableDegree(
            f"no radius achieves degree {target_avg_degree} within tol {tol} "
            f"(closest: {avg_degree(r)} at r={r})"
        )

    iu, iv = np.triu_indices(n, k=1)
    mask = dists <= r
    edges = list(zip(iu[mask].tolist(), iv[mask].tolist(), dists[mask].tolist()))
    points.radius = float(r)
    return build_topology(n, edges), float(r)


def perturb_weights(topology: NetworkTopology, true_positions: LabeledPointSet, noise: float, seed: int) -> NetworkTopology:
    """Replace each edge weight with true distance x Uniform[1-noise, 1+noise].

    noise=0 reproduces the exact Euclidean distances.  Deterministic per seed;
    factors are drawn in canonical (u < v sorted) edge order.
    """
    if not 0.0 <= noise < 1.0:
        raise ValueError(f"noise must be in [0, 1), got {noise}")
    rng = np.random.default_rng(seed)
    pos = true_positions.positions
    true_d = np.linalg.norm(pos[topology.edge_u] - pos[topology.edge_v], axis=1)
    factors = rng.uniform(1.0 - noise, 1.0 + noise, size=topology.edge_count)
    weights = true_d * factors
    edges = list(zip(topology.edge_u.tolist(), topology.edge_v.tolist(), weights.tolist()))
    return build_topology(topology.node_count, edges)


def save_points_csv(points: LabeledPointSet, path):
    """Write id,x,y,is_boundary,is_inner_boundary rows for inspection."""
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["id", "x", "y", "is_boundary", "is_inner_boundary"])
        for i, (x, y) in enumerate(points.positions):
            writer.writerow([i, repr(float(x)), repr(float(y)),
                             int(points.is_boundary[i]), int(points.is_inner_boundary[i])])
