"""Small 2-D geometry helpers used by the network generator.

All polylines here are closed: an (m, 2) vertex array implicitly defines m
segments, the last one joining vertex m-1 back to vertex 0.
"""

from __future__ import annotations

import numpy as np

__all__ = [
    "polyline_lengths",
    "polyline_perimeter",
    "resample_closed_polyline",
    "circle_polyline",
    "distance_to_polyline",
    "points_in_polygon",
    "sample_on_polyline",
]


def polyline_lengths(poly: np.ndarray) -> np.ndarray:
    """Length of each segment of a closed polyline."""
    return np.linalg.norm(np.roll(poly, -1, axis=0) - poly, axis=1)


def polyline_perimeter(poly: np.ndarray) -> float:
    return float(polyline_lengths(poly).sum())


def resample_closed_polyline(vertices: np.ndarray, n_segments: int) -> np.ndarray:
    """Subdivide a closed polygon into ~n_segments pieces, keeping every corner.

    Segments are allotted to polygon edges proportionally to length (largest
    remainder, at least one per edge), so the result traces the exact same
    outline at higher resolution.
    """
    vertices = np.asarray(vertices, dtype=float)
    m = len(vertices)
    lengths = polyline_lengths(vertices)
    total = lengths.sum()
    quota = n_segments * lengths / total
    counts = np.maximum(np.floor(quota).astype(int), 1)
    remainder = n_segments - counts.sum()
    if remainder > 0:
        order = np.argsort(-(quota - np.floor(quota)))
        for i in order[:remainder]:
            counts[i] += 1
    out = []
    for i in range(m):
        a = vertices[i]
        b = vertices[(i + 1) % m]
        for k in range(counts[i]):
            t = k / counts[i]
            out.append(a + t * (b - a))
    return np.array(out)


def circle_polyline(center, radius: float, n_segments: int = 256) -> np.ndarray:
    """Closed n-gon approximating a circle, starting at angle 0, CCW."""
    theta = np.linspace(0.0, 2.0 * np.pi, n_segments, endpoint=False)
    return np.column_stack([center[0] + radius * np.cos(theta), center[1] + radius * np.sin(theta)])


def distance_to_polyline(points: np.ndarray, poly: np.ndarray) -> np.ndarray:
    """Minimum distance from each point to a closed polyline.

    Vectorized over segments; memory is O(n_points * n_segments).
    """
    points = np.atleast_2d(np.asarray(points, dtype=float))
    a = poly
    b = np.roll(poly, -1, axis=0)
    ab = b - a  # (m, 2)
    ab_len2 = np.einsum("ij,ij->i", ab, ab)
    ab_len2 = np.where(ab_len2 == 0.0, 1.0, ab_len2)
    ap = points[:, None, :] - a[None, :, :]  # (n, m, 2)
    t = np.clip(np.einsum("nmj,mj->nm", ap, ab) / ab_len2, 0.0, 1.0)
    closest = a[None, :, :] + t[:, :, None] * ab[None, :, :]
    d = np.linalg.norm(points[:, None, :] - closest, axis=2)
    return d.min(axis=1)


def points_in_polygon(points: np.ndarray, poly: np.ndarray) -> np.ndarray:
    """Even-odd (crossing number) point-in-polygon test, vectorized.

    Points exactly on an edge may land on either side; the generator keeps
    interior samples away from borders so this never matters in practice.
    """
    points = np.atleast_2d(np.asarray(points, dtype=float))
    x, y = points[:, 0], points[:, 1]
    x1, y1 = poly[:, 0], poly[:, 1]
    x2, y2 = np.roll(poly, -1, axis=0)[:, 0], np.roll(poly, -1, axis=0)[:, 1]
    inside = np.zeros(len(points), dtype=bool)
    for i in range(len(poly)):
        crosses = (y1[i] > y) != (y2[i] > y)
        if not crosses.any():
            continue
        x_at = x1[i] + (y - y1[i]) / (y2[i] - y1[i]) * (x2[i] - x1[i])
        inside ^= crosses & (x < x_at)
    return inside


def sample_on_polyline(poly: np.ndarray, count: int, rng: np.random.Generator) -> np.ndarray:
    """Sample `count` points uniformly by arc length along a closed polyline."""
    if count == 0:
        return np.empty((0, 2))
    lengths = polyline_lengths(poly)
    cum = np.concatenate([[0.0], np.cumsum(lengths)])
    u = rng.uniform(0.0, cum[-1], size=count)
    seg = np.searchsorted(cum, u, side="right") - 1
    seg = np.clip(seg, 0, len(poly) - 1)
    t = (u - cum[seg]) / np.where(lengths[seg] == 0.0, 1.0, lengths[seg])
    a = poly[seg]
    b = np.roll(poly, -1, axis=0)[seg]
    return a + t[:, None] * (b - a)
