"""Chinese Whispers clustering plus cluster medoid/centroid computation.

Every node starts in its own class; each sweep visits all nodes in a fresh
seeded random order and each node adopts the neighbor class with the greatest
total edge weight, provided that class holds more than a ``delta`` fraction of
the total neighbor weight.  Updates are applied immediately (asynchronously),
so later nodes in a sweep see earlier relabelings — that order dependence is
part of the algorithm, which is why the whole run is driven by one seeded
PCG64 generator and is single-threaded by design.

Edge weights (estimated distances) are used directly as vote weights, so
longer edges vote more strongly.  ``invert_weights`` switches votes to
1/weight for proximity-favoring behavior; it is off by default.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import EmptyCluster
from .graph import NetworkTopology

__all__ = [
    "WhispersConfig",
    "ClusterAssignment",
    "chinese_whispers",
    "vote_update",
    "medoid",
    "centroid",
    "save_clusters_csv",
]


@dataclass(frozen=True)
class WhispersConfig:
    """Voting threshold, convergence window, iteration cap, and RNG seed."""

    delta: float = 0.0
    stable_iters: int = 3
    max_iters: int = 100
    seed: int = 0
    invert_weights: bool = False

    def __post_init__(self):
        if not 0.0 <= self.delta <= 1.0:
            raise ValueError(f"delta must be in [0, 1], got {self.delta}")
        if self.stable_iters < 1:
            raise ValueError(f"stable_iters must be >= 1, got {self.stable_iters}")
        if self.max_iters < 1:
            raise ValueError(f"max_iters must be >= 1, got {self.max_iters}")


class ClusterAssignment:
    """Node -> cluster-label association with derived members and sizes.

    Labels are whatever integers survive the propagation (initially 1..n).
    """

    def __init__(self, labels):
        self.labels = np.asarray(labels, dtype=np.int64).copy()
        self.labels.setflags(write=False)
        uniq, inverse, counts = np.unique(self.labels, return_inverse=True, return_counts=True)
        self._uniq = uniq
        self._counts = counts
        self._inverse = inverse
        self.members = {int(lab): np.flatnonzero(self.labels == lab) for lab in uniq}
        self.sizes = {int(lab): int(cnt) for lab, cnt in zip(uniq, counts)}

    @property
    def node_count(self) -> int:
        return len(self.labels)

    @property
    def cluster_count(self) -> int:
        return len(self._uniq)

    def label_of(self, u) -> int:
        return int(self.labels[u])

    def size_of_node(self, u) -> int:
        return int(self._counts[self._inverse[u]])

    def node_sizes(self) -> np.ndarray:
        """Cluster cardinality per node, aligned with node ids."""
        return self._counts[self._inverse]

    def __eq__(self, other):
        if not isinstance(other, ClusterAssignment):
            return NotImplemented
        return np.array_equal(self.labels, other.labels)


def _vote(nbr_labels, nbr_weights, current, delta, bincount_len):
    """Shared voting rule: strongest class if it exceeds delta, else keep.

    Ties go to the smallest numeric label (argmax returns the first maximum,
    and bincount is indexed by label).
    """
    if len(nbr_labels) == 0:
        return current
    w = np.bincount(nbr_labels, weights=nbr_weights, minlength=bincount_len)
    sum_w = nbr_weights.sum()
    c_max = int(np.argmax(w))
    if w[c_max] / sum_w > delta:
        return c_max
    return current


def vote_update(topology: NetworkTopology, u: int, assignment: ClusterAssignment, delta: float,
                invert_weights: bool = False) -> int:
    """One node's relabeling decision given the current assignment.

    Sums edge weights per neighbor class; returns the heaviest class when its
    share of the total exceeds delta, otherwise u's current label.  A node
    with no neighbors keeps its label.
    """
    idx, wgt = topology.neighbor_arrays(u)
    if invert_weights:
        wgt = 1.0 / wgt
    labels = assignment.labels
    return _vote(labels[idx], wgt, int(labels[u]), delta, int(labels.max()) + 1)


def chinese_whispers(topology: NetworkTopology, config: WhispersConfig, weights=None):
    """Cluster a topology; returns (ClusterAssignment, converged).

    ``weights`` optionally overrides the topology's edge weights (same
    canonical edge order) — the layout engine uses this to re-cluster on
    current canvas edge lengths.  Converged means the labeling survived
    ``stable_iters`` consecutive sweeps unchanged before ``max_iters``.
    """
    n = topology.node_count
    rng = np.random.default_rng(config.seed)
    labels = np.arange(1, n + 1, dtype=np.int64)

    nbr_idx, nbr_wgt = _neighbor_tables(topology, weights)
    if config.invert_weights:
        nbr_wgt = [1.0 / w if len(w) else w for w in nbr_wgt]

    stable = 0
    converged = False
    for _ in range(config.max_iters):
        before = labels.copy()
        order = rng.permutation(n)
        for u in order:
            labels[u] = _vote(labels[nbr_idx[u]], nbr_wgt[u], labels[u], config.delta, n + 1)
        if np.array_equal(labels, before):
            stable += 1
            if stable >= config.stable_iters:
                converged = True
                break
        else:
            stable = 0
    return ClusterAssignment(labels), converged


def _neighbor_tables(topology, weights):
    if weights is None:
        return (
            [topology.neighbor_arrays(u)[0] for u in range(topology.node_count)],
            [topology.neighbor_arrays(u)[1] for u in range(topology.node_count)],
        )
    weights = np.asarray(weights, dtype=np.float64)
    if len(weights) != topology.edge_count:
        raise ValueError(f"expected {topology.edge_count} weights, got {len(weights)}")
    n = topology.node_count
    nbrs = [[] for _ in range(n)]
    for u, v, w in zip(topology.edge_u.tolist(), topology.edge_v.tolist(), weights.tolist()):
        nbrs[u].append((v, w))
        nbrs[v].append((u, w))
    idx, wgt = [], []
    for lst in nbrs:
        lst.sort()
        idx.append(np.array([p[0] for p in lst], dtype=np.int64))
        wgt.append(np.array([p[1] for p in lst], dtype=np.float64))
    return idx, wgt


def medoid(members, dist) -> int:
    """The member minimizing the sum of distances to all members.

    ``dist`` is either a full pairwise matrix indexed by node id or a callable
    (u, v) -> distance.  Ties break to the smallest node id.
    """
    members = [int(m) for m in members]
    if not members:
        raise EmptyCluster("medoid of zero members")
    members = sorted(members)
    if isinstance(dist, np.ndarray):
        sub = dist[np.ix_(members, members)]
        sums = sub.sum(axis=1)
        return members[int(np.argmin(sums))]
    best, best_sum = None, None
    for y in members:
        total = sum(dist(y, x) for x in members)
        if best_sum is None or total < best_sum:
            best, best_sum = y, total
    return best


def centroid(members, positions) -> np.ndarray:
    """Arithmetic mean position of the members (not itself a node)."""
    members = np.asarray(list(members), dtype=np.int64)
    if len(members) == 0:
        raise EmptyCluster("centroid of zero members")
    return np.asarray(positions, dtype=float)[members].mean(axis=0)


def save_clusters_csv(assignment: ClusterAssignment, path):
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("node_id,label\n")
        for i, lab in enumerate(assignment.labels.tolist()):
            fh.write(f"{i},{lab}\n")
