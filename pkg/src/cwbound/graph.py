"""Network topology representation and signal-strength distance estimation.

A topology is an undirected weighted graph whose edge weights are estimated
inter-node distances in meters.  Edges are stored canonically with ``u < v``
and neighbor lists are sorted ascending, so every downstream iteration order
is deterministic.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass

import numpy as np

from .errors import DuplicateEdge, IdOutOfRange, NonPositiveWeight, SelfLoop

__all__ = [
    "NetworkTopology",
    "RadioParams",
    "build_topology",
    "estdist_fspl",
    "neighbors",
    "topology_to_dict",
    "topology_from_dict",
    "save_topology",
    "load_topology",
]


@dataclass(frozen=True)
class RadioParams:
    """Free-space radio link parameters.

    frequency is in MHz (must be positive and finite); signal_strength is the
    received signal strength in dBm and may be any real number.
    """

    frequency: float
    signal_strength: float

    def __post_init__(self):
        if not (math.isfinite(self.frequency) and self.frequency > 0):
            raise ValueError(f"frequency must be finite and > 0, got {self.frequency}")
        if not math.isfinite(self.signal_strength):
            raise ValueError(f"signal_strength must be finite, got {self.signal_strength}")


class NetworkTopology:
    """Validated undirected weighted graph with nodes 0..node_count-1.

    Immutable after construction; safe to share across concurrent readers.
    Use :func:`build_topology` instead of calling the constructor directly.
    """

    __slots__ = ("node_count", "edge_u", "edge_v", "edge_weight", "_adj_index", "_adj_weight")

    def __init__(self, node_count, edge_u, edge_v, edge_weight, adj_index, adj_weight):
        self.node_count = int(node_count)
        self.edge_u = edge_u
        self.edge_v = edge_v
        self.edge_weight = edge_weight
        self._adj_index = adj_index
        self._adj_weight = adj_weight
        for arr in (edge_u, edge_v, edge_weight):
            arr.setflags(write=False)

    @property
    def edge_count(self) -> int:
        return len(self.edge_u)

    @property
    def edges(self):
        """List of (u, v, weight) with u < v, sorted by (u, v)."""
        return list(zip(self.edge_u.tolist(), self.edge_v.tolist(), self.edge_weight.tolist()))

    @property
    def average_degree(self) -> float:
        return 2.0 * self.edge_count / self.node_count

    def neighbor_arrays(self, u):
        """Neighbor ids and edge weights of u as ascending numpy arrays."""
        if not (0 <= u < self.node_count):
            raise IdOutOfRange(f"node id {u} outside 0..{self.node_count - 1}")
        return self._adj_index[u], self._adj_weight[u]

    def degree(self, u) -> int:
        return len(self.neighbor_arrays(u)[0])

    def __eq__(self, other):
        if not isinstance(other, NetworkTopology):
            return NotImplemented
        return (
            self.node_count == other.node_count
            and np.array_equal(self.edge_u, other.edge_u)
            and np.array_equal(self.edge_v, other.edge_v)
            and np.array_equal(self.edge_weight, other.edge_weight)
        )

    def __repr__(self):
        return f"NetworkTopology(n={self.node_count}, edges={self.edge_count})"


def build_topology(node_count, edges) -> NetworkTopology:
    """Validate and canonicalize an edge list into a NetworkTopology.

    Each edge is (u, v, weight).  Raises SelfLoop, DuplicateEdge,
    NonPositiveWeight or IdOutOfRange naming the offending edge.
    Disconnected topologies are accepted.
    """
    node_count = int(node_count)
    if node_count < 1:
        raise ValueError(f"node_count must be >= 1, got {node_count}")

    canonical = []
    seen = set()
    for edge in edges:
        u, v, w = edge
        u, v = int(u), int(v)
        w = float(w)
        if not (0 <= u < node_count) or not (0 <= v < node_count):
            raise IdOutOfRange(f"edge ({u}, {v}, {w}) references a node outside 0..{node_count - 1}")
        if u == v:
            raise SelfLoop(f"edge ({u}, {v}, {w}) is a self-loop")
        if not (math.isfinite(w) and w > 0):
            raise NonPositiveWeight(f"edge ({u}, {v}, {w}) has non-positive or non-finite weight")
        if u > v:
            u, v = v, u
        if (u, v) in seen:
            raise DuplicateEdge(f"edge ({u}, {v}, {w}) duplicates an existing undirected pair")
        seen.add((u, v))
        canonical.append((u, v, w))

    canonical.sort(key=lambda e: (e[0], e[1]))
    if canonical:
        eu = np.array([e[0] for e in canonical], dtype=np.int64)
        ev = np.array([e[1] for e in canonical], dtype=np.int64)
        ew = np.array([e[2] for e in canonical], dtype=np.float64)
    else:
        eu = np.empty(0, dtype=np.int64)
        ev = np.empty(0, dtype=np.int64)
        ew = np.empty(0, dtype=np.float64)

    adj_index, adj_weight = _build_adjacency(node_count, eu, ev, ew)
    return NetworkTopology(node_count, eu, ev, ew, adj_index, adj_weight)


def _build_adjacency(n, eu, ev, ew):
    """Per-node neighbor/weight arrays, neighbors ascending by id."""
    nbrs = [[] for _ in range(n)]
    for u, v, w in zip(eu.tolist(), ev.tolist(), ew.tolist()):
        nbrs[u].append((v, w))
        nbrs[v].append((u, w))
    adj_index, adj_weight = [], []
    for lst in nbrs:
        lst.sort()
        idx = np.array([p[0] for p in lst], dtype=np.int64)
        wgt = np.array([p[1] for p in lst], dtype=np.float64)
        idx.setflags(write=False)
        wgt.setflags(write=False)
        adj_index.append(idx)
        adj_weight.append(wgt)
    return adj_index, adj_weight


def neighbors(topology: NetworkTopology, u) -> list:
    """1-hop neighbors of u as [(node_id, weight), ...] in ascending id order."""
    idx, wgt = topology.neighbor_arrays(u)
    return list(zip(idx.tolist(), wgt.tolist()))


def estdist_fspl(params: RadioParams) -> float:
    """Estimated line-of-sight distance in meters from free-space path loss.

    d = 10 ** ((27.55 - 20*log10(f_MHz) - s_dBm) / 20)

    Strictly decreasing in both signal strength and frequency.
    """
    exponent = (27.55 - 20.0 * math.log10(params.frequency) - params.signal_strength) / 20.0
    return 10.0 ** exponent


def topology_to_dict(topology: NetworkTopology, ground_truth_boundary=None) -> dict:
    """Interchange dict: node_count, edges, optional ground_truth_boundary."""
    doc = {
        "node_count": topology.node_count,
        "edges": [[int(u), int(v), float(w)] for u, v, w in topology.edges],
    }
    if ground_truth_boundary is not None:
        doc["ground_truth_boundary"] = sorted(int(i) for i in ground_truth_boundary)
    return doc


def topology_from_dict(doc: dict):
    """Parse the interchange dict. Returns (topology, ground_truth_boundary or None)."""
    topology = build_topology(doc["node_count"], doc["edges"])
    gt = doc.get("ground_truth_boundary")
    if gt is not None:
        gt = sorted(int(i) for i in gt)
        for i in gt:
            if not (0 <= i < topology.node_count):
                raise IdOutOfRange(f"ground_truth_boundary id {i} outside 0..{topology.node_count - 1}")
    return topology, gt


def save_topology(topology: NetworkTopology, path, ground_truth_boundary=None):
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(topology_to_dict(topology, ground_truth_boundary), fh)
        fh.write("\n")


def load_topology(path):
    """Load a topology JSON file. Returns (topology, ground_truth_boundary or None)."""
    with open(path, "r", encoding="utf-8") as fh:
        return topology_from_dict(json.load(fh))
