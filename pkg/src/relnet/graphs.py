"""Undirected simple graphs with optional community labels.

The graph type used throughout: nodes are the integers 0..n-1, edges are
unordered pairs stored with the smaller id first, self-loops are never
stored (the MLP translation adds them implicitly), and an optional
community labelling assigns every node exactly one 0-based community id.

Also holds the structural metrics reported alongside training results and
the plain-text edge-list format shared with the connectome importer.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass
from functools import cached_property
from pathlib import Path

from .errors import (
    DisconnectedGraph,
    FormatError,
    InvalidNodeId,
    UndefinedMetric,
)

Edge = tuple[int, int]


@dataclass(frozen=True)
class Graph:
    """Immutable undirected simple graph on nodes 0..node_count-1."""

    node_count: int
    edges: frozenset[Edge]
    community_of: tuple[int, ...] | None = None

    def __post_init__(self):
        if self.node_count < 1:
            raise InvalidNodeId(f"node_count must be >= 1, got {self.node_count}")
        for i, j in self.edges:
            if not (0 <= i < j < self.node_count):
                raise InvalidNodeId(
                    f"edge ({i},{j}) invalid for node_count={self.node_count}"
                )
        if self.community_of is not None and len(self.community_of) != self.node_count:
            raise InvalidNodeId(
                f"community labels cover {len(self.community_of)} nodes, "
                f"expected {self.node_count}"
            )

    @cached_property
    def neighbors(self) -> tuple[tuple[int, ...], ...]:
        """Adjacency as a tuple of sorted neighbor tuples, indexed by node."""
        adj: list[list[int]] = [[] for _ in range(self.node_count)]
        for i, j in self.edges:
            adj[i].append(j)
            adj[j].append(i)
        return tuple(tuple(sorted(a)) for a in adj)

    @property
    def edge_count(self) -> int:
        return len(self.edges)

    def degree(self, i: int) -> int:
        return len(self.neighbors[i])

    def degrees(self) -> list[int]:
        return [len(a) for a in self.neighbors]

    def has_edge(self, i: int, j: int) -> bool:
        if i == j:
            return False
        return (min(i, j), max(i, j)) in self.edges

    def n_communities(self) -> int:
        if self.community_of is None:
            return 0
        return len(set(self.community_of))

    def community_sizes(self) -> dict[int, int]:
        sizes: dict[int, int] = {}
        if self.community_of is not None:
            for c in self.community_of:
                sizes[c] = sizes.get(c, 0) + 1
        return sizes


def from_edge_pairs(
    n: int,
    pairs,
    community_of=None,
) -> Graph:
    """Build a Graph from possibly messy (i, j) pairs.

    Self-pairs are dropped, duplicates collapse, and (i, j) == (j, i).
    `community_of` may be a sequence or a node->community mapping.
    """
    if n < 1:
        raise InvalidNodeId(f"n must be >= 1, got {n}")
    edges = set()
    for i, j in pairs:
        i, j = int(i), int(j)
        if not (0 <= i < n and 0 <= j < n):
            raise InvalidNodeId(f"pair ({i},{j}) out of range for n={n}")
        if i == j:
            continue
        edges.add((i, j) if i < j else (j, i))
    labels = None
    if community_of is not None:
        if isinstance(community_of, dict):
            missing = [v for v in range(n) if v not in community_of]
            if missing:
                raise InvalidNodeId(f"nodes without community label: {missing[:5]}")
            labels = tuple(int(community_of[v]) for v in range(n))
        else:
            labels = tuple(int(c) for c in community_of)
    return Graph(node_count=n, edges=frozenset(edges), community_of=labels)


def connected_components(g: Graph) -> list[list[int]]:
    """Connected components as sorted node lists, ordered by smallest member."""
    seen = [False] * g.node_count
    comps = []
    for start in range(g.node_count):
        if seen[start]:
            continue
        queue = deque([start])
        seen[start] = True
        comp = []
        while queue:
            v = queue.popleft()
            comp.append(v)
            for w in g.neighbors[v]:
                if not seen[w]:
                    seen[w] = True
                    queue.append(w)
        comps.append(sorted(comp))
    return comps


def induced_subgraph(g: Graph, nodes) -> Graph:
    """Induced subgraph on `nodes`, relabeled 0..len-1 in ascending original order.

    Community labels, when present, are carried over.
    """
    kept = sorted(set(int(v) for v in nodes))
    for v in kept:
        if not (0 <= v < g.node_count):
            raise InvalidNodeId(f"node {v} out of range")
    index = {v: k for k, v in enumerate(kept)}
    edges = [
        (index[i], index[j]) for i, j in g.edges if i in index and j in index
    ]
    labels = None
    if g.community_of is not None:
        labels = tuple(g.community_of[v] for v in kept)
    return from_edge_pairs(len(kept), edges, community_of=labels)


def largest_component(g: Graph) -> Graph:
    """Induced subgraph on the largest connected component.

    Ties on size go to the component containing the lowest node id; an
    edgeless graph therefore reduces to the single node 0. Node ids are
    relabeled to 0..n'-1 preserving ascending original order.
    """
    comps = connected_components(g)
    best = max(comps, key=lambda c: (len(c), -c[0]))
    return induced_subgraph(g, best)


def clustering_coefficient(g: Graph) -> float:
    """Mean local clustering; nodes of degree < 2 contribute 0."""
    if g.node_count == 0:
        return 0.0
    total = 0.0
    for v in range(g.node_count):
        nbrs = g.neighbors[v]
        k = len(nbrs)
        if k < 2:
            continue
        links = 0
        for a in range(k):
            for b in range(a + 1, k):
                if g.has_edge(nbrs[a], nbrs[b]):
                    links += 1
        total += 2.0 * links / (k * (k - 1))
    return total / g.node_count


def _bfs_distances(g: Graph, start: int) -> list[int]:
    dist = [-1] * g.node_count
    dist[start] = 0
    queue = deque([start])
    while queue:
        v = queue.popleft()
        for w in g.neighbors[v]:
            if dist[w] < 0:
                dist[w] = dist[v] + 1
                queue.append(w)
    return dist


def avg_path_length(g: Graph) -> float:
    """Mean BFS shortest-path length over unordered distinct node pairs."""
    n = g.node_count
    if n < 2:
        raise UndefinedMetric("average path length needs at least 2 nodes")
    total = 0
    for v in range(n):
        dist = _bfs_distances(g, v)
        for w in range(v + 1, n):
            if dist[w] < 0:
                raise DisconnectedGraph(
                    f"no path between {v} and {w}; reduce to the largest component first"
                )
            total += dist[w]
    return total / (n * (n - 1) / 2)


def modularity(g: Graph, partition) -> float:
    """Newman-Girvan modularity Q = sum_c (e_cc - a_c^2).

    `partition` maps node -> community id (mapping or sequence); every node
    must be labeled. Requires at least one edge.
    """
    if g.edge_count == 0:
        raise UndefinedMetric("modularity is undefined for an edgeless graph")
    if isinstance(partition, dict):
        labels = [partition[v] for v in range(g.node_count)]
    else:
        labels = list(partition)
        if len(labels) != g.node_count:
            raise InvalidNodeId("partition must label every node")
    m = g.edge_count
    intra: dict[int, int] = {}
    degree_sum: dict[int, int] = {}
    for i, j in g.edges:
        if labels[i] == labels[j]:
            intra[labels[i]] = intra.get(labels[i], 0) + 1
    for v in range(g.node_count):
        c = labels[v]
        degree_sum[c] = degree_sum.get(c, 0) + g.degree(v)
    q = 0.0
    for c in set(labels):
        e_cc = intra.get(c, 0) / m
        a_c = degree_sum.get(c, 0) / (2 * m)
        q += e_cc - a_c * a_c
    return q


def cross_density(g: Graph) -> float:
    """Fraction of inter-community node pairs realized as edges."""
    if g.community_of is None or g.n_communities() < 2:
        raise UndefinedMetric("cross density needs >= 2 communities")
    labels = g.community_of
    sizes = list(g.community_sizes().values())
    n = g.node_count
    cross_pairs = (n * n - sum(s * s for s in sizes)) // 2
    cross_edges = sum(1 for i, j in g.edges if labels[i] != labels[j])
    return cross_edges / cross_pairs


def degree_stats(g: Graph) -> tuple[float, int, list[int]]:
    """(mean degree, max degree, histogram of counts per degree 0..max)."""
    degs = g.degrees()
    mean = sum(degs) / g.node_count
    dmax = max(degs)
    hist = [0] * (dmax + 1)
    for d in degs:
        hist[d] += 1
    return mean, dmax, hist


@dataclass(frozen=True)
class GraphMetrics:
    """Structural summary reported next to each training result.

    `avg_path_length` is None when the graph is disconnected or has fewer
    than two nodes; `modularity` is None without community labels or edges;
    `cross_density` is None unless at least two communities are present.
    """

    mean_degree: float
    clustering: float
    avg_path_length: float | None
    modularity: float | None
    cross_density: float | None
    giant_fraction: float


def compute_metrics(g: Graph) -> GraphMetrics:
    """Compute the metric set for a graph as handed to the MLP translator."""
    comps = connected_components(g)
    giant = max(len(c) for c in comps)
    apl = None
    if len(comps) == 1 and g.node_count >= 2:
        apl = avg_path_length(g)
    mod = None
    if g.community_of is not None and g.edge_count > 0:
        mod = modularity(g, g.community_of)
    cross = None
    if g.community_of is not None and g.n_communities() >= 2:
        cross = cross_density(g)
    mean_deg, _, _ = degree_stats(g)
    return GraphMetrics(
        mean_degree=mean_deg,
        clustering=clustering_coefficient(g),
        avg_path_length=apl,
        modularity=mod,
        cross_density=cross,
        giant_fraction=giant / g.node_count,
    )


# ---------------------------------------------------------------------------
# Edge-list text format
#
# One edge per line: two whitespace-separated 0-based integer ids; an
# optional third column (weights in published connectome files) is ignored.
# Lines starting with '#' are comments; two structured comments are written
# by this package and recognized on read:
#     # nodes <n>
#     # community <node> <label>


def write_edge_list(g: Graph, path) -> None:
    lines = [f"# nodes {g.node_count}"]
    if g.community_of is not None:
        for v in range(g.node_count):
            lines.append(f"# community {v} {g.community_of[v]}")
    for i, j in sorted(g.edges):
        lines.append(f"{i} {j}")
    Path(path).write_text("\n".join(lines) + "\n")


def read_edge_list(path) -> Graph:
    """Parse the edge-list format; raises FormatError with the 1-based line number."""
    declared_n = None
    communities: dict[int, int] = {}
    pairs: list[Edge] = []
    max_id = -1
    with open(path) as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.strip()
            if not line:
                continue
            if line.startswith("#"):
                fields = line[1:].split()
                if fields[:1] == ["nodes"] and len(fields) == 2:
                    declared_n = int(fields[1])
                elif fields[:1] == ["community"] and len(fields) == 3:
                    communities[int(fields[1])] = int(fields[2])
                continue
            fields = line.split()
            if len(fields) < 2:
                raise FormatError(f"{path}:{lineno}: expected two node ids")
            try:
                i, j = int(fields[0]), int(fields[1])
            except ValueError as exc:
                raise FormatError(f"{path}:{lineno}: non-integer node id") from exc
            if i < 0 or j < 0:
                raise FormatError(f"{path}:{lineno}: negative node id")
            pairs.append((i, j))
            max_id = max(max_id, i, j)
    if communities:
        max_id = max(max_id, max(communities))
    n = max_id + 1
    if declared_n is not None:
        if declared_n < n:
            raise FormatError(
                f"{path}: declared {declared_n} nodes but ids reach {max_id}"
            )
        n = declared_n
    if n < 1:
        raise FormatError(f"{path}: no nodes found")
    labels = None
    if communities:
        missing = [v for v in range(n) if v not in communities]
        if missing:
            raise FormatError(
                f"{path}: community labels missing for nodes {missing[:5]}"
            )
        labels = {v: communities[v] for v in range(n)}
    return from_edge_pairs(n, pairs, community_of=labels)
