"""Import biological connectomes from edge-list files.

Published connectome files (e.g. the C. elegans whole-brain and frontal
networks) come as directed, sometimes weighted edge lists; here they are
collapsed to the undirected simple graphs the MLP translation consumes.
Data files are user-supplied paths, never vendored.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np

from .errors import TooLarge
from .generators import gen_er
from .graphs import Graph, induced_subgraph, largest_component, read_edge_list

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class ConnectomeSource:
    """An edge-list file plus import options.

    declared_nodes: expected node count; a mismatch is logged, not fatal,
        since published connectome exports vary in how they count isolated
        neurons.
    symmetrize: directed entries are collapsed to undirected edges. Storage
        is undirected either way; the flag documents the source convention.
    """

    path: str
    declared_nodes: int | None = None
    symmetrize: bool = True


def import_connectome(src: ConnectomeSource) -> Graph:
    """Read an edge-list file into an undirected simple Graph.

    Duplicate and reciprocal lines collapse to one edge; self-loops are
    dropped. When `declared_nodes` exceeds the largest referenced id the
    extra (isolated) nodes are kept.
    """
    g = read_edge_list(src.path)
    if src.declared_nodes is not None and src.declared_nodes != g.node_count:
        log.warning(
            "connectome %s: declared %d nodes, file yields %d",
            src.path,
            src.declared_nodes,
            g.node_count,
        )
        if src.declared_nodes > g.node_count:
            g = Graph(
                node_count=src.declared_nodes,
                edges=g.edges,
                community_of=None,
            )
    return g


def sample_subgraph(g: Graph, n_sample: int, seed: int) -> Graph:
    """Uniform node sample without replacement, induced, then largest component.

    The component step keeps the trained architecture connected; the
    realized node count can therefore fall below n_sample.
    """
    if n_sample > g.node_count:
        raise TooLarge(
            f"cannot sample {n_sample} nodes from a {g.node_count}-node graph"
        )
    rng = np.random.default_rng(int(seed) & ((1 << 64) - 1))
    nodes = rng.choice(g.node_count, size=n_sample, replace=False)
    return largest_component(induced_subgraph(g, nodes.tolist()))


def matched_er(g: Graph, seed: int) -> Graph:
    """ER control graph: same node count, p matched to g's edge density,
    reduced to its largest component."""
    n = g.node_count
    p = g.edge_count / (n * (n - 1) / 2)
    return largest_component(gen_er(n, min(1.0, p), seed))
