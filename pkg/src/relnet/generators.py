"""Seeded generators for the graph families used in the experiments.

Families:
  complete   -- all-pairs baseline
  er         -- Erdos-Renyi G(n, p), each pair independent
  static_sf  -- static scale-free model: node weights w_i ~ i^(-alpha) with
                alpha = 1/(gamma-1); endpoints drawn proportionally to the
                weights until exactly floor(m*n/2) distinct edges exist
  community  -- k near-equal blocks, each generated by a base family and
                reduced to its largest component, then inter-community node
                pairs added independently with probability mu

Generators are pure functions of their spec: the same spec (including seed)
always yields the same edge set.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from .errors import EdgeSaturation, TooManyCommunities, TooSmall
from .graphs import Graph, connected_components, from_edge_pairs, largest_component
from .seeding import child_seed

FAMILIES = ("complete", "er", "static_sf", "community")
BASE_FAMILIES = ("er", "static_sf")

# Stream tags for deriving independent child seeds inside the composer.
_CROSS_STREAM = 1 << 32
_BRIDGE_STREAM = 2 << 32

# Drawing batch for the static-model sampler; size only affects speed.
_SF_CHUNK = 8192


@dataclass(frozen=True)
class GeneratorSpec:
    """Parameters of one graph family; unused fields must stay None.

    family "community" composes `communities` blocks of the `base` family
    (whose own parameters must be set) with inter-community density `mu`.
    """

    family: str
    n: int
    p: float | None = None
    gamma: float | None = None
    m: float | None = None
    communities: int | None = None
    mu: float | None = None
    base: str | None = None
    seed: int = 0

    def validate(self) -> None:
        if self.family not in FAMILIES:
            raise ValueError(f"unknown family {self.family!r}")
        if self.n < 2:
            raise TooSmall(f"n must be >= 2, got {self.n}")
        required = {
            "complete": (),
            "er": ("p",),
            "static_sf": ("gamma", "m"),
            "community": ("communities", "mu", "base"),
        }[self.family]
        for name in ("p", "gamma", "m", "communities", "mu", "base"):
            value = getattr(self, name)
            if name in required and value is None:
                raise ValueError(f"family {self.family!r} requires {name}")
            if name not in required and value is not None and self.family != "community":
                raise ValueError(f"family {self.family!r} does not take {name}")
        if self.p is not None and not (0.0 <= self.p <= 1.0):
            raise ValueError(f"p must be in [0,1], got {self.p}")
        if self.mu is not None and not (0.0 <= self.mu <= 1.0):
            raise ValueError(f"mu must be in [0,1], got {self.mu}")
        if self.gamma is not None and self.gamma < 2.0:
            raise ValueError(f"gamma must be >= 2, got {self.gamma}")
        if self.m is not None and self.m <= 0:
            raise ValueError(f"m must be > 0, got {self.m}")
        if self.family == "static_sf":
            _check_sf_feasible(self.n, self.m)
        if self.family == "community":
            k = self.communities
            if k < 1:
                raise ValueError(f"communities must be >= 1, got {k}")
            if k > self.n / 2:
                raise TooManyCommunities(
                    f"{k} communities leave blocks below 2 nodes for n={self.n}"
                )
            if self.base not in BASE_FAMILIES:
                raise ValueError(f"base must be one of {BASE_FAMILIES}, got {self.base!r}")
            if self.base == "er" and self.p is None:
                raise ValueError("base 'er' requires p")
            if self.base == "static_sf":
                if self.gamma is None or self.m is None:
                    raise ValueError("base 'static_sf' requires gamma and m")
                _check_sf_feasible(self.n // k, self.m)


def _check_sf_feasible(n: int, m: float) -> None:
    target = int(m * n // 2)
    if target > n * (n - 1) // 2:
        raise ValueError(
            f"static model infeasible: {target} edges requested, "
            f"{n * (n - 1) // 2} possible for n={n}"
        )


@dataclass(frozen=True)
class GenerationInfo:
    """Composition bookkeeping: realized block sizes, the inter-community
    pair/edge counts before connectivity repair, and repair edges added."""

    community_sizes: tuple[int, ...]
    cross_pairs: int
    cross_edges: int
    bridge_edges: int


def gen_complete(n: int) -> Graph:
    """Complete graph on n nodes (the dense baseline)."""
    if n < 2:
        raise TooSmall(f"complete graph needs n >= 2, got {n}")
    edges = [(i, j) for i in range(n) for j in range(i + 1, n)]
    return from_edge_pairs(n, edges)


def gen_er(n: int, p: float, seed: int) -> Graph:
    """Erdos-Renyi G(n, p): each pair included independently with probability p."""
    if n < 2:
        raise TooSmall(f"ER graph needs n >= 2, got {n}")
    if not (0.0 <= p <= 1.0):
        raise ValueError(f"p must be in [0,1], got {p}")
    rng = np.random.default_rng(int(seed) & ((1 << 64) - 1))
    rows, cols = np.triu_indices(n, k=1)
    keep = rng.random(rows.shape[0]) < p
    edges = list(zip(rows[keep].tolist(), cols[keep].tolist()))
    return from_edge_pairs(n, edges)


def gen_static_sf(n: int, gamma: float, m: float, seed: int) -> Graph:
    """Static-model scale-free graph with degree exponent gamma, mean degree m.

    Node i (1-based) carries weight i^(-alpha), alpha = 1/(gamma-1); two
    endpoints are drawn independently in proportion to the weights, and the
    edge is kept when the endpoints are distinct and the edge is new, until
    exactly floor(m*n/2) edges exist. A run of 200*E consecutive rejected
    draws aborts with EdgeSaturation (dense or very low gamma regimes).
    """
    if n < 2:
        raise TooSmall(f"static model needs n >= 2, got {n}")
    if gamma < 2.0:
        raise ValueError(f"gamma must be >= 2, got {gamma}")
    if m <= 0:
        raise ValueError(f"m must be > 0, got {m}")
    _check_sf_feasible(n, m)
    target = int(m * n // 2)
    if target == 0:
        return from_edge_pairs(n, [])

    alpha = 1.0 / (gamma - 1.0)
    weights = np.arange(1, n + 1, dtype=np.float64) ** (-alpha)
    cdf = np.cumsum(weights)
    cdf /= cdf[-1]
    cdf[-1] = 1.0

    rng = np.random.default_rng(int(seed) & ((1 << 64) - 1))
    edges: set[tuple[int, int]] = set()
    budget = 200 * target
    consecutive_failures = 0
    while len(edges) < target:
        draws = np.searchsorted(cdf, rng.random(2 * _SF_CHUNK), side="right")
        for k in range(_SF_CHUNK):
            a = int(draws[2 * k])
            b = int(draws[2 * k + 1])
            if a == b:
                consecutive_failures += 1
            else:
                edge = (a, b) if a < b else (b, a)
                if edge in edges:
                    consecutive_failures += 1
                else:
                    edges.add(edge)
                    consecutive_failures = 0
                    if len(edges) == target:
                        break
            if consecutive_failures > budget:
                raise EdgeSaturation(
                    f"static model saturated at {len(edges)}/{target} edges "
                    f"(gamma={gamma}, n={n})",
                    attempts=consecutive_failures,
                )
    return from_edge_pairs(n, edges)


def _split_sizes(n: int, k: int) -> list[int]:
    base, extra = divmod(n, k)
    return [base + 1 if c < extra else base for c in range(k)]


def _gen_base(spec: GeneratorSpec, size: int, seed: int) -> Graph:
    if spec.base == "er":
        return gen_er(size, spec.p, seed)
    return gen_static_sf(size, spec.gamma, spec.m, seed)


def compose_communities(spec: GeneratorSpec) -> Graph:
    """Community-structured graph per the composed family; see module docstring."""
    graph, _ = compose_communities_with_info(spec)
    return graph


def compose_communities_with_info(spec: GeneratorSpec) -> tuple[Graph, GenerationInfo]:
    spec.validate()
    if spec.family != "community":
        raise ValueError(f"expected family 'community', got {spec.family!r}")
    k = spec.communities

    blocks: list[Graph] = []
    for c, size in enumerate(_split_sizes(spec.n, k)):
        sub = _gen_base(spec, size, child_seed(spec.seed, c))
        blocks.append(largest_component(sub))
    sizes = [b.node_count for b in blocks]
    offsets = np.concatenate([[0], np.cumsum(sizes)]).tolist()
    total = offsets[-1]

    edges: set[tuple[int, int]] = set()
    labels = []
    for c, block in enumerate(blocks):
        off = offsets[c]
        labels.extend([c] * block.node_count)
        for i, j in block.edges:
            edges.add((off + i, off + j))

    # Inter-community pairs sampled independently at probability mu, block
    # pair by block pair in lexicographic order for determinism.
    cross_rng = np.random.default_rng(child_seed(spec.seed, _CROSS_STREAM))
    cross_pairs = 0
    cross_edges = 0
    for c1 in range(k):
        for c2 in range(c1 + 1, k):
            n1, n2 = sizes[c1], sizes[c2]
            cross_pairs += n1 * n2
            keep = cross_rng.random((n1, n2)) < spec.mu
            us, vs = np.nonzero(keep)
            for u, v in zip(us.tolist(), vs.tolist()):
                edges.add((offsets[c1] + u, offsets[c2] + v))
                cross_edges += 1

    # Connectivity repair: one random bridge from every community still cut
    # off from the component containing community 0; bridges are counted and
    # reported so downstream densities can discount them.
    bridge_rng = np.random.default_rng(child_seed(spec.seed, _BRIDGE_STREAM))
    bridges = 0
    if k > 1:
        composed = from_edge_pairs(total, edges)
        members: dict[int, list[int]] = {}
        comp_of = {}
        for comp in connected_components(composed):
            members[comp[0]] = list(comp)
            for v in comp:
                comp_of[v] = comp[0]
        # Each block is connected, so one representative per community
        # suffices; one bridge merges that community's whole component.
        merged = {comp_of[0]}
        main = sorted(members[comp_of[0]])
        for c in range(1, k):
            rep = comp_of[offsets[c]]
            if rep in merged:
                continue
            u = int(bridge_rng.integers(offsets[c], offsets[c + 1]))
            v = main[int(bridge_rng.integers(0, len(main)))]
            edges.add((min(u, v), max(u, v)))
            bridges += 1
            merged.add(rep)
            main = sorted(main + members[rep])

    graph = from_edge_pairs(total, edges, community_of=labels)
    info = GenerationInfo(
        community_sizes=tuple(sizes),
        cross_pairs=cross_pairs,
        cross_edges=cross_edges,
        bridge_edges=bridges,
    )
    return graph, info


def generate(spec: GeneratorSpec) -> Graph:
    """Dispatch on spec.family."""
    graph, _ = generate_with_info(spec)
    return graph


def generate_with_info(spec: GeneratorSpec) -> tuple[Graph, GenerationInfo]:
    """Like generate(), also returning composition bookkeeping (zeros for
    non-composed families)."""
    spec.validate()
    if spec.family == "community":
        return compose_communities_with_info(spec)
    if spec.family == "complete":
        graph = gen_complete(spec.n)
    elif spec.family == "er":
        graph = gen_er(spec.n, spec.p, spec.seed)
    else:
        graph = gen_static_sf(spec.n, spec.gamma, spec.m, spec.seed)
    info = GenerationInfo(
        community_sizes=(graph.node_count,),
        cross_pairs=0,
        cross_edges=0,
        bridge_edges=0,
    )
    return graph, info


def spec_for_cell(spec: GeneratorSpec, **overrides) -> GeneratorSpec:
    """Copy of spec with some fields replaced (sweep plumbing)."""
    return replace(spec, **overrides)
