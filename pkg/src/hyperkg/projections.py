"""Dyadic projections of a hypergraph and pairwise reasoning-path primitives."""

from __future__ import annotations

import math
from collections import Counter, deque
from itertools import combinations
from typing import Callable, Iterable, Sequence

from .core import Hypergraph
from .errors import ContractError, IntegrityError, NodeNotFoundError, UnreachableError

UNREACHABLE = math.inf
EDGE_PREFIX = "edge:"


def _pair(a: str, b: str) -> tuple[str, str]:
    return (a, b) if a <= b else (b, a)


class PairwiseGraph:
    """Undirected simple graph whose pairs carry a multiplicity weight."""

    def __init__(self):
        self.nodes: set[str] = set()
        self.weights: Counter = Counter()
        self.node_kind: dict[str, str] = {}
        self.relations: dict[tuple[str, str], set[str]] = {}
        self._adj: dict[str, set[str]] | None = None

    def add_node(self, v: str, kind: str | None = None) -> None:
        self.nodes.add(v)
        if kind is not None:
            self.node_kind[v] = kind
        self._adj = None

    def add_pair(self, a: str, b: str, weight: int = 1, relation: str | None = None) -> None:
        if a == b:
            raise ContractError(f"self-loop pair on {a!r}")
        self.nodes.update((a, b))
        key = _pair(a, b)
        self.weights[key] += weight
        if relation is not None:
            self.relations.setdefault(key, set()).add(relation)
        self._adj = None

    @property
    def pairs(self) -> set[tuple[str, str]]:
        return set(self.weights)

    def __len__(self) -> int:
        return len(self.weights)

    def adjacency(self) -> dict[str, set[str]]:
        if self._adj is None:
            adj = {v: set() for v in self.nodes}
            for a, b in self.weights:
                adj[a].add(b)
                adj[b].add(a)
            self._adj = adj
        return self._adj

    def degree(self, v: str) -> int:
        return len(self.adjacency()[v])

    def edge_list(self) -> list[str]:
        """``a<TAB>b<TAB>weight`` lines, sorted."""
        return [f"{a}\t{b}\t{w}" for (a, b), w in sorted(self.weights.items())]


NodeOrder = Callable[[Iterable[str]], Sequence[str]]


def lexicographic(nodes: Iterable[str]) -> list[str]:
    return sorted(nodes)


def clique_expand(graph: Hypergraph) -> PairwiseGraph:
    out = PairwiseGraph()
    for e in graph.iter_edges():
        for v in e.nodes:
            out.add_node(v, "entity")
        for a, b in combinations(e.sorted_nodes(), 2):
            out.add_pair(a, b)
    return out


def edge_node(edge_id: int) -> str:
    return f"{EDGE_PREFIX}{edge_id}"


def star_expand(graph: Hypergraph) -> PairwiseGraph:
    """Bipartite incidence graph; hyperedges become ``edge:<id>`` nodes."""
    out = PairwiseGraph()
    for e in graph.iter_edges():
        en = edge_node(e.id)
        if en in graph:
            raise ContractError(f"entity label {en!r} collides with an edge-node name")
        out.add_node(en, "edge")
        for v in e.sorted_nodes():
            out.add_node(v, "entity")
            out.add_pair(v, en)
    return out


def group_label(members: Iterable[str]) -> str:
    return ", ".join(sorted(set(members)))


def collapse(graph: Hypergraph) -> PairwiseGraph:
    """One pair per provenance row: joined source group -- joined target group."""
    out = PairwiseGraph()
    for e in graph.iter_edges():
        rows = graph.provenance_of(e.id)
        if not rows:
            raise IntegrityError(f"edge {e.id} has no provenance to collapse")
        for row in rows:
            src, tgt = group_label(row.source), group_label(row.target)
            out.add_node(src, "group" if len(set(row.source)) > 1 else "entity")
            out.add_node(tgt, "group" if len(set(row.target)) > 1 else "entity")
            out.add_pair(src, tgt, relation=row.relation)
    return out


def _ring_or_chain(graph: Hypergraph, order: NodeOrder, closed: bool) -> PairwiseGraph:
    out = PairwiseGraph()
    for e in graph.iter_edges():
        seq = list(order(e.nodes))
        for v in seq:
            out.add_node(v, "entity")
        links = list(zip(seq, seq[1:]))
        if closed and len(seq) >= 3:
            links.append((seq[-1], seq[0]))
        for a, b in links:
            out.add_pair(a, b)
    return out


def cyclic_implicit(graph: Hypergraph, node_order: NodeOrder = lexicographic) -> PairwiseGraph:
    """Each edge becomes a ring over its ordered nodes; size-2 edges give one pair."""
    return _ring_or_chain(graph, node_order, closed=True)


def chain_implicit(graph: Hypergraph, node_order: NodeOrder = lexicographic) -> PairwiseGraph:
    return _ring_or_chain(graph, node_order, closed=False)


PROJECTIONS = {
    "clique": clique_expand,
    "star": star_expand,
    "collapsed": collapse,
    "cyclic": cyclic_implicit,
    "chain": chain_implicit,
}


def _bfs(pgraph: PairwiseGraph, s: str, limit: float = math.inf) -> dict[str, int]:
    adj = pgraph.adjacency()
    if s not in adj:
        raise NodeNotFoundError(s)
    dist = {s: 0}
    queue = deque([s])
    while queue:
        u = queue.popleft()
        if dist[u] >= limit:
            continue
        for w in adj[u]:
            if w not in dist:
                dist[w] = dist[u] + 1
                queue.append(w)
    return dist


def pairwise_distance(pgraph: PairwiseGraph, s: str, t: str):
    """Hop count of a shortest path, or ``UNREACHABLE`` (math.inf)."""
    if t not in pgraph.nodes:
        raise NodeNotFoundError(t)
    return _bfs(pgraph, s).get(t, UNREACHABLE)


def h_hop_neighborhood(pgraph: PairwiseGraph, s: str, h: int) -> set[str]:
    if h < 0:
        raise ContractError("h must be non-negative")
    return set(_bfs(pgraph, s, limit=h))


def shortest_path(pgraph: PairwiseGraph, s: str, t: str) -> list[str]:
    """The lexicographically smallest node sequence among shortest s-t paths."""
    if s not in pgraph.nodes:
        raise NodeNotFoundError(s)
    to_t = _bfs(pgraph, t)
    if s not in to_t:
        raise UnreachableError(s, t)
    adj = pgraph.adjacency()
    path = [s]
    while path[-1] != t:
        here = path[-1]
        path.append(min(w for w in adj[here] if to_t.get(w) == to_t[here] - 1))
    return path


def entity_path(pgraph: PairwiseGraph, node_list: Sequence[str]) -> set[tuple[str, str]]:
    """Union of one shortest path per consecutive pair, as a set of sorted pairs."""
    for v in node_list:
        if v not in pgraph.nodes:
            raise NodeNotFoundError(v)
    out: set[tuple[str, str]] = set()
    for s, t in zip(node_list, node_list[1:]):
        seq = shortest_path(pgraph, s, t)
        out.update(_pair(a, b) for a, b in zip(seq, seq[1:]))
    return out
