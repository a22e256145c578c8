"""Hypergraph data model, provenance rows and foundational structural queries."""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass
from typing import Iterable, Iterator, NamedTuple, Sequence

import numpy as np
import scipy.sparse as sp

from .errors import ContractError, IntegrityError, NodeNotFoundError


def canonical_label(label: str) -> str:
    """Trim surrounding whitespace; case and inner spacing are preserved."""
    if not isinstance(label, str):
        raise ContractError(f"node label must be a string, got {type(label).__name__}")
    out = label.strip()
    if not out:
        raise ContractError("node label is empty after trimming")
    return out


@dataclass(frozen=True)
class Hyperedge:
    id: int
    nodes: frozenset
    relation: str
    chunk_id: str

    def __post_init__(self):
        if len(self.nodes) < 2:
            raise ContractError(f"hyperedge {self.id} has fewer than two nodes")

    @property
    def size(self) -> int:
        return len(self.nodes)

    def sorted_nodes(self) -> list[str]:
        return sorted(self.nodes)


@dataclass(frozen=True)
class ProvenanceTriple:
    """One directed extraction row backing a hyperedge."""

    edge_id: int
    source: tuple
    target: tuple
    relation: str
    chunk_id: str

    def node_set(self) -> frozenset:
        return frozenset(self.source) | frozenset(self.target)

    def is_self_loop(self) -> bool:
        return set(self.source) == set(self.target)


class Hypergraph:
    """Multiset of labelled hyperedges with an exactly maintained inverted index.

    Edge ids are integers handed out in increasing order and never reused
    within one graph object. Duplicate node sets are allowed; each copy is a
    separate edge with its own provenance.
    """

    def __init__(self):
        self._edges: dict[int, Hyperedge] = {}
        self._index: dict[str, set[int]] = {}
        self._prov: dict[int, list[ProvenanceTriple]] = {}
        self.annotations: dict[str, set[str]] = {}
        self._next_id = 0
        self._version = 0
        self._cache: dict = {}

    # -- mutation ---------------------------------------------------------

    def add_edge(
        self,
        nodes: Iterable[str],
        relation: str,
        chunk_id: str,
        *,
        source: Sequence[str] | None = None,
        target: Sequence[str] | None = None,
        edge_id: int | None = None,
    ) -> Hyperedge:
        node_set = frozenset(canonical_label(n) for n in nodes)
        if edge_id is None:
            edge_id = self._next_id
        elif edge_id < self._next_id:
            raise ContractError(f"edge id {edge_id} is not fresh (next is {self._next_id})")
        edge = Hyperedge(edge_id, node_set, relation, chunk_id)
        row = None
        if source is not None or target is not None:
            row = ProvenanceTriple(edge_id, tuple(canonical_label(v) for v in source or ()),
                                   tuple(canonical_label(v) for v in target or ()), relation, chunk_id)
            _check_row(row, edge)
        self._edges[edge_id] = edge
        self._prov[edge_id] = [row] if row else []
        for v in node_set:
            self._index.setdefault(v, set()).add(edge_id)
        self._next_id = edge_id + 1
        self._touch()
        return edge

    def add_provenance(self, row: ProvenanceTriple) -> None:
        edge = self._edges.get(row.edge_id)
        if edge is None:
            raise IntegrityError(f"provenance row references missing edge {row.edge_id}")
        _check_row(row, edge)
        self._prov[row.edge_id].append(row)
        self._touch()

    def remove_edge(self, edge_id: int) -> Hyperedge:
        edge = self._edges.pop(edge_id)
        del self._prov[edge_id]
        for v in edge.nodes:
            posting = self._index[v]
            posting.discard(edge_id)
            if not posting:
                del self._index[v]
        self._touch()
        return edge

    def annotate(self, label: str, items: Iterable[str]) -> None:
        self.annotations.setdefault(label, set()).update(items)

    def _touch(self):
        self._version += 1
        self._cache.clear()

    # -- read access ------------------------------------------------------

    @property
    def nodes(self):
        """Live view of the node set (V is exactly the union of the edges)."""
        return self._index.keys()

    @property
    def edges(self) -> list[Hyperedge]:
        return list(self._edges.values())

    @property
    def next_edge_id(self) -> int:
        return self._next_id

    def iter_edges(self) -> Iterator[Hyperedge]:
        return iter(self._edges.values())

    def edge(self, edge_id: int) -> Hyperedge:
        try:
            return self._edges[edge_id]
        except KeyError:
            raise IntegrityError(f"unknown edge id {edge_id}") from None

    def has_edge(self, edge_id: int) -> bool:
        return edge_id in self._edges

    def edge_ids(self) -> list[int]:
        return list(self._edges)

    def edges_of(self, label: str) -> list[int]:
        """Sorted posting list of ``label``."""
        try:
            return sorted(self._index[label])
        except KeyError:
            raise NodeNotFoundError(label) from None

    def posting(self, label: str) -> set[int]:
        try:
            return self._index[label]
        except KeyError:
            raise NodeNotFoundError(label) from None

    def provenance_of(self, edge_id: int) -> list[ProvenanceTriple]:
        return list(self._prov[edge_id])

    @property
    def provenance(self) -> list[ProvenanceTriple]:
        return [row for eid in self._edges for row in self._prov[eid]]

    @property
    def num_nodes(self) -> int:
        return len(self._index)

    @property
    def num_edges(self) -> int:
        return len(self._edges)

    def __contains__(self, label) -> bool:
        return label in self._index

    def __len__(self) -> int:
        return len(self._edges)

    def __repr__(self) -> str:
        return f"Hypergraph(nodes={self.num_nodes}, edges={self.num_edges})"

    def require(self, labels: Iterable[str]) -> None:
        for v in labels:
            if v not in self._index:
                raise NodeNotFoundError(v)

    def cached(self, key, factory):
        """Memoise a derived structure until the next mutation."""
        if key not in self._cache:
            self._cache[key] = factory(self)
        return self._cache[key]

    def copy(self) -> "Hypergraph":
        out = Hypergraph()
        out._edges = dict(self._edges)
        out._index = {v: set(p) for v, p in self._index.items()}
        out._prov = {e: list(rows) for e, rows in self._prov.items()}
        out.annotations = {v: set(a) for v, a in self.annotations.items()}
        out._next_id = self._next_id
        return out

    def rebuild_index(self) -> dict[str, set[int]]:
        index: dict[str, set[int]] = {}
        for e in self._edges.values():
            for v in e.nodes:
                index.setdefault(v, set()).add(e.id)
        return index

    def check_invariants(self) -> None:
        if self.rebuild_index() != self._index:
            raise IntegrityError("inverted index is out of sync with the edge set")
        for eid, e in self._edges.items():
            rows = self._prov[eid]
            if not rows:
                raise IntegrityError(f"edge {eid} has no provenance")
            for row in rows:
                if row.node_set() != e.nodes:
                    raise IntegrityError(f"provenance of edge {eid} disagrees with its nodes")

    def same_content(self, other: "Hypergraph") -> bool:
        return (
            self._edges == other._edges
            and self._index == other._index
            and self._prov == other._prov
        )


def _check_row(row: ProvenanceTriple, edge: Hyperedge) -> None:
    if not row.source or not row.target:
        raise IntegrityError(f"provenance row for edge {row.edge_id} has an empty side")
    if row.node_set() != edge.nodes:
        raise IntegrityError(f"provenance row for edge {row.edge_id} does not cover its node set")


def degree(graph: Hypergraph, node: str) -> int:
    return len(graph.posting(node))


def volume(graph: Hypergraph, nodes: Iterable[str]) -> int:
    return sum(degree(graph, v) for v in nodes)


def induced_subhypergraph(graph: Hypergraph, nodes: Iterable[str]) -> Hypergraph:
    """H[S]: the edges fully contained in ``nodes``, with their provenance."""
    keep = set(nodes)
    graph.require(keep)
    candidates: set[int] = set()
    for v in keep:
        candidates |= graph.posting(v)
    return edge_subgraph(graph, (eid for eid in candidates if graph.edge(eid).nodes <= keep))


def edge_subgraph(graph: Hypergraph, edge_ids: Iterable[int]) -> Hypergraph:
    """Sub-hypergraph on the given edges, keeping ids, memberships and provenance."""
    out = Hypergraph()
    for eid in sorted(set(edge_ids)):
        e = graph.edge(eid)
        out.add_edge(e.nodes, e.relation, e.chunk_id, edge_id=eid)
        for row in graph.provenance_of(eid):
            out.add_provenance(row)
    for v in out.nodes:
        if v in graph.annotations:
            out.annotations[v] = set(graph.annotations[v])
    return out


class IncidenceMatrix(NamedTuple):
    edge_ids: list
    labels: list
    rows: np.ndarray
    cols: np.ndarray

    @property
    def shape(self) -> tuple[int, int]:
        return (len(self.edge_ids), len(self.labels))

    def triplets(self) -> list[tuple[int, int, int]]:
        return [(int(r), int(c), 1) for r, c in zip(self.rows, self.cols)]

    def to_scipy(self, dtype=np.int32) -> sp.csr_array:
        data = np.ones(len(self.rows), dtype=dtype)
        return sp.csr_array((data, (self.rows, self.cols)), shape=self.shape)


def incidence_matrix(graph: Hypergraph) -> IncidenceMatrix:
    """|E| x |V| 0/1 incidence; rows in edge-id order, columns in sorted label order."""
    labels = sorted(graph.nodes)
    col = {v: j for j, v in enumerate(labels)}
    edge_ids = graph.edge_ids()
    rows, cols = [], []
    for i, eid in enumerate(edge_ids):
        for v in graph.edge(eid).sorted_nodes():
            rows.append(i)
            cols.append(col[v])
    return IncidenceMatrix(edge_ids, labels, np.asarray(rows, dtype=np.int64), np.asarray(cols, dtype=np.int64))


def duplicate_edge_groups(graph: Hypergraph) -> list[tuple[frozenset, int]]:
    counts = Counter(e.nodes for e in graph.iter_edges())
    groups = [(nodes, n) for nodes, n in counts.items() if n >= 2]
    groups.sort(key=lambda g: sorted(g[0]))
    return groups


def duplicate_surplus(graph: Hypergraph) -> int:
    return sum(n - 1 for _, n in duplicate_edge_groups(graph))


def nested_pairs(graph: Hypergraph) -> list[tuple[int, int]]:
    """(inner, outer) edge-id pairs with inner.nodes a proper subset of outer.nodes."""
    out = []
    for inner in graph.iter_edges():
        postings = sorted((graph.posting(v) for v in inner.nodes), key=len)
        common = set(postings[0])
        for p in postings[1:]:
            common &= p
            if not common:
                break
        for oid in common:
            if graph.edge(oid).size > inner.size:
                out.append((inner.id, oid))
    out.sort()
    return out
