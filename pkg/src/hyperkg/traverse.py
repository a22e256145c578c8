"""Keyword anchoring and intersection-constrained shortest hyperpaths."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from .core import Hypergraph, edge_subgraph
from .embeddings import EmbeddingStore, call_provider
from .errors import ContractError, IntegrityError, ProviderError
from .index import CompiledIndex

DEFAULT_KEYWORD_DISTANCE = 1.5
SAME_NODE = "start and end are the same node"
UNREACHABLE = "no path satisfies the intersection constraint"


@dataclass
class KeywordMatch:
    keyword: str
    label: str | None
    distance: float
    matched: bool


def match_keywords(
    store: EmbeddingStore,
    keywords: Sequence[str],
    threshold: float = DEFAULT_KEYWORD_DISTANCE,
    provider=None,
) -> list[KeywordMatch]:
    """Nearest stored label per keyword by cosine distance (1 - cos, in [0, 2]).

    Keywords are embedded with ``provider``; without one, a keyword must
    already be a stored label. Distance ties go to the smaller label.
    """
    if len(store) == 0:
        raise ContractError("embedding store is empty")
    keywords = list(keywords)
    if any(not isinstance(k, str) or not k.strip() for k in keywords):
        raise ContractError("keywords must be non-empty strings")
    if not keywords:
        return []
    labels, unit = store.unit_matrix()
    if provider is not None:
        vecs = call_provider(provider, keywords)
        if vecs.shape != (len(keywords), store.dimension):
            raise ProviderError(f"provider returned shape {vecs.shape}, expected ({len(keywords)}, {store.dimension})")
    else:
        missing = [k for k in keywords if k not in store]
        if missing:
            raise ProviderError(f"no embedding provider configured and {missing[0]!r} is not a stored label")
        vecs = store.matrix(keywords)
    norms = np.linalg.norm(vecs, axis=1)
    out = []
    for kw, vec, norm in zip(keywords, vecs, norms):
        if norm == 0.0:
            out.append(KeywordMatch(kw, None, 2.0, False))
            continue
        dist = 1.0 - unit @ (vec / norm)
        best = int(np.argmin(dist))
        d = float(max(0.0, dist[best]))
        out.append(KeywordMatch(kw, labels[best], d, d <= threshold))
    return out


@dataclass(frozen=True)
class PathQuery:
    start: str
    end: str
    s: int = 1
    k: int = 1
    allow_longer: bool = False

    def __post_init__(self):
        if not isinstance(self.s, int) or self.s < 1:
            raise ContractError("intersection size S must be an integer >= 1")
        if not isinstance(self.k, int) or self.k < 1:
            raise ContractError("max paths K must be an integer >= 1")


@dataclass
class HyperPath:
    edges: tuple
    intersections: list  # sorted shared labels per adjacent edge pair
    start: str
    end: str

    @property
    def length(self) -> int:
        return len(self.edges)


@dataclass
class PathResult:
    paths: list = field(default_factory=list)
    minimal_length: int | None = None
    truncated: bool = False
    notice: str | None = None


def _gather(indptr: np.ndarray, indices: np.ndarray, rows: np.ndarray) -> np.ndarray:
    """Concatenate CSR rows ``rows`` without a Python-level loop."""
    if len(rows) == 0:
        return indices[:0]
    starts = indptr[rows]
    lens = indptr[rows + 1] - starts
    total = int(lens.sum())
    if total == 0:
        return indices[:0]
    offsets = np.repeat(starts - np.concatenate(([0], np.cumsum(lens)[:-1])), lens)
    return indices[offsets + np.arange(total)]


class _Search:
    """Per-query state: BFS depths over edge positions and the pruned layer DAG."""

    def __init__(self, idx: CompiledIndex, s: int):
        self.idx = idx
        self.s = s
        en, ne = idx.edge_nodes, idx.node_edges
        self.e_ptr, self.e_idx = en.indptr, en.indices
        self.n_ptr, self.n_idx = ne.indptr, ne.indices
        self.depth = np.full(idx.num_edges, -1, dtype=np.int32)
        self.node_seen = np.zeros(idx.num_nodes, dtype=bool)
        self.levels: list[np.ndarray] = []

    def seed(self, start: int) -> None:
        first = self.n_idx[self.n_ptr[start]:self.n_ptr[start + 1]].copy()
        self.depth[first] = 0
        self.levels.append(first)

    def _linked(self, edges: np.ndarray, allowed: np.ndarray) -> np.ndarray:
        """Edges e' with allowed[e'] sharing >= s nodes with some edge in ``edges``."""
        if self.s == 1:
            nodes = np.unique(_gather(self.e_ptr, self.e_idx, edges))
            cand = _gather(self.n_ptr, self.n_idx, nodes)
            return np.unique(cand[allowed[cand]])
        hits = []
        n_e = self.idx.num_edges
        for chunk in np.array_split(edges, max(1, len(edges) // 256)):
            if len(chunk) == 0:
                continue
            sizes = self.e_ptr[chunk + 1] - self.e_ptr[chunk]
            nodes = _gather(self.e_ptr, self.e_idx, chunk)
            owner = np.repeat(np.arange(len(chunk)), sizes)
            degs = self.n_ptr[nodes + 1] - self.n_ptr[nodes]
            cand = _gather(self.n_ptr, self.n_idx, nodes)
            keys = np.repeat(owner, degs).astype(np.int64) * n_e + cand
            keys = keys[allowed[cand]]
            uniq, counts = np.unique(keys, return_counts=True)
            hits.append(uniq[counts >= self.s] % n_e)
        if not hits:
            return edges[:0]
        return np.unique(np.concatenate(hits))

    def expand(self) -> np.ndarray:
        """Add the next BFS level; returns it (possibly empty)."""
        frontier = self.levels[-1]
        d = len(self.levels)
        if self.s == 1:
            nodes = np.unique(_gather(self.e_ptr, self.e_idx, frontier))
            nodes = nodes[~self.node_seen[nodes]]
            self.node_seen[nodes] = True
            cand = _gather(self.n_ptr, self.n_idx, nodes)
            nxt = np.unique(cand[self.depth[cand] < 0])
        else:
            nxt = self._linked(frontier, self.depth < 0)
        self.depth[nxt] = d
        self.levels.append(nxt)
        return nxt

    def useful_layers(self, last: np.ndarray) -> list[np.ndarray]:
        """Walk back from ``last`` (edges at depth len-1) keeping edges that reach it."""
        layers = [last]
        for d in range(len(self.levels) - 2, -1, -1):
            allowed = self.depth == d
            layers.append(self._linked(layers[-1], allowed))
        layers.reverse()
        return layers

    def children(self, e: int, allowed: np.ndarray) -> np.ndarray:
        nodes = self.e_idx[self.e_ptr[e]:self.e_ptr[e + 1]]
        cand = _gather(self.n_ptr, self.n_idx, nodes)
        cand = cand[allowed[cand]]
        if self.s == 1:
            return np.unique(cand)
        uniq, counts = np.unique(cand, return_counts=True)
        return uniq[counts >= self.s]


def _enumerate(search: _Search, layers: list[np.ndarray], limit: int) -> list[tuple[int, ...]]:
    """Lexicographically smallest ``limit`` paths through the layer DAG."""
    masks = []
    for layer in layers:
        m = np.zeros(search.idx.num_edges, dtype=bool)
        m[layer] = True
        masks.append(m)
    out: list[tuple[int, ...]] = []
    last = len(layers) - 1

    def walk(prefix):
        if len(out) >= limit:
            return
        i = len(prefix) - 1
        if i == last:
            out.append(tuple(prefix))
            return
        for c in search.children(prefix[-1], masks[i + 1]).tolist():
            walk(prefix + [c])
            if len(out) >= limit:
                return

    for e in np.sort(layers[0]).tolist():
        walk([e])
        if len(out) >= limit:
            break
    return out


def shortest_hyperpaths(graph: Hypergraph, query: PathQuery) -> PathResult:
    """All minimal-length hyperedge paths from start to end (at most K).

    Consecutive edges must share >= S nodes; the first edge holds ``start`` and
    the last holds ``end``. Paths come in lexicographic order of edge ids.
    With ``allow_longer`` the search continues to deeper tiers until K
    paths are collected.
    """
    idx = CompiledIndex.of(graph)
    sv, tv = idx.node(query.start), idx.node(query.end)
    if sv == tv:
        return PathResult(notice=SAME_NODE)
    search = _Search(idx, query.s)
    search.seed(sv)
    targets = np.zeros(idx.num_edges, dtype=bool)
    targets[idx.edges_of(tv)] = True

    found: list[tuple[int, ...]] = []
    minimal = None
    truncated = False
    while len(search.levels[-1]):
        level = search.levels[-1]
        hit = level[targets[level]]
        if len(hit):
            want = query.k - len(found)
            layers = search.useful_layers(np.sort(hit))
            batch = _enumerate(search, layers, want + 1)
            truncated = len(batch) > want
            found.extend(batch[:want])
            if minimal is None:
                minimal = len(search.levels)
            if len(found) >= query.k or not query.allow_longer:
                break
        search.expand()
    if minimal is None:
        return PathResult(notice=UNREACHABLE)
    paths = [_to_path(idx, seq, query) for seq in found]
    return PathResult(paths, minimal, truncated)


def _to_path(idx: CompiledIndex, seq: tuple[int, ...], query: PathQuery) -> HyperPath:
    inter = []
    for a, b in zip(seq, seq[1:]):
        shared = np.intersect1d(idx.nodes_of(a), idx.nodes_of(b), assume_unique=True)
        inter.append([idx.labels[i] for i in shared.tolist()])
    return HyperPath(tuple(int(idx.edge_ids[p]) for p in seq), inter, query.start, query.end)


def induced_path_subgraph(graph: Hypergraph, paths: Iterable[HyperPath]) -> Hypergraph:
    return edge_subgraph(graph, {eid for p in paths for eid in p.edges})


def statement(source: Sequence[str], relation: str, target: Sequence[str]) -> str:
    return f"{', '.join(source)} {relation} {', '.join(target)}."


def reconstruct_statements(graph: Hypergraph, path_or_subgraph) -> list[str]:
    """Provenance sentences, one per row, in path order (or edge-id order)."""
    if isinstance(path_or_subgraph, HyperPath):
        edge_ids = list(path_or_subgraph.edges)
    elif isinstance(path_or_subgraph, Hypergraph):
        edge_ids = sorted(path_or_subgraph.edge_ids())
    else:
        edge_ids = list(path_or_subgraph)
    out = []
    for eid in edge_ids:
        rows = graph.provenance_of(eid) if graph.has_edge(eid) else []
        if not rows:
            raise IntegrityError(f"edge {eid} has no provenance rows")
        out.extend(statement(r.source, r.relation, r.target) for r in rows)
    return out


def result_payload(graph: Hypergraph, result: PathResult) -> dict:
    payload = {
        "paths": [
            {
                "edges": list(p.edges),
                "intersections": p.intersections,
                "statements": reconstruct_statements(graph, p),
            }
            for p in result.paths
        ],
        "minimal_length": result.minimal_length,
        "truncated": result.truncated,
    }
    if result.notice:
        payload["notice"] = result.notice
    return payload
