"""Corpus-level structural analyses over an immutable hypergraph snapshot."""

from __future__ import annotations

import logging
import warnings
from collections import Counter
from dataclasses import asdict, dataclass, field
from itertools import combinations
from typing import Iterable, Iterator, Mapping

import numpy as np

from .core import Hypergraph, degree, duplicate_surplus
from .errors import ContractError, EmptyGraphError, InsufficientDataError
from .index import CompiledIndex
from .unionfind import UnionFind

log = logging.getLogger(__name__)

DEFAULT_PAIR_BUDGET = 5_000_000
OVERLAP_THRESHOLDS = (1, 2, 3)


def _require_nonempty(graph: Hypergraph) -> None:
    if graph.num_edges == 0:
        raise EmptyGraphError("operation needs a graph with at least one edge")


@dataclass
class GraphStats:
    node_count: int
    edge_count: int
    avg_edge_size: float
    max_edge_size: int
    avg_node_degree: float
    max_node_degree: int
    max_pairwise_edge_intersection: int
    duplicate_surplus: int
    overlap_pair_counts: dict = field(default_factory=dict)


def summary_stats(graph: Hypergraph, *, pair_budget: int = DEFAULT_PAIR_BUDGET,
                  thresholds: Iterable[int] = OVERLAP_THRESHOLDS) -> GraphStats:
    _require_nonempty(graph)
    idx = CompiledIndex.of(graph)
    incidences = int(idx.edge_sizes.sum())
    return GraphStats(
        node_count=idx.num_nodes,
        edge_count=idx.num_edges,
        avg_edge_size=incidences / idx.num_edges,
        max_edge_size=int(idx.edge_sizes.max()),
        avg_node_degree=incidences / idx.num_nodes,
        max_node_degree=int(idx.degrees.max()),
        max_pairwise_edge_intersection=max_edge_intersection(graph, pair_budget=pair_budget),
        duplicate_surplus=duplicate_surplus(graph),
        overlap_pair_counts=overlap_pair_counts(graph, thresholds, pair_budget=pair_budget),
    )


def max_edge_intersection(graph: Hypergraph, *, pair_budget: int = DEFAULT_PAIR_BUDGET) -> int:
    """Largest |e & f| over pairs of distinct edge ids (duplicates included).

    Works down through size tiers: once the best overlap found among edges of
    size >= k reaches k - 1, no pair involving a smaller edge can beat it.
    """
    idx = CompiledIndex.of(graph)
    if idx.num_edges < 2:
        return 0
    sizes = idx.edge_sizes
    best = 0
    for k in sorted(set(sizes.tolist()), reverse=True):
        if best >= k:
            break
        rows = np.flatnonzero(sizes >= k)
        if len(rows) < 2:
            continue
        for offset, block in idx.overlap_blocks(rows, budget=pair_budget):
            coo = block.tocoo()
            off_diag = coo.row + offset != coo.col
            if off_diag.any():
                best = max(best, int(coo.data[off_diag].max()))
        if best >= k - 1:
            break
    return best


class CoOccurrence:
    """Unordered node pairs sharing >= ``min_overlap`` edges (duplicates counted).

    ``count`` is one streaming pass; iterating is a second pass yielding
    ``((a, b), n)`` with a < b, never holding more than one block of pairs.
    """

    def __init__(self, graph: Hypergraph, min_overlap: int = 1, *, pair_budget: int = DEFAULT_PAIR_BUDGET):
        if min_overlap < 1:
            raise ContractError("min_overlap must be >= 1")
        self.graph = graph
        self.min_overlap = min_overlap
        self.pair_budget = pair_budget
        self._count = None

    def _upper(self):
        if self.graph.num_edges == 0:
            return
        idx = CompiledIndex.of(self.graph)
        for offset, block in idx.cooccurrence_blocks(self.pair_budget):
            coo = block.tocoo()
            rows = coo.row + offset
            keep = (coo.col > rows) & (coo.data >= self.min_overlap)
            yield idx, rows[keep], coo.col[keep], coo.data[keep]

    @property
    def count(self) -> int:
        if self._count is None:
            self._count = sum(len(r) for _, r, _, _ in self._upper())
        return self._count

    def __iter__(self) -> Iterator[tuple[tuple[str, str], int]]:
        for idx, rows, cols, data in self._upper():
            order = np.lexsort((cols, rows))
            labels = idx.labels
            for r, c, n in zip(rows[order].tolist(), cols[order].tolist(), data[order].tolist()):
                yield (labels[r], labels[c]), n


def co_occurrence_pairs(graph: Hypergraph, min_overlap: int = 1, *,
                        pair_budget: int = DEFAULT_PAIR_BUDGET) -> CoOccurrence:
    return CoOccurrence(graph, min_overlap, pair_budget=pair_budget)


def overlap_pair_counts(graph: Hypergraph, thresholds: Iterable[int] = OVERLAP_THRESHOLDS, *,
                        pair_budget: int = DEFAULT_PAIR_BUDGET) -> dict[int, int]:
    thresholds = sorted(set(thresholds))
    counts = {t: 0 for t in thresholds}
    for _, _, _, data in CoOccurrence(graph, 1, pair_budget=pair_budget)._upper():
        for t in thresholds:
            counts[t] += int(np.count_nonzero(data >= t))
    return counts


@dataclass
class DegreeDistribution:
    histogram: dict  # degree -> number of nodes
    ccdf: list  # (degree, fraction of nodes with degree >= it), ascending degree

    @property
    def node_count(self) -> int:
        return sum(self.histogram.values())


def degree_distribution(graph: Hypergraph) -> DegreeDistribution:
    _require_nonempty(graph)
    hist = Counter(len(graph.posting(v)) for v in graph.nodes)
    return distribution_from_histogram(hist)


def distribution_from_histogram(hist: Mapping[int, int]) -> DegreeDistribution:
    degrees = sorted(d for d, n in hist.items() if n > 0)
    total = sum(hist[d] for d in degrees)
    ccdf, remaining = [], total
    for d in degrees:
        ccdf.append((d, remaining / total))
        remaining -= hist[d]
    return DegreeDistribution({d: hist[d] for d in degrees}, ccdf)


@dataclass
class PowerLawFit:
    slope_magnitude: float
    r_squared: float
    points_used: int
    intercept: float = 0.0


def powerlaw_fit(distribution) -> PowerLawFit:
    """OLS line through (log10 degree, log10 frequency) of the raw histogram.

    A perfect fit (zero residual), including a flat histogram, reports R^2 = 1.
    """
    hist = distribution.histogram if isinstance(distribution, DegreeDistribution) else distribution
    points = sorted((d, n) for d, n in hist.items() if n >= 1 and d >= 1)
    if len(points) < 3:
        raise InsufficientDataError(f"power-law fit needs >= 3 distinct degrees, got {len(points)}")
    x = np.log10([d for d, _ in points])
    y = np.log10([n for _, n in points])
    xm, ym = x.mean(), y.mean()
    sxx = np.sum((x - xm) ** 2)
    slope = np.sum((x - xm) * (y - ym)) / sxx
    intercept = ym - slope * xm
    ss_res = np.sum((y - (intercept + slope * x)) ** 2)
    ss_tot = np.sum((y - ym) ** 2)
    if ss_res <= 1e-24 * max(1.0, len(points)):
        r2 = 1.0
    else:
        r2 = float(max(0.0, 1.0 - ss_res / ss_tot))
    return PowerLawFit(abs(float(slope)), r2, len(points), float(intercept))


def _neighbor_counts(graph: Hypergraph, v: str) -> Counter:
    counts: Counter = Counter()
    for eid in graph.posting(v):
        for u in graph.edge(eid).nodes:
            if u != v:
                counts[u] += 1
    return counts


def neighbor_density(graph: Hypergraph, neighbors: set) -> float:
    """Fraction of neighbor pairs that co-occur in at least one edge."""
    n = len(neighbors)
    if n < 2:
        return 0.0
    linked = 0
    for a in neighbors:
        seen = set()
        for eid in graph.posting(a):
            for b in graph.edge(eid).nodes:
                if b > a and b in neighbors:
                    seen.add(b)
        linked += len(seen)
    return 2.0 * linked / (n * (n - 1))


@dataclass
class HubRow:
    label: str
    degree: int
    pct_of_edges: float
    unique_neighbors: int
    neighbor_density: float
    top_cooccurring: list


@dataclass
class HubReport:
    rows: list
    notice: str | None = None


def top_nodes(graph: Hypergraph, n: int) -> list[str]:
    """Highest-degree labels, ties broken alphabetically."""
    ranked = sorted(graph.nodes, key=lambda v: (-len(graph.posting(v)), v))
    return ranked[:n]


def hub_report(graph: Hypergraph, top_n: int = 20, cooccur_top_k: int = 3) -> HubReport:
    if top_n < 1:
        raise ContractError("top_n must be >= 1")
    _require_nonempty(graph)
    notice = None
    if top_n > graph.num_nodes:
        notice = f"top_n={top_n} exceeds node count {graph.num_nodes}; clipped"
        log.warning(notice)
    rows = []
    for v in top_nodes(graph, top_n):
        counts = _neighbor_counts(graph, v)
        top = sorted(counts.items(), key=lambda kv: (-kv[1], kv[0]))[:cooccur_top_k]
        deg = degree(graph, v)
        rows.append(HubRow(
            label=v,
            degree=deg,
            pct_of_edges=deg / graph.num_edges,
            unique_neighbors=len(counts),
            neighbor_density=neighbor_density(graph, set(counts)),
            top_cooccurring=[list(t) for t in top],
        ))
    return HubReport(rows, notice)


def hub_integration(graph: Hypergraph, hubs: Iterable[str]) -> dict[str, int]:
    """Per hub, the total number of co-occurrences with the other hubs."""
    hub_set = set(hubs)
    if len(hub_set) < 2:
        raise ContractError("hub integration needs at least two hubs")
    graph.require(hub_set)
    scores = {}
    for h in sorted(hub_set):
        total = 0
        for eid in graph.posting(h):
            total += sum(1 for u in graph.edge(eid).nodes if u != h and u in hub_set)
        scores[h] = total
    return scores


def rich_club_coefficient(hub_count: int, hub_edge_count: int) -> float:
    """2 E_k / (N_k (N_k - 1)); zero when fewer than two hubs."""
    if hub_count < 2:
        return 0.0
    return 2.0 * hub_edge_count / (hub_count * (hub_count - 1))


@dataclass
class RichClubReport:
    degree_threshold: int
    hub_count: int
    hub_edge_count: int
    coefficient: float


def rich_club(graph: Hypergraph, k: int) -> RichClubReport:
    """Hubs are nodes with degree >= k; a hub pair counts once if it co-occurs at all."""
    if k < 1:
        raise ContractError("degree threshold must be >= 1")
    hubs = {v for v in graph.nodes if len(graph.posting(v)) >= k}
    pairs = set()
    for e in graph.iter_edges():
        members = sorted(v for v in e.nodes if v in hubs)
        if len(members) >= 2:
            pairs.update(combinations(members, 2))
    return RichClubReport(k, len(hubs), len(pairs), rich_club_coefficient(len(hubs), len(pairs)))


@dataclass
class SComponentReport:
    s: int
    component_count: int
    component_sizes: list
    components: list = field(default_factory=list, repr=False)

    def to_dict(self) -> dict:
        return {"s": self.s, "component_count": self.component_count,
                "component_sizes": list(self.component_sizes)}


def s_components(graph: Hypergraph, s: int, *, include_singletons: bool = False,
                 pair_budget: int = DEFAULT_PAIR_BUDGET) -> SComponentReport:
    """Components of hyperedges linked through chains of >= s shared nodes.

    Candidate pairs come from the inverted index only: for s = 1 consecutive
    entries of each posting list are united; for s >= 2 overlaps are counted
    blockwise over edges of size >= s. Isolated edges are dropped unless
    ``include_singletons``.
    """
    if s < 1:
        raise ContractError("s must be >= 1")
    idx = CompiledIndex.of(graph)
    uf = UnionFind(idx.num_edges)
    if s == 1:
        post = idx.node_edges
        for v in range(idx.num_nodes):
            p = post.indices[post.indptr[v]:post.indptr[v + 1]]
            if len(p) > 1:
                uf.union_pairs(p[:-1], p[1:])
    else:
        rows = np.flatnonzero(idx.edge_sizes >= s)
        if len(rows) >= 2:
            for offset, block in idx.overlap_blocks(rows, budget=pair_budget):
                coo = block.tocoo()
                r = coo.row + offset
                keep = (coo.col > r) & (coo.data >= s)
                uf.union_pairs(rows[r[keep]], rows[coo.col[keep]])
    comps = []
    for members in uf.groups():
        if len(members) < 2 and not include_singletons:
            continue
        comps.append(sorted(int(idx.edge_ids[m]) for m in members))
    comps.sort(key=lambda c: (-len(c), c[0]))
    return SComponentReport(s, len(comps), [len(c) for c in comps], comps)


@dataclass
class SignatureTable:
    labels: list
    features: np.ndarray  # columns: degree, unique_neighbors, avg_incident_edge_size
    standardized: np.ndarray

    COLUMNS = ("degree", "unique_neighbors", "avg_edge_size")

    def rows(self, standardized: bool = False) -> Iterator[tuple]:
        mat = self.standardized if standardized else self.features
        for label, row in zip(self.labels, mat):
            yield (label, *row.tolist())


def standardize(features: np.ndarray) -> np.ndarray:
    """Z-score each column with the population std; constant columns become zeros."""
    features = np.asarray(features, dtype=np.float64)
    mean = features.mean(axis=0)
    std = features.std(axis=0)
    out = np.zeros_like(features)
    for j in range(features.shape[1]):
        if std[j] == 0.0:
            warnings.warn(f"feature column {j} has zero variance; standardized to zeros", RuntimeWarning)
        else:
            out[:, j] = (features[:, j] - mean[j]) / std[j]
    return out


def structural_signatures(graph: Hypergraph, *, pair_budget: int = DEFAULT_PAIR_BUDGET) -> SignatureTable:
    _require_nonempty(graph)
    idx = CompiledIndex.of(graph)
    uniq = np.zeros(idx.num_nodes, dtype=np.int64)
    for offset, block in idx.cooccurrence_blocks(pair_budget):
        uniq[offset:offset + block.shape[0]] = np.diff(block.indptr) - 1
    deg = idx.degrees.astype(np.float64)
    avg_size = np.asarray(idx.node_edges @ idx.edge_sizes.astype(np.float64)).ravel() / deg
    features = np.column_stack([deg, uniq.astype(np.float64), avg_size])
    return SignatureTable(list(idx.labels), features, standardize(features))


def to_jsonable(obj, digits: int = 6):
    """Dataclass -> plain JSON types with floats rounded to ``digits`` places."""
    if hasattr(obj, "to_dict"):
        obj = obj.to_dict()
    elif hasattr(obj, "__dataclass_fields__"):
        obj = asdict(obj)
    if isinstance(obj, dict):
        return {str(k): to_jsonable(v, digits) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [to_jsonable(v, digits) for v in obj]
    if isinstance(obj, (float, np.floating)):
        return round(float(obj), digits)
    if isinstance(obj, np.integer):
        return int(obj)
    return obj

