"""Embedding-based node merging with synchronized graph, provenance and store updates."""

from __future__ import annotations

import json
import logging
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from .core import Hypergraph, ProvenanceTriple, degree
from .embeddings import EmbeddingStore, call_provider, embed_into, vector_norms
from .errors import ContractError, SimilarityUndefinedError
from .unionfind import UnionFind

log = logging.getLogger(__name__)

# Slack for float rounding so that exactly colinear vectors pass theta = 1.0.
SIMILARITY_EPS = 1e-9


def cosine_similarity(u, v) -> float:
    u = np.asarray(u, dtype=np.float64).ravel()
    v = np.asarray(v, dtype=np.float64).ravel()
    if u.shape != v.shape:
        raise ContractError(f"dimension mismatch: {u.size} vs {v.size}")
    nu, nv = np.linalg.norm(u), np.linalg.norm(v)
    if nu == 0.0 or nv == 0.0:
        raise SimilarityUndefinedError("cosine similarity is undefined for a zero vector")
    return float(np.clip(np.dot(u, v) / (nu * nv), -1.0, 1.0))


def _unit_rows(store: EmbeddingStore, labels: Sequence[str]) -> np.ndarray:
    mat = store.matrix(labels)
    norms = vector_norms(mat)
    if np.any(norms == 0.0):
        bad = labels[int(np.flatnonzero(norms == 0.0)[0])]
        raise SimilarityUndefinedError(f"zero embedding for {bad!r}")
    return mat / norms[:, None]


def similarity_components(
    store: EmbeddingStore,
    candidates: Iterable[str],
    theta: float,
    *,
    against: Iterable[str] | None = None,
    max_class_size: int | None = None,
    block: int = 1024,
) -> list[frozenset]:
    """Connected components (size >= 2) of the graph of pairs with cosine >= theta.

    Pairs are formed among ``candidates`` and, when given, between candidates
    and ``against``. Components larger than ``max_class_size`` are left unmerged.
    """
    if not 0.0 < theta <= 1.0:
        raise ContractError(f"similarity threshold must lie in (0, 1], got {theta}")
    cand = sorted(set(candidates))
    pool = sorted(set(cand) | set(against or ()))
    if len(pool) < 2 or not cand:
        return []
    pos = {v: i for i, v in enumerate(pool)}
    unit = _unit_rows(store, pool)
    cand_idx = np.array([pos[v] for v in cand])
    uf = UnionFind(len(pool))
    cutoff = theta - SIMILARITY_EPS
    for start in range(0, len(cand_idx), block):
        rows = cand_idx[start:start + block]
        sims = unit[rows] @ unit.T
        r, c = np.nonzero(sims >= cutoff)
        keep = rows[r] != c
        uf.union_pairs(rows[r][keep], c[keep])
    classes = []
    for members in uf.groups():
        if len(members) < 2:
            continue
        if max_class_size is not None and len(members) > max_class_size:
            log.warning("similarity class of %d labels exceeds max_class_size=%d; left unmerged",
                        len(members), max_class_size)
            continue
        classes.append(frozenset(pool[i] for i in members))
    classes.sort(key=sorted)
    return classes


def select_representative(graph: Hypergraph, members: Iterable[str]) -> str:
    """Highest-degree member; ties go to the lexicographically smallest label."""
    members = list(members)
    if not members:
        raise ContractError("cannot pick a representative of an empty class")
    return min(members, key=lambda v: (-degree(graph, v), v))


@dataclass
class MergePlan:
    classes: list = field(default_factory=list)  # (representative, frozenset members)
    mapping: dict = field(default_factory=dict)

    @classmethod
    def from_classes(cls, graph: Hypergraph, classes: Iterable[Iterable[str]]) -> "MergePlan":
        plan = cls()
        for members in classes:
            members = frozenset(members)
            if len(members) < 2:
                continue
            rep = select_representative(graph, members)
            plan.classes.append((rep, members))
            for v in members:
                if v in plan.mapping:
                    raise ContractError(f"{v!r} appears in two merge classes")
                plan.mapping[v] = rep
        plan.classes.sort(key=lambda c: c[0])
        return plan

    @classmethod
    def from_mapping(cls, mapping: dict) -> "MergePlan":
        groups: dict[str, set] = {}
        for v, rep in mapping.items():
            groups.setdefault(rep, {rep}).add(v)
        plan = cls([(rep, frozenset(m)) for rep, m in sorted(groups.items())], {})
        for rep, members in plan.classes:
            for v in members:
                plan.mapping[v] = rep
        plan.validate()
        return plan

    def __bool__(self) -> bool:
        return bool(self.classes)

    def map(self, label: str) -> str:
        return self.mapping.get(label, label)

    def validate(self) -> None:
        seen = set()
        for rep, members in self.classes:
            if rep not in members:
                raise ContractError(f"representative {rep!r} is not in its class")
            if seen & members:
                raise ContractError("merge classes overlap")
            seen |= members
        for v, rep in self.mapping.items():
            if self.mapping.get(rep, rep) != rep:
                raise ContractError(f"mapping is not idempotent at {v!r}")


def _dedupe(labels) -> tuple:
    return tuple(dict.fromkeys(labels))


def apply_merge(graph: Hypergraph, store: EmbeddingStore | None, plan: MergePlan, provider=None):
    """Run the four synchronized merge operations and return ``(graph, store)``.

    Inputs are not modified. With a ``provider`` the representatives are
    re-embedded from their labels; the provider is called before anything is
    rewritten, so a failing provider leaves no partial merge behind.
    """
    plan.validate()
    if not plan:
        return graph.copy(), (store.copy() if store is not None else None)
    for rep, members in plan.classes:
        if rep not in graph and any(v in graph for v in members):
            raise ContractError(f"representative {rep!r} is not in the graph")

    reps = [rep for rep, _ in plan.classes]
    new_store = store.copy() if store is not None else None
    if provider is not None:
        vectors = call_provider(provider, reps)
        if new_store is None:
            new_store = EmbeddingStore(vectors.shape[1])

    sigma = plan.map
    out = Hypergraph()
    for e in graph.iter_edges():
        nodes = frozenset(sigma(v) for v in e.nodes)
        if len(nodes) < 2:
            continue
        rows = []
        for row in graph.provenance_of(e.id):
            src = _dedupe(sigma(v) for v in row.source)
            tgt = _dedupe(sigma(v) for v in row.target)
            if set(src) != set(tgt):
                rows.append(ProvenanceTriple(e.id, src, tgt, row.relation, row.chunk_id))
        if not rows:
            continue
        out.add_edge(nodes, e.relation, e.chunk_id, edge_id=e.id)
        for row in rows:
            out.add_provenance(row)
    out._next_id = max(out._next_id, graph.next_edge_id)

    # text aggregation: representatives inherit every member's annotations
    for v, notes in graph.annotations.items():
        target = sigma(v)
        if target in out:
            out.annotate(target, notes)

    if new_store is not None:
        for v, rep in plan.mapping.items():
            if v != rep:
                new_store.discard(v)
        if provider is not None:
            new_store.update(reps, vectors)
    return out, new_store


def merge_audit_rows(graph: Hypergraph, plan: MergePlan) -> list[dict]:
    """Audit rows computed against the pre-merge graph."""
    rows = []
    for rep, members in plan.classes:
        merged = sorted(v for v in members if v != rep)
        rows.append({
            "representative": rep,
            "merged": merged,
            "degrees": [degree(graph, v) if v in graph else 0 for v in merged],
        })
    return rows


def write_audit(rows: Iterable[dict], fh) -> None:
    for row in rows:
        fh.write(json.dumps(row, ensure_ascii=False) + "\n")


def dedup_pass(
    graph: Hypergraph,
    store: EmbeddingStore | None,
    candidates: Iterable[str],
    theta: float,
    provider=None,
    *,
    max_class_size: int | None = None,
):
    """embed -> similarity classes -> representatives -> synchronized merge.

    Returns ``(graph, store, plan)``; atomic with respect to provider failure.
    """
    cand = [v for v in candidates if v in graph]
    if not cand:
        return graph, store, MergePlan()
    # every current node must be comparable, not only those already cached
    work = store.copy() if store is not None else None
    work = embed_into(work, provider, cand + sorted(graph.nodes))
    against = [v for v in work.labels() if v in graph]
    classes = similarity_components(work, cand, theta, against=against, max_class_size=max_class_size)
    plan = MergePlan.from_classes(graph, classes)
    if not plan:
        return graph, work, plan
    new_graph, new_store = apply_merge(graph, work, plan, provider)
    return new_graph, new_store, plan


def incremental_dedup(
    graph: Hypergraph,
    store: EmbeddingStore | None,
    new_nodes: Iterable[str],
    theta: float,
    frequency: int,
    doc_index: int,
    provider=None,
    *,
    max_class_size: int | None = None,
):
    """Merge pass gated on document boundaries: runs only when doc_index % frequency == 0."""
    if frequency < 1:
        raise ContractError("merge frequency must be >= 1")
    if doc_index % frequency != 0:
        return graph, store, None
    return dedup_pass(graph, store, new_nodes, theta, provider, max_class_size=max_class_size)
