"""Incremental construction loop: per-document build, union, and gated merging."""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Iterable

from .core import Hypergraph
from .dedup import incremental_dedup, merge_audit_rows
from .embeddings import EmbeddingStore
from .ingest import ExtractionEvent, build_document_hypergraph, group_by_document, merge_into_global

log = logging.getLogger(__name__)


@dataclass
class GraphBuilder:
    """Single-writer builder. ``graph`` is replaced (never edited) by merge passes."""

    theta: float = 0.95
    frequency: int = 10
    provider: object = None
    max_class_size: int | None = None
    graph: Hypergraph = field(default_factory=Hypergraph)
    store: EmbeddingStore | None = None
    documents_seen: int = 0
    audit: list = field(default_factory=list)
    _pending: set = field(default_factory=set)

    def add_document(self, events: Iterable[ExtractionEvent]) -> None:
        doc = build_document_hypergraph(events)
        known = set(self.graph.nodes)
        merge_into_global(self.graph, doc, inplace=True)
        self._pending.update(v for v in doc.nodes if v not in known)
        self.documents_seen += 1
        if self.provider is None:
            return
        graph, store, plan = incremental_dedup(
            self.graph, self.store, sorted(self._pending), self.theta, self.frequency,
            self.documents_seen, self.provider, max_class_size=self.max_class_size,
        )
        if plan is None:
            return
        if plan:
            self.audit.extend(merge_audit_rows(self.graph, plan))
            log.info("document %d: merged %d classes", self.documents_seen, len(plan.classes))
        self.graph, self.store = graph, store
        self._pending.clear()

    def add_events(self, events: Iterable[ExtractionEvent]) -> None:
        for _, doc_events in group_by_document(events).items():
            self.add_document(doc_events)


def build_graph(events: Iterable[ExtractionEvent], provider=None, *, theta=0.95, frequency=10,
                base: Hypergraph | None = None, store: EmbeddingStore | None = None,
                max_class_size=None) -> GraphBuilder:
    builder = GraphBuilder(theta=theta, frequency=frequency, provider=provider,
                           max_class_size=max_class_size,
                           graph=base.copy() if base is not None else Hypergraph(), store=store)
    builder.add_events(events)
    return builder
