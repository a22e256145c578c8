"""Extraction events in, document hypergraphs out, unioned into a global graph."""

from __future__ import annotations

import json
import re
import urllib.error
import urllib.request
from dataclasses import dataclass
from typing import Iterable, Sequence

from .core import Hypergraph, ProvenanceTriple
from .errors import EventError, ProviderError

MAX_CHUNK_CHARS = 10_000
_CHUNK_ID = re.compile(r"^(?P<doc>.+)#(?P<index>\d+)$")


@dataclass(frozen=True)
class ExtractionEvent:
    source: tuple
    target: tuple
    relation: str
    chunk_id: str

    @property
    def nodes(self) -> frozenset:
        return frozenset(self.source) | frozenset(self.target)

    @property
    def document_id(self) -> str:
        return split_chunk_id(self.chunk_id)[0]

    @classmethod
    def from_record(cls, record, line=None) -> "ExtractionEvent":
        """Validate one decoded JSON object; extra keys are ignored."""
        if not isinstance(record, dict):
            raise EventError("event is not a JSON object", line)
        source = _labels(record.get("source"), "source", line)
        target = _labels(record.get("target"), "target", line)
        relation = record.get("relation")
        if not isinstance(relation, str) or not relation.strip():
            raise EventError("relation must be a non-empty string", line)
        chunk_id = record.get("chunk_id")
        if not isinstance(chunk_id, str) or not chunk_id.strip():
            raise EventError("chunk_id must be a non-empty string", line)
        chunk_id = chunk_id.strip()
        if not _CHUNK_ID.match(chunk_id):
            raise EventError(f"chunk_id {chunk_id!r} is not of the form <doc>#<index>", line)
        if len(set(source) | set(target)) < 2:
            raise EventError("source and target together name fewer than two distinct entities", line)
        if set(source) == set(target):
            raise EventError("source and target are the same entity set", line)
        return cls(source, target, relation.strip(), chunk_id)

    def to_record(self) -> dict:
        return {
            "source": list(self.source),
            "target": list(self.target),
            "relation": self.relation,
            "chunk_id": self.chunk_id,
        }


def _labels(value, side, line) -> tuple:
    if not isinstance(value, list) or not value:
        raise EventError(f"{side} must be a non-empty list of entity labels", line)
    out = []
    for item in value:
        if not isinstance(item, str) or not item.strip():
            raise EventError(f"{side} contains an empty or non-string label", line)
        out.append(item.strip())
    return tuple(out)


def split_chunk_id(chunk_id: str) -> tuple[str, int]:
    m = _CHUNK_ID.match(chunk_id)
    if m is None:
        raise EventError(f"chunk_id {chunk_id!r} is not of the form <doc>#<index>")
    return m.group("doc"), int(m.group("index"))


@dataclass(frozen=True)
class ChunkRecord:
    document_id: str
    chunk_index: int
    start: int
    end: int

    @property
    def chunk_id(self) -> str:
        return f"{self.document_id}#{self.chunk_index}"


def validate_chunks(records: Sequence[ChunkRecord]) -> None:
    """Chunks of each document must tile it contiguously, at most 10,000 chars each."""
    by_doc: dict[str, list[ChunkRecord]] = {}
    for r in records:
        by_doc.setdefault(r.document_id, []).append(r)
    for doc, chunks in by_doc.items():
        chunks.sort(key=lambda c: c.chunk_index)
        expected_start = 0
        for i, c in enumerate(chunks):
            if c.chunk_index != i:
                raise EventError(f"{doc}: chunk indices are not 0..n-1")
            if c.start != expected_start:
                raise EventError(f"{doc}#{i}: chunk starts at {c.start}, expected {expected_start}")
            if not 0 < c.end - c.start <= MAX_CHUNK_CHARS:
                raise EventError(f"{doc}#{i}: chunk length {c.end - c.start} outside 1..{MAX_CHUNK_CHARS}")
            expected_start = c.end


def parse_events(stream: Iterable[str], *, skip_invalid=False, rejected=None) -> list[ExtractionEvent]:
    """Parse newline-delimited JSON events, keeping stream order.

    With ``skip_invalid`` bad lines are dropped (and appended to ``rejected``
    if given); otherwise the first bad line raises ``EventError``.
    """
    events = []
    for lineno, line in enumerate(stream, start=1):
        if not line.strip():
            continue
        try:
            try:
                record = json.loads(line)
            except json.JSONDecodeError as exc:
                raise EventError(f"malformed JSON: {exc.msg}", lineno) from None
            events.append(ExtractionEvent.from_record(record, lineno))
        except EventError as err:
            if not skip_invalid:
                raise
            if rejected is not None:
                rejected.append(err)
    return events


def group_by_document(events: Iterable[ExtractionEvent]) -> dict[str, list[ExtractionEvent]]:
    """Documents in order of first appearance, events in stream order."""
    docs: dict[str, list[ExtractionEvent]] = {}
    for ev in events:
        docs.setdefault(ev.document_id, []).append(ev)
    return docs


def build_document_hypergraph(events: Iterable[ExtractionEvent]) -> Hypergraph:
    graph = Hypergraph()
    for ev in events:
        edge = graph.add_edge(ev.nodes, ev.relation, ev.chunk_id, source=ev.source, target=ev.target)
        for v in edge.nodes:
            graph.annotate(v, (ev.chunk_id,))
    return graph


def merge_into_global(global_graph: Hypergraph, document: Hypergraph, *, inplace=False) -> Hypergraph:
    """V <- V | V_i, E <- E + E_i (fresh ids, duplicates kept), provenance appended."""
    out = global_graph if inplace else global_graph.copy()
    for e in sorted(document.iter_edges(), key=lambda e: e.id):
        new = out.add_edge(e.nodes, e.relation, e.chunk_id)
        for row in document.provenance_of(e.id):
            out.add_provenance(ProvenanceTriple(new.id, row.source, row.target, row.relation, row.chunk_id))
    for v, notes in document.annotations.items():
        out.annotate(v, notes)
    return out


class ExtractorClient:
    """Pass-through client for an external ``POST /extract`` service."""

    def __init__(self, base_url: str, timeout: float = 120.0):
        self.base_url = base_url.rstrip("/")
        self.timeout = timeout

    def extract(self, chunk_id: str, text: str) -> list[ExtractionEvent]:
        body = json.dumps({"chunk_id": chunk_id, "text": text}).encode("utf-8")
        req = urllib.request.Request(
            self.base_url + "/extract", data=body, headers={"Content-Type": "application/json"}
        )
        try:
            with urllib.request.urlopen(req, timeout=self.timeout) as resp:
                payload = json.loads(resp.read().decode("utf-8"))
        except (urllib.error.URLError, OSError, json.JSONDecodeError) as exc:
            raise ProviderError(f"extractor request failed: {exc}") from None
        if not isinstance(payload, dict) or not isinstance(payload.get("events"), list):
            raise ProviderError("extractor response lacks an 'events' list")
        events = []
        for record in payload["events"]:
            try:
                ev = ExtractionEvent.from_record(record)
            except EventError as err:
                raise ProviderError(f"extractor returned an off-schema event: {err}") from None
            if ev.chunk_id != chunk_id:
                raise ProviderError(f"extractor answered for chunk {ev.chunk_id!r}, asked {chunk_id!r}")
            events.append(ev)
        return events
