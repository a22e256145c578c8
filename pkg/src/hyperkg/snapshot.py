"""Snapshot file format: one deterministic UTF-8 JSON document per graph."""

from __future__ import annotations

import json
import os
import tempfile
from pathlib import Path

from .core import Hypergraph, ProvenanceTriple
from .errors import HyperKGError, IntegrityError


def to_document(graph: Hypergraph) -> dict:
    return {
        "nodes": sorted(graph.nodes),
        "edges": [
            {"id": e.id, "nodes": e.sorted_nodes(), "relation": e.relation, "chunk_id": e.chunk_id}
            for e in sorted(graph.iter_edges(), key=lambda e: e.id)
        ],
        "provenance": [
            {
                "edge_id": row.edge_id,
                "source": list(row.source),
                "target": list(row.target),
                "relation": row.relation,
                "chunk_id": row.chunk_id,
            }
            for eid in sorted(graph.edge_ids())
            for row in graph.provenance_of(eid)
        ],
    }


def dumps(graph: Hypergraph) -> str:
    return json.dumps(to_document(graph), ensure_ascii=False, indent=1) + "\n"


def from_document(doc: dict) -> Hypergraph:
    try:
        edges = sorted(doc["edges"], key=lambda e: e["id"])
        graph = Hypergraph()
        for e in edges:
            graph.add_edge(e["nodes"], e["relation"], e["chunk_id"], edge_id=int(e["id"]))
        for row in doc["provenance"]:
            graph.add_provenance(
                ProvenanceTriple(
                    int(row["edge_id"]),
                    tuple(row["source"]),
                    tuple(row["target"]),
                    row["relation"],
                    row["chunk_id"],
                )
            )
        declared = doc["nodes"]
    except (KeyError, TypeError) as exc:
        raise IntegrityError(f"malformed snapshot: {exc}") from None
    if sorted(graph.nodes) != list(declared):
        raise IntegrityError("snapshot node list does not equal the union of its edges")
    for e in graph.iter_edges():
        for v in e.nodes:
            graph.annotate(v, (e.chunk_id,))
    return graph


def loads(text: str) -> Hypergraph:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise IntegrityError(f"snapshot is not valid JSON: {exc}") from None
    return from_document(doc)


def save(graph: Hypergraph, path) -> None:
    """Write atomically: readers never observe a half-written snapshot."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=path.name, suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(dumps(graph))
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def load(path) -> Hypergraph:
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise HyperKGError(f"cannot read snapshot {path}: {exc}") from None
    return loads(text)
