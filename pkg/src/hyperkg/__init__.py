"""Hypergraph knowledge store: construction, deduplication, analysis and traversal."""

from .core import Hyperedge, Hypergraph, ProvenanceTriple
from .config import EngineConfig
from .errors import (
    ContractError,
    EmptyGraphError,
    EventError,
    HyperKGError,
    InsufficientDataError,
    IntegrityError,
    NodeNotFoundError,
    ProviderError,
    SimilarityUndefinedError,
)
from .ingest import ExtractionEvent, parse_events
from .pipeline import GraphBuilder, build_graph
from .traverse import PathQuery, shortest_hyperpaths

__version__ = "0.1.0"

__all__ = [
    "ContractError", "EmptyGraphError", "EngineConfig", "EventError", "ExtractionEvent", "GraphBuilder",
    "HyperKGError", "Hyperedge", "Hypergraph", "InsufficientDataError", "IntegrityError", "NodeNotFoundError",
    "PathQuery", "ProvenanceTriple", "ProviderError", "SimilarityUndefinedError", "build_graph",
    "parse_events", "shortest_hyperpaths",
]
