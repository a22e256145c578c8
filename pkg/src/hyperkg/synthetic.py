"""Seeded generators for scale-free hypergraphs and extraction-event corpora."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import Hypergraph
from .ingest import ExtractionEvent


@dataclass(frozen=True)
class SyntheticConfig:
    """Shape of a generated hypergraph.

    Edge sizes follow P(n) ~ (n - 1)^-size_exponent on [2, max_edge_size]; the
    default exponent gives a mean size near 2.35. Node membership is
    preferential with weight (rank + 1)^-node_exponent, and every node is
    placed in at least one edge.
    """

    num_nodes: int = 160_000
    num_edges: int = 320_000
    max_edge_size: int = 32
    size_exponent: float = 3.0
    node_exponent: float = 0.85
    chunks_per_document: int = 20
    seed: int = 0

    def __post_init__(self):
        if self.num_nodes < 2 or self.num_edges < 1 or self.max_edge_size < 2:
            raise ValueError("need num_nodes >= 2, num_edges >= 1, max_edge_size >= 2")


def node_label(i: int) -> str:
    return f"n{i:06d}"


def edge_sizes(cfg: SyntheticConfig, rng: np.random.Generator) -> np.ndarray:
    extra = np.arange(1, cfg.max_edge_size, dtype=np.float64)
    p = extra ** -cfg.size_exponent
    p /= p.sum()
    return rng.choice(extra.astype(np.int64) + 1, size=cfg.num_edges, p=p)


def edge_memberships(cfg: SyntheticConfig) -> list[np.ndarray]:
    """Node-index arrays, one per edge, each with >= 2 distinct entries."""
    rng = np.random.default_rng(cfg.seed)
    sizes = edge_sizes(cfg, rng)
    total = int(sizes.sum())
    if total < cfg.num_nodes:
        raise ValueError("too few incidence slots to cover every node")
    weights = (np.arange(cfg.num_nodes) + 1.0) ** -cfg.node_exponent
    weights /= weights.sum()
    slots = rng.choice(cfg.num_nodes, size=total, p=weights)
    # a random subset of slots receives each node once, so no label is absent
    cover = rng.choice(total, size=cfg.num_nodes, replace=False)
    slots[cover] = rng.permutation(cfg.num_nodes)
    bounds = np.concatenate(([0], np.cumsum(sizes)))
    out = []
    for i in range(cfg.num_edges):
        members = np.unique(slots[bounds[i]:bounds[i + 1]])
        while len(members) < 2:
            members = np.unique(np.append(members, rng.integers(cfg.num_nodes)))
        out.append(members)
    return out


def _split(labels: list[str]) -> tuple[list[str], list[str]]:
    half = max(1, len(labels) // 2)
    return labels[:half], labels[half:]


def _chunk(cfg: SyntheticConfig, i: int) -> str:
    return f"doc{i // cfg.chunks_per_document:06d}#{i % cfg.chunks_per_document}"


def synthetic_hypergraph(cfg: SyntheticConfig = SyntheticConfig()) -> Hypergraph:
    graph = Hypergraph()
    for i, members in enumerate(edge_memberships(cfg)):
        labels = [node_label(int(v)) for v in members]
        src, tgt = _split(labels)
        graph.add_edge(labels, "relates to", _chunk(cfg, i), source=src, target=tgt)
    return graph


def synthetic_events(cfg: SyntheticConfig) -> list[ExtractionEvent]:
    """One event per edge of the generated hypergraph, in edge order."""
    events = []
    for i, members in enumerate(edge_memberships(cfg)):
        labels = [node_label(int(v)) for v in members]
        src, tgt = _split(labels)
        events.append(ExtractionEvent(tuple(src), tuple(tgt), "relates to", _chunk(cfg, i)))
    return events
