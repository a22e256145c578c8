"""Compiled CSR view of a hypergraph snapshot.

Rows of ``edge_nodes`` are edge positions (ascending edge id), columns are
node positions (sorted label order). ``node_edges`` is its transpose, i.e. the
inverted index as posting lists sorted by edge id.
"""

from __future__ import annotations

from typing import Iterator

import numpy as np
import scipy.sparse as sp

from .core import Hypergraph
from .errors import NodeNotFoundError


class CompiledIndex:
    def __init__(self, graph: Hypergraph):
        self.labels = sorted(graph.nodes)
        self.label_pos = {v: i for i, v in enumerate(self.labels)}
        self.edge_ids = np.asarray(graph.edge_ids(), dtype=np.int64)
        self.edge_pos = {int(e): i for i, e in enumerate(self.edge_ids)}
        indptr = [0]
        indices = []
        pos = self.label_pos
        for e in graph.iter_edges():
            indices.extend(sorted(pos[v] for v in e.nodes))
            indptr.append(len(indices))
        n_e, n_v = len(self.edge_ids), len(self.labels)
        data = np.ones(len(indices), dtype=np.int32)
        self.edge_nodes = sp.csr_array(
            (data, np.asarray(indices, dtype=np.int32), np.asarray(indptr, dtype=np.int64)),
            shape=(n_e, n_v),
        )
        self.node_edges = self.edge_nodes.T.tocsr()
        self.node_edges.sort_indices()
        self.edge_sizes = np.diff(self.edge_nodes.indptr)
        self.degrees = np.diff(self.node_edges.indptr)

    @classmethod
    def of(cls, graph: Hypergraph) -> "CompiledIndex":
        return graph.cached("compiled-index", cls)

    @property
    def num_edges(self) -> int:
        return len(self.edge_ids)

    @property
    def num_nodes(self) -> int:
        return len(self.labels)

    def node(self, label: str) -> int:
        try:
            return self.label_pos[label]
        except KeyError:
            raise NodeNotFoundError(label) from None

    def nodes_of(self, e: int) -> np.ndarray:
        m = self.edge_nodes
        return m.indices[m.indptr[e]:m.indptr[e + 1]]

    def edges_of(self, v: int) -> np.ndarray:
        m = self.node_edges
        return m.indices[m.indptr[v]:m.indptr[v + 1]]

    def gather_edges(self, nodes: np.ndarray) -> np.ndarray:
        """Concatenated posting lists of ``nodes`` (with repeats)."""
        m = self.node_edges
        if len(nodes) == 0:
            return np.zeros(0, dtype=m.indices.dtype)
        return np.concatenate([m.indices[m.indptr[v]:m.indptr[v + 1]] for v in nodes])

    def overlap_blocks(self, rows: np.ndarray | None = None, budget: int = 5_000_000
                       ) -> Iterator[tuple[int, sp.csr_array]]:
        """Yield ``(offset, block)`` where block[i, j] = |e[offset + i] & e[j]|.

        With ``rows`` given, both axes index into that subset of edge
        positions. Blocks are cut so the estimated number of produced entries
        stays near ``budget``.
        """
        m = self.edge_nodes if rows is None else self.edge_nodes[rows]
        mt = m.T.tocsr()
        cost = np.asarray(m @ np.diff(mt.indptr)).ravel()
        yield from _blocks(m, mt, cost, budget)

    def cooccurrence_blocks(self, budget: int = 5_000_000) -> Iterator[tuple[int, sp.csr_array]]:
        """Yield ``(offset, block)`` with block[i, j] = #edges holding nodes offset+i and j."""
        nt, m = self.node_edges, self.edge_nodes
        cost = np.asarray(nt @ self.edge_sizes).ravel()
        yield from _blocks(nt, m, cost, budget)


def _blocks(left, right, cost, budget):
    n = left.shape[0]
    cum = np.cumsum(cost)
    start = 0
    while start < n:
        base = cum[start - 1] if start else 0
        stop = max(int(np.searchsorted(cum, base + budget, side="right")), start + 1)
        block = (left[start:stop] @ right).tocsr()
        block.sort_indices()
        yield start, block
        start = stop
