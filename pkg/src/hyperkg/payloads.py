"""JSON payloads shared by the CLI and the HTTP service (byte-identical output)."""

from __future__ import annotations

import json

from . import analysis
from .core import Hypergraph
from .traverse import PathQuery, match_keywords, result_payload, shortest_hyperpaths


def dump_json(obj) -> str:
    return json.dumps(obj, ensure_ascii=False, indent=2) + "\n"


def stats_payload(graph: Hypergraph, pair_budget: int = analysis.DEFAULT_PAIR_BUDGET) -> dict:
    return graph.cached(("stats", pair_budget),
                        lambda g: analysis.to_jsonable(analysis.summary_stats(g, pair_budget=pair_budget)))


def hubs_payload(graph: Hypergraph, top: int = 20, cooccur: int = 3) -> dict:
    return analysis.to_jsonable(analysis.hub_report(graph, top, cooccur))


def richclub_payload(graph: Hypergraph, k: int) -> dict:
    return analysis.to_jsonable(analysis.rich_club(graph, k))


def scomponents_payload(graph: Hypergraph, s: int, include_singletons: bool = False,
                        pair_budget: int = analysis.DEFAULT_PAIR_BUDGET) -> dict:
    report = analysis.s_components(graph, s, include_singletons=include_singletons, pair_budget=pair_budget)
    return report.to_dict()


def paths_payload(graph: Hypergraph, query: PathQuery) -> dict:
    return result_payload(graph, shortest_hyperpaths(graph, query))


def match_payload(store, keywords, threshold, provider=None) -> dict:
    matches = match_keywords(store, keywords, threshold, provider)
    return {"matches": [analysis.to_jsonable(m) for m in matches]}


def signatures_tsv(graph: Hypergraph, standardized: bool = False) -> str:
    table = analysis.structural_signatures(graph)
    lines = ["label\tdegree\tuniq_neighbors\tavg_edge_size"]
    for label, deg, uniq, avg in table.rows(standardized):
        if standardized:
            lines.append(f"{label}\t{deg:.6f}\t{uniq:.6f}\t{avg:.6f}")
        else:
            lines.append(f"{label}\t{int(deg)}\t{int(uniq)}\t{avg:.6f}")
    return "\n".join(lines) + "\n"
