import random

import pytest
from hypothesis import given, strategies as st

from hyperkg.core import Hypergraph
from hyperkg.embeddings import EmbeddingStore
from hyperkg.errors import ContractError, IntegrityError, NodeNotFoundError, ProviderError
from hyperkg.traverse import (
    SAME_NODE,
    UNREACHABLE,
    PathQuery,
    induced_path_subgraph,
    match_keywords,
    reconstruct_statements,
    result_payload,
    shortest_hyperpaths,
    statement,
)

from oracles import brute_paths, hypergraphs, random_hypergraph

FILMS = "Cerium oxide, chitosan, Hydroxyethylcellulose, Polyethylene glycol compose Antibacterial nano composite films."


def test_cerium_to_pcl_single(bio_graph):
    res = shortest_hyperpaths(bio_graph, PathQuery("Cerium oxide", "PCL", s=1, k=1))
    assert len(res.paths) == 1 and res.minimal_length == 2
    path = res.paths[0]
    assert path.intersections == [["chitosan"]]
    assert reconstruct_statements(bio_graph, path) == [FILMS, "PCL, chitosan compose PCL/chitosan nanofibers."]
    assert res.truncated


def test_cerium_to_pcl_three(bio_graph):
    res = shortest_hyperpaths(bio_graph, PathQuery("Cerium oxide", "PCL", s=1, k=3))
    tails = [reconstruct_statements(bio_graph, p)[1] for p in res.paths]
    assert tails == [
        "PCL, chitosan compose PCL/chitosan nanofibers.",
        "PCL, chitosan compose hybrid vascular grafts.",
        "PCL, natural polymers compose chitosan, silk, gelatin.",
    ]
    assert all(p.length == 2 for p in res.paths)


def test_hydrogel_to_pcl_s2(bio_graph):
    res = shortest_hyperpaths(bio_graph, PathQuery("hydrogel", "PCL", s=2, k=1))
    assert res.paths[0].intersections == [["chitosan", "collagen"]]
    assert reconstruct_statements(bio_graph, res.paths[0]) == [
        "chitosan, collagen compose hydrogel.",
        "PCL, chitosan, collagen, gelatin form scaffolds.",
    ]
    assert not res.truncated


def test_notices(bio_graph):
    same = shortest_hyperpaths(bio_graph, PathQuery("PCL", "PCL"))
    assert same.paths == [] and same.notice == SAME_NODE
    none = shortest_hyperpaths(bio_graph, PathQuery("biomaterials", "PCL"))
    assert none.paths == [] and none.notice == UNREACHABLE and none.minimal_length is None
    with pytest.raises(NodeNotFoundError):
        shortest_hyperpaths(bio_graph, PathQuery("unobtainium", "PCL"))


@pytest.mark.parametrize("kw", [{"s": 0}, {"k": 0}, {"s": 1.5}])
def test_query_validation(kw):
    with pytest.raises(ContractError):
        PathQuery("a", "b", **kw)


def test_single_edge_path():
    g = Hypergraph()
    g.add_edge("ABC", "r", "d#0", source=["A"], target=["B", "C"])
    res = shortest_hyperpaths(g, PathQuery("A", "C"))
    assert [p.edges for p in res.paths] == [(0,)] and res.paths[0].intersections == []


def test_duplicates_give_distinct_paths():
    g = Hypergraph()
    for i in range(2):
        g.add_edge("AB", "r", f"d#{i}", source=["A"], target=["B"])
    g.add_edge("BC", "r", "d#2", source=["B"], target=["C"])
    res = shortest_hyperpaths(g, PathQuery("A", "C", k=5))
    assert [p.edges for p in res.paths] == [(0, 2), (1, 2)]


def test_allow_longer(bio_graph):
    base = shortest_hyperpaths(bio_graph, PathQuery("Cerium oxide", "PCL", k=6))
    assert len(base.paths) == 4 and not base.truncated
    longer = shortest_hyperpaths(bio_graph, PathQuery("Cerium oxide", "PCL", k=6, allow_longer=True))
    assert [p.edges for p in longer.paths[:4]] == [p.edges for p in base.paths]
    assert [p.length for p in longer.paths[4:]] == [3, 3]
    assert longer.minimal_length == 2


def check_against_oracle(g, start, end, s, k):
    want, length = brute_paths(g, start, end, s)
    res = shortest_hyperpaths(g, PathQuery(start, end, s, k))
    if start == end:
        assert res.notice == SAME_NODE
        return
    got = [p.edges for p in res.paths]
    assert got == want[:k]
    assert res.truncated == (len(want) > k)
    assert res.minimal_length == length
    for p in res.paths:
        assert start in g.edge(p.edges[0]).nodes and end in g.edge(p.edges[-1]).nodes
        for (a, b), shared in zip(zip(p.edges, p.edges[1:]), p.intersections):
            assert sorted(g.edge(a).nodes & g.edge(b).nodes) == shared
            assert len(shared) >= s


@pytest.mark.parametrize("seed", range(40))
def test_oracle_random(seed):
    rng = random.Random(seed)
    g = random_hypergraph(rng, max_edges=40, max_nodes=30, max_size=5)
    labels = sorted(g.nodes)
    for _ in range(5):
        a, b = rng.choice(labels), rng.choice(labels)
        for s in (1, 2):
            for k in (1, 3):
                check_against_oracle(g, a, b, s, k)


@given(hypergraphs(max_edges=15, max_nodes=10), st.data())
def test_oracle_hypothesis(g, data):
    labels = sorted(g.nodes)
    a = data.draw(st.sampled_from(labels))
    b = data.draw(st.sampled_from(labels))
    check_against_oracle(g, a, b, data.draw(st.sampled_from([1, 2])), data.draw(st.sampled_from([1, 2, 4])))


@given(hypergraphs(max_edges=20, max_nodes=10), st.data())
def test_monotone_in_s(g, data):
    labels = sorted(g.nodes)
    a, b = data.draw(st.sampled_from(labels)), data.draw(st.sampled_from(labels))
    if a == b:
        return
    lengths = []
    for s in (1, 2, 3):
        res = shortest_hyperpaths(g, PathQuery(a, b, s))
        lengths.append(res.minimal_length)
    for lo, hi in zip(lengths, lengths[1:]):
        if lo is None:
            assert hi is None
        elif hi is not None:
            assert hi >= lo


def test_deterministic(bio_graph):
    q = PathQuery("Cerium oxide", "PCL", k=3)
    one = result_payload(bio_graph, shortest_hyperpaths(bio_graph, q))
    two = result_payload(bio_graph, shortest_hyperpaths(bio_graph, q))
    assert one == two


def test_induced_path_subgraph(bio_graph):
    res = shortest_hyperpaths(bio_graph, PathQuery("Cerium oxide", "PCL", k=3))
    sub = induced_path_subgraph(bio_graph, res.paths)
    assert sub.edge_ids() == [0, 1, 2, 3]
    assert set(sub.nodes) == set().union(*(bio_graph.edge(e).nodes for e in sub.edge_ids()))
    assert "Hydroxyethylcellulose" in sub
    assert induced_path_subgraph(bio_graph, res.paths[:1]).num_edges == 2
    assert induced_path_subgraph(bio_graph, []).num_edges == 0


def test_statements():
    assert statement(["fescue grass"], "achieves", ["hydrogen production rate"]) == \
        "fescue grass achieves hydrogen production rate."
    assert statement(["A"], "r", ["B"]) == "A r B."


def test_statements_need_provenance():
    g = Hypergraph()
    g.add_edge("AB", "r", "d#0")
    with pytest.raises(IntegrityError):
        reconstruct_statements(g, [0])


def test_statement_per_row(bio_graph):
    from hyperkg.core import ProvenanceTriple
    g = bio_graph.copy()
    g.add_provenance(ProvenanceTriple(8, ("methanol",), ("PDLLA", "PCL"), "dissolves", "d21#0"))
    assert reconstruct_statements(g, [8]) == ["PDLLA, PCL precipitated into methanol.",
                                              "methanol dissolves PDLLA, PCL."]


def test_match_keywords(bio_store, hashing):
    got = match_keywords(bio_store, ["pcl", "cerium oxide", "PCL"], provider=hashing)
    assert [m.label for m in got] == ["PCL", "Cerium oxide", "PCL"]
    assert all(m.matched for m in got)
    assert got[2].distance == pytest.approx(0.0, abs=1e-6)


def test_match_threshold(bio_store, hashing):
    got = match_keywords(bio_store, ["zzzz qqqq"], threshold=0.1, provider=hashing)
    assert not got[0].matched and got[0].distance > 0.1


def test_match_errors(bio_store):
    with pytest.raises(ContractError):
        match_keywords(EmbeddingStore(4), ["x"])
    with pytest.raises(ContractError):
        match_keywords(bio_store, [""])
    with pytest.raises(ProviderError):
        match_keywords(bio_store, ["not a label"])

    class Broken:
        def embed(self, labels):
            raise RuntimeError("boom")

    with pytest.raises(ProviderError):
        match_keywords(bio_store, ["x"], provider=Broken())


def test_payload_shape(bio_graph):
    payload = result_payload(bio_graph, shortest_hyperpaths(bio_graph, PathQuery("hydrogel", "PCL", 2)))
    assert list(payload) == ["paths", "minimal_length", "truncated"]
    assert list(payload["paths"][0]) == ["edges", "intersections", "statements"]
