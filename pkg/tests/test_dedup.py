import io
import json
import random

import numpy as np
import pytest
from hypothesis import given, strategies as st

from hyperkg.core import Hypergraph, degree
from hyperkg.dedup import (
    MergePlan,
    apply_merge,
    cosine_similarity,
    dedup_pass,
    incremental_dedup,
    merge_audit_rows,
    select_representative,
    similarity_components,
    write_audit,
)
from hyperkg.embeddings import (
    EmbeddingStore,
    FileEmbeddingProvider,
    HashingEmbeddingProvider,
    embed_into,
    provider_from_spec,
)
from hyperkg.errors import ContractError, NodeNotFoundError, ProviderError, SimilarityUndefinedError
from hyperkg.ingest import ExtractionEvent
from hyperkg.pipeline import GraphBuilder, build_graph

from oracles import merged_degree, random_hypergraph


def store_of(vectors):
    dim = len(next(iter(vectors.values())))
    s = EmbeddingStore(dim)
    for k, v in vectors.items():
        s.set(k, v)
    return s


def edges(*specs):
    g = Hypergraph()
    for i, (src, tgt) in enumerate(specs):
        g.add_edge(list(src) + list(tgt), "r", f"d#{i}", source=src, target=tgt)
    return g


@pytest.mark.parametrize("u,v,expected", [
    ([1, 2, 3], [1, 2, 3], 1.0),
    ([1, 0], [0, 1], 0.0),
    ([1, 2], [2, 4], 1.0),
    ([1, 0], [-1, 0], -1.0),
])
def test_cosine(u, v, expected):
    assert cosine_similarity(u, v) == pytest.approx(expected, abs=1e-12)


def test_cosine_zero_vector():
    with pytest.raises(SimilarityUndefinedError):
        cosine_similarity([0, 0], [1, 0])


@given(st.lists(st.floats(-10, 10), min_size=3, max_size=3), st.lists(st.floats(-10, 10), min_size=3, max_size=3))
def test_cosine_symmetric(u, v):
    if np.linalg.norm(u) < 1e-6 or np.linalg.norm(v) < 1e-6:
        return
    assert cosine_similarity(u, v) == pytest.approx(cosine_similarity(v, u))
    assert -1.0 <= cosine_similarity(u, v) <= 1.0


def test_similarity_components_clique_and_chain():
    s = store_of({"A": [1, 0.01, 0], "B": [1, 0, 0.01], "C": [1, 0.005, 0.005], "Z": [0, 0, 1]})
    assert similarity_components(s, "ABCZ", 0.95) == [frozenset("ABC")]
    # A ~ B and B ~ C but A !~ C still lands in one class
    t = np.radians(15)
    chain = store_of({"A": [1, 0], "B": [np.cos(t), np.sin(t)], "C": [np.cos(2 * t), np.sin(2 * t)]})
    assert cosine_similarity(chain.get("A"), chain.get("C")) < 0.95
    assert similarity_components(chain, "ABC", 0.95) == [frozenset("ABC")]
    assert similarity_components(store_of({"A": [1, 0], "B": [0, 1]}), "AB", 0.95) == []


def test_similarity_theta_one_needs_colinear():
    s = store_of({"A": [1, 2], "B": [2, 4], "C": [1, 2.001]})
    assert similarity_components(s, "ABC", 1.0) == [frozenset("AB")]


def test_similarity_unembedded():
    with pytest.raises(NodeNotFoundError):
        similarity_components(store_of({"A": [1, 0]}), ["A", "missing"], 0.9)


def test_similarity_max_class_size(caplog):
    s = store_of({k: [1, 0] for k in "ABCD"})
    assert similarity_components(s, "ABCD", 0.9, max_class_size=3) == []
    assert "exceeds max_class_size" in caplog.text


def test_similarity_against_existing():
    s = store_of({"old": [1, 0], "new": [1, 0.001], "other": [0, 1]})
    assert similarity_components(s, ["new"], 0.95, against=["old", "other"]) == [frozenset({"old", "new"})]


def pla_graph():
    specs = [(["PLA"], ["scaffolds"])] * 47 + [(["polylactic acid"], ["scaffolds"])] * 23
    specs += [(["poly(lactic acid)"], ["fibers"])] * 8
    return edges(*specs)


def test_representative_by_degree():
    g = pla_graph()
    assert select_representative(g, ["polylactic acid", "PLA", "poly(lactic acid)"]) == "PLA"


def test_representative_ties_and_singletons():
    g = edges((["abd"], ["x"]), (["abc"], ["y"]))
    assert select_representative(g, ["abd", "abc"]) == "abc"
    assert select_representative(g, ["abd"]) == "abd"
    with pytest.raises(ContractError):
        select_representative(g, [])


def test_degenerate_edge_removed():
    g = edges((["polylactic acid"], ["PLA"]), (["polylactic acid"], ["scaffolds"]), (["PLA"], ["films"]))
    plan = MergePlan.from_mapping({"polylactic acid": "PLA"})
    out, _ = apply_merge(g, None, plan)
    assert out.edge_ids() == [1, 2]
    assert out.edge(1).nodes == frozenset({"PLA", "scaffolds"})
    assert out.provenance_of(1)[0].source == ("PLA",)
    assert out.next_edge_id == 3


def test_self_loop_rows_dropped_but_edge_kept_if_other_rows():
    g = Hypergraph()
    g.add_edge(["a", "b", "c"], "r", "d#0", source=["a"], target=["b", "c"])
    from hyperkg.core import ProvenanceTriple
    g.add_provenance(ProvenanceTriple(0, ("a", "b"), ("c",), "r", "d#0"))
    out, _ = apply_merge(g, None, MergePlan.from_mapping({"b": "a"}))
    # row 1 becomes (a) -> (a, c); row 2 becomes (a) -> (c)
    assert [(r.source, r.target) for r in out.provenance_of(0)] == [(("a",), ("a", "c")), (("a",), ("c",))]


def test_edge_dropped_when_all_rows_self_loops():
    g = edges((["a", "b"], ["c", "d"]))
    out, _ = apply_merge(g, None, MergePlan.from_mapping({"b": "d", "a": "c"}))
    assert out.num_edges == 0


def test_empty_plan_identity(bio_graph, bio_store):
    out, store = apply_merge(bio_graph, bio_store, MergePlan())
    assert out.same_content(bio_graph)
    assert store == bio_store


def test_apply_rejects_foreign_representative(bio_graph):
    plan = MergePlan([("ghost", frozenset({"ghost", "PCL"}))], {"ghost": "ghost", "PCL": "ghost"})
    with pytest.raises(ContractError):
        apply_merge(bio_graph, None, plan)


def test_plan_validation():
    with pytest.raises(ContractError):
        MergePlan.from_mapping({"a": "b", "b": "c"})
    with pytest.raises(ContractError):
        MergePlan([("x", frozenset({"a", "b"}))], {}).validate()


def test_text_aggregation_and_store():
    g = edges((["PLA"], ["scaffolds"]), (["PLA"], ["films"]), (["polylactic acid"], ["fibers"]))
    prov = HashingEmbeddingProvider(32)
    store = embed_into(None, prov, sorted(g.nodes))
    g.annotate("PLA", ["d#0"])
    g.annotate("polylactic acid", ["d#2"])
    plan = MergePlan.from_classes(g, [{"PLA", "polylactic acid"}])
    out, new_store = apply_merge(g, store, plan, prov)
    assert out.annotations["PLA"] == {"d#0", "d#2"}
    assert "polylactic acid" not in new_store and "PLA" in new_store
    assert np.allclose(new_store.get("PLA"), prov.embed(["PLA"])[0])
    assert "polylactic acid" in store  # input untouched


class Failing:
    def embed(self, labels):
        raise ProviderError("down")


def test_provider_failure_is_atomic(bio_graph, bio_store):
    before = bio_graph.copy()
    plan = MergePlan.from_classes(bio_graph, [{"PCL", "PDLLA"}])
    with pytest.raises(ProviderError):
        apply_merge(bio_graph, bio_store, plan, Failing())
    assert bio_graph.same_content(before)


def random_plan(g, rng, n_classes=3):
    labels = sorted(g.nodes)
    rng.shuffle(labels)
    classes, i = [], 0
    for _ in range(n_classes):
        size = rng.randint(2, 4)
        if i + size > len(labels):
            break
        classes.append(labels[i:i + size])
        i += size
    return MergePlan.from_classes(g, classes)


@pytest.mark.parametrize("seed", range(25))
def test_merge_properties(seed):
    rng = random.Random(seed)
    g = random_hypergraph(rng, max_edges=80, max_nodes=25, max_size=5)
    plan = random_plan(g, rng)
    once, _ = apply_merge(g, None, plan)
    twice, _ = apply_merge(once, None, plan)
    assert twice.same_content(once)
    once.check_invariants()
    for e in once.iter_edges():
        assert e.size >= 2
        assert e.chunk_id == g.edge(e.id).chunk_id
        assert all(not r.is_self_loop() for r in once.provenance_of(e.id))
    assert all(plan.map(v) == v for v in once.nodes)
    for rep, members in plan.classes:
        got = degree(once, rep) if rep in once else 0
        assert got == merged_degree(g, members, once)


def test_stated_degree_formula_counterexample():
    # an edge {a, b, x} with a, b merged survives as {a, x} and still loses one incidence
    g = edges((["a", "b"], ["x"]), (["a"], ["y"]))
    out, _ = apply_merge(g, None, MergePlan.from_mapping({"b": "a"}))
    assert degree(out, "a") == 2
    assert degree(g, "a") + degree(g, "b") == 3


def test_dedup_pass_with_hashing(bio_graph, hashing):
    g = bio_graph.copy()
    g.add_edge(["Chitosan", "gelatin"], "r", "z#0", source=["Chitosan"], target=["gelatin"])
    out, store, plan = dedup_pass(g, None, ["Chitosan"], 0.95, hashing)
    assert plan.classes == [("chitosan", frozenset({"chitosan", "Chitosan"}))]
    assert "Chitosan" not in out and "Chitosan" not in store
    assert degree(out, "chitosan") == degree(g, "chitosan") + 1


@pytest.mark.parametrize("doc_index,runs", [(10, True), (7, False), (20, True)])
def test_incremental_gate(bio_graph, hashing, doc_index, runs):
    out, store, plan = incremental_dedup(bio_graph, None, ["PCL"], 0.95, 10, doc_index, hashing)
    assert (plan is not None) == runs
    if not runs:
        assert out is bio_graph and store is None


def test_audit_rows():
    g = pla_graph()
    plan = MergePlan.from_classes(g, [{"PLA", "polylactic acid", "poly(lactic acid)"}])
    rows = merge_audit_rows(g, plan)
    assert rows == [{"representative": "PLA", "merged": ["poly(lactic acid)", "polylactic acid"],
                     "degrees": [8, 23]}]
    buf = io.StringIO()
    write_audit(rows, buf)
    assert json.loads(buf.getvalue()) == rows[0]


def test_store_validation_and_tsv(tmp_path):
    s = EmbeddingStore(2)
    with pytest.raises(ContractError):
        s.set("a", [1.0, float("nan")])
    with pytest.raises(ContractError):
        s.set("a", [1.0, 2.0, 3.0])
    s.set("a b", [0.5, -1.25])
    path = tmp_path / "v.tsv"
    s.to_tsv(path)
    assert EmbeddingStore.from_tsv(path) == s
    prov = FileEmbeddingProvider(path)
    assert np.allclose(prov.embed(["a b"]), [[0.5, -1.25]])
    with pytest.raises(ProviderError):
        prov.embed(["missing"])


def test_provider_spec(tmp_path):
    assert provider_from_spec(None) is None
    assert provider_from_spec("hash:16").dimension == 16
    assert provider_from_spec("http://localhost:1").__class__.__name__ == "HttpEmbeddingProvider"


def test_hashing_case_insensitive():
    h = HashingEmbeddingProvider(64)
    a, b, c = h.embed(["Cerium oxide", "cerium oxide", "PCL"])
    assert np.allclose(a, b) and not np.allclose(a, c)


def _ev(src, tgt, doc, i=0):
    return ExtractionEvent(tuple(src), tuple(tgt), "r", f"{doc}#{i}")


def test_builder_gates_on_frequency(hashing):
    events = [_ev(["PLA"], [f"x{i}"], f"doc{i}") for i in range(3)]
    events.append(_ev(["pla"], ["y"], "doc3"))
    builder = build_graph(events, hashing, theta=0.95, frequency=4)
    assert builder.documents_seen == 4
    assert "pla" not in builder.graph and builder.graph.num_edges == 4
    assert builder.audit == [{"representative": "PLA", "merged": ["pla"], "degrees": [1]}]
    lazy = build_graph(events, hashing, theta=0.95, frequency=5)
    assert "pla" in lazy.graph


def test_builder_without_provider(bio_events):
    b = GraphBuilder()
    b.add_events(bio_events)
    assert b.graph.num_edges == len(bio_events) and b.store is None
