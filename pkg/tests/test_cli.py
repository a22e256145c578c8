import io
import json
import subprocess
import sys

import pytest

from hyperkg import snapshot
from hyperkg.cli import EXIT_DATA, EXIT_OK, EXIT_USAGE, main
from hyperkg.payloads import dump_json, paths_payload, stats_payload
from hyperkg.traverse import PathQuery


@pytest.fixture(autouse=True)
def clean_env(monkeypatch):
    for key in ["HKG_SNAPSHOT_PATH", "HKG_EMBEDDING_PROVIDER", "HKG_EMBEDDING_STORE", "HKG_PAIR_BUDGET"]:
        monkeypatch.delenv(key, raising=False)


def hkg(*argv):
    out, err = io.StringIO(), io.StringIO()
    code = main([str(a) for a in argv], out, err)
    return code, out.getvalue(), err.getvalue()


@pytest.fixture
def bio_snap(tmp_path, data_dir):
    snap = tmp_path / "bio.json"
    code, out, _ = hkg("--snapshot", snap, "ingest", data_dir / "biomaterials.jsonl")
    assert code == EXIT_OK
    assert json.loads(out) == {"events": 9, "rejected": 0, "documents": 9, "nodes": 21, "edges": 9}
    return snap


def test_ingest_then_stats(bio_snap, bio_graph):
    code, out, _ = hkg("--snapshot", bio_snap, "stats")
    assert code == EXIT_OK
    assert out == dump_json(stats_payload(bio_graph))
    assert json.loads(out)["edge_count"] == 9


def test_ingest_appends_unless_fresh(bio_snap, data_dir):
    hkg("--snapshot", bio_snap, "ingest", data_dir / "coauthors.jsonl")
    assert snapshot.load(bio_snap).num_edges == 10
    hkg("--snapshot", bio_snap, "ingest", "--fresh", data_dir / "coauthors.jsonl")
    assert snapshot.load(bio_snap).num_edges == 1


def test_ingest_bad_lines(tmp_path, data_dir):
    snap = tmp_path / "s.json"
    code, _, err = hkg("--snapshot", snap, "ingest", data_dir / "bad_events.jsonl")
    assert code == EXIT_DATA and "line 2" in err
    assert not snap.exists()
    code, out, err = hkg("--snapshot", snap, "ingest", "--skip-invalid", data_dir / "bad_events.jsonl")
    assert code == EXIT_OK and json.loads(out)["rejected"] == 4
    assert err.count("skipped") == 4


def test_path_example(bio_snap, bio_graph):
    code, out, _ = hkg("--snapshot", bio_snap, "path", "--start", "Cerium oxide", "--end", "PCL")
    assert code == EXIT_OK
    payload = json.loads(out)
    assert payload["paths"][0]["intersections"] == [["chitosan"]]
    assert payload["truncated"] is True
    assert out == dump_json(paths_payload(bio_graph, PathQuery("Cerium oxide", "PCL")))


def test_path_unknown_node(bio_snap):
    code, _, err = hkg("--snapshot", bio_snap, "path", "--start", "nope", "--end", "PCL")
    assert code == EXIT_DATA and "nope" in err


def test_project_clique(tmp_path, data_dir):
    snap = tmp_path / "c.json"
    hkg("--snapshot", snap, "ingest", data_dir / "coauthors.jsonl")
    code, out, _ = hkg("--snapshot", snap, "project", "--kind", "clique")
    assert code == EXIT_OK
    lines = out.splitlines()
    assert len(lines) == 6 and lines == sorted(lines)
    assert lines[0] == "Bob\tDavid\t1"
    _, star, _ = hkg("--snapshot", snap, "project", "--kind", "star")
    assert len(star.splitlines()) == 4


@pytest.mark.parametrize("argv", [
    [],
    ["frobnicate"],
    ["project", "--kind", "hyper"],
    ["richclub"],
    ["path", "--start", "a"],
    ["scomponents", "--s", "x"],
])
def test_usage_errors(tmp_path, argv):
    code, _, err = hkg("--snapshot", tmp_path / "x.json", *argv)
    assert code == EXIT_USAGE and "usage" in err


def test_missing_snapshot(tmp_path):
    code, _, err = hkg("--snapshot", tmp_path / "absent.json", "stats")
    assert code == EXIT_DATA and "does not exist" in err


def test_corrupt_snapshot(tmp_path):
    snap = tmp_path / "bad.json"
    snap.write_text("{not json")
    assert hkg("--snapshot", snap, "stats")[0] == EXIT_DATA


def test_richclub_and_scomponents(bio_snap):
    code, out, _ = hkg("--snapshot", bio_snap, "richclub", "--k", 1, "--k", 3)
    assert code == EXIT_OK
    one, three = json.loads(out)
    assert one["hub_count"] == 21 and three["degree_threshold"] == 3
    code, out, _ = hkg("--snapshot", bio_snap, "scomponents", "--s", 2)
    # edges 1-5 pairwise share {PCL, chitosan} or {chitosan, collagen}
    assert json.loads(out)["component_sizes"] == [5]
    _, out, _ = hkg("--snapshot", bio_snap, "scomponents", "--s", 2, "--singletons")
    assert json.loads(out)["component_sizes"] == [5, 1, 1, 1, 1]


def test_hubs(bio_snap):
    code, out, _ = hkg("--snapshot", bio_snap, "hubs", "--top", 2)
    rows = json.loads(out)["rows"]
    assert code == EXIT_OK and rows[0]["label"] == "chitosan" and rows[0]["degree"] == 6


def test_signatures(bio_snap):
    _, out, _ = hkg("--snapshot", bio_snap, "signatures")
    lines = out.splitlines()
    assert lines[0] == "label\tdegree\tuniq_neighbors\tavg_edge_size"
    assert len(lines) == 22
    row = dict(line.split("\t", 1) for line in lines[1:])
    assert row["chitosan"].split("\t")[0] == "6"
    _, std, _ = hkg("--snapshot", bio_snap, "signatures", "--standardized")
    assert len(std.splitlines()) == 22


def test_dedup_and_match(tmp_path):
    events = tmp_path / "e.jsonl"
    events.write_text(
        '{"source": ["chitosan"], "target": ["gel"], "relation": "forms", "chunk_id": "a#0"}\n'
        '{"source": ["Chitosan"], "target": ["film"], "relation": "forms", "chunk_id": "b#0"}\n')
    snap = tmp_path / "s.json"
    hkg("--snapshot", snap, "ingest", events)
    assert snapshot.load(snap).num_nodes == 4
    audit = tmp_path / "audit.jsonl"
    code, out, _ = hkg("--snapshot", snap, "--embeddings", "hash:64", "dedup", "--audit", audit)
    assert code == EXIT_OK and json.loads(out)["classes"] == 1
    assert snapshot.load(snap).num_nodes == 3
    assert len(audit.read_text().splitlines()) == 1
    assert (tmp_path / "s.json.emb.tsv").exists()
    code, out, _ = hkg("--snapshot", snap, "--embeddings", "hash:64", "match", "GEL", "film")
    assert code == EXIT_OK
    assert [m["label"] for m in json.loads(out)["matches"]] == ["gel", "film"]


def test_dedup_needs_provider(bio_snap):
    assert hkg("--snapshot", bio_snap, "dedup")[0] == EXIT_USAGE


def test_env_snapshot(bio_snap, monkeypatch):
    monkeypatch.setenv("HKG_SNAPSHOT_PATH", str(bio_snap))
    assert hkg("stats")[0] == EXIT_OK


def test_module_entry_point(bio_snap):
    proc = subprocess.run([sys.executable, "-m", "hyperkg", "--snapshot", str(bio_snap), "stats"],
                          capture_output=True, text=True)
    assert proc.returncode == 0 and json.loads(proc.stdout)["node_count"] == 21
