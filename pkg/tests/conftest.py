from pathlib import Path

import pytest
from hypothesis import settings

from hyperkg.ingest import build_document_hypergraph, parse_events
from hyperkg.embeddings import HashingEmbeddingProvider, embed_into

DATA = Path(__file__).parent / "data"

settings.register_profile("default", deadline=None, max_examples=100)
settings.load_profile("default")


def load_events(name):
    with open(DATA / name, encoding="utf-8") as fh:
        return parse_events(fh)


@pytest.fixture
def data_dir():
    return DATA


@pytest.fixture
def bio_events():
    return load_events("biomaterials.jsonl")


@pytest.fixture
def bio_graph(bio_events):
    return build_document_hypergraph(bio_events)


@pytest.fixture
def coauthor_graph():
    return build_document_hypergraph(load_events("coauthors.jsonl"))


@pytest.fixture
def hashing():
    return HashingEmbeddingProvider(dimension=128)


@pytest.fixture
def bio_store(bio_graph, hashing):
    return embed_into(None, hashing, sorted(bio_graph.nodes))


def pytest_terminal_summary(terminalreporter):
    import sys

    mod = sys.modules.get("test_acceptance")
    if not mod or not mod.RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for key in sorted(mod.RESULTS, key=str):
        terminalreporter.write_line(mod.RESULTS[key])
