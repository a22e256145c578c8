"""Read-only JSON-over-HTTP tool endpoint backed by one immutable snapshot."""

from __future__ import annotations

import json
import logging
import threading
from dataclasses import dataclass
from http.server import BaseHTTPRequestHandler, ThreadingHTTPServer
from pathlib import Path
from urllib.parse import parse_qs, urlparse

from . import snapshot
from .config import EngineConfig
from .core import Hypergraph
from .embeddings import EmbeddingStore, embed_into, provider_from_spec
from .errors import ContractError, HyperKGError, NodeNotFoundError, ProviderError
from .index import CompiledIndex
from .payloads import dump_json, hubs_payload, match_payload, paths_payload, scomponents_payload, stats_payload
from .traverse import PathQuery

log = logging.getLogger(__name__)


class BadRequest(Exception):
    pass


@dataclass(frozen=True)
class Snapshot:
    graph: Hypergraph
    path: str | None


class Engine:
    """Holds the current snapshot; ``reload`` swaps it in one assignment."""

    def __init__(self, config: EngineConfig, graph: Hypergraph | None = None, store: EmbeddingStore | None = None,
                 provider=None):
        self.config = config
        self.provider = provider if provider is not None else provider_from_spec(config.embedding_provider)
        self._swap = threading.Lock()
        self._store_lock = threading.Lock()
        if graph is None:
            graph = snapshot.load(config.snapshot_path)
        self._snap = Snapshot(graph, config.snapshot_path)
        self._stores = {id(graph): store} if store is not None else {}
        CompiledIndex.of(graph)

    @property
    def current(self) -> Snapshot:
        return self._snap

    def reload(self, path: str | None = None) -> Snapshot:
        path = path or self.config.snapshot_path
        graph = snapshot.load(path)
        CompiledIndex.of(graph)  # build before publishing so readers never pay for it
        with self._swap:
            self._snap = Snapshot(graph, path)
            self._stores = {}
        return self._snap

    def store_for(self, snap: Snapshot) -> EmbeddingStore:
        with self._store_lock:
            store = self._stores.get(id(snap.graph))
            if store is None:
                cache = Path(self.config.store_path)
                if cache.exists():
                    store = EmbeddingStore.from_tsv(cache)
                store = embed_into(store, self.provider, sorted(snap.graph.nodes))
                if store is None:
                    raise ProviderError("graph has no nodes to embed")
                self._stores[id(snap.graph)] = store
            return store

    # -- request handling, independent of the HTTP plumbing ---------------

    def handle(self, method: str, raw_path: str, body: bytes | None) -> tuple[int, str]:
        snap = self.current
        url = urlparse(raw_path)
        query = {k: v[-1] for k, v in parse_qs(url.query).items()}
        try:
            if method == "GET" and url.path == "/stats":
                return 200, dump_json(stats_payload(snap.graph, self.config.pair_budget))
            if method == "GET" and url.path == "/hubs":
                return 200, dump_json(hubs_payload(snap.graph, _int(query, "top", 20), _int(query, "cooccur", 3)))
            if method == "GET" and url.path == "/scomponents":
                return 200, dump_json(scomponents_payload(
                    snap.graph, _int(query, "s", 1), _bool(query.get("singletons")), self.config.pair_budget))
            if method == "POST" and url.path == "/paths":
                req = _json_body(body)
                q = PathQuery(
                    _field(req, "start", str), _field(req, "end", str),
                    _field(req, "s", int, 1), _field(req, "k", int, 1),
                    _field(req, "allow_longer", bool, False),
                )
                return 200, dump_json(paths_payload(snap.graph, q))
            if method == "POST" and url.path == "/match":
                req = _json_body(body)
                keywords = _field(req, "keywords", list)
                threshold = float(_field(req, "threshold", (int, float), self.config.keyword_distance_threshold))
                store = self.store_for(snap)
                return 200, dump_json(match_payload(store, keywords, threshold, self.provider))
            if method == "POST" and url.path == "/reload":
                req = _json_body(body) if body else {}
                new = self.reload(_field(req, "path", str, None))
                return 200, dump_json({"reloaded": True, "nodes": new.graph.num_nodes, "edges": new.graph.num_edges})
        except BadRequest as exc:
            return 400, dump_json({"error": str(exc)})
        except NodeNotFoundError as exc:
            return 404, dump_json({"error": str(exc)})
        except ProviderError as exc:
            return 502, dump_json({"error": str(exc)})
        except (ContractError, HyperKGError) as exc:
            return 400, dump_json({"error": str(exc)})
        return 404, dump_json({"error": f"no route for {method} {url.path}"})


def _json_body(body: bytes | None) -> dict:
    try:
        req = json.loads((body or b"").decode("utf-8"))
    except (UnicodeDecodeError, json.JSONDecodeError) as exc:
        raise BadRequest(f"body is not valid JSON: {exc}") from None
    if not isinstance(req, dict):
        raise BadRequest("body must be a JSON object")
    return req


_MISSING = object()


def _field(req: dict, name: str, kind, default=_MISSING):
    if name not in req:
        if default is _MISSING:
            raise BadRequest(f"missing field {name!r}")
        return default
    value = req[name]
    # bool is an int subclass; do not accept true/false for integer fields
    if kind is int and isinstance(value, bool) or not isinstance(value, kind):
        raise BadRequest(f"field {name!r} has the wrong type")
    return value


def _int(query: dict, name: str, default: int) -> int:
    if name not in query:
        return default
    try:
        return int(query[name])
    except ValueError:
        raise BadRequest(f"query parameter {name!r} must be an integer") from None


def _bool(raw) -> bool:
    return str(raw).lower() in {"1", "true", "yes"}


class _Handler(BaseHTTPRequestHandler):
    engine: Engine
    protocol_version = "HTTP/1.1"

    def _respond(self, method):
        length = int(self.headers.get("Content-Length") or 0)
        body = self.rfile.read(length) if length else None
        status, text = self.engine.handle(method, self.path, body)
        data = text.encode("utf-8")
        self.send_response(status)
        self.send_header("Content-Type", "application/json; charset=utf-8")
        self.send_header("Content-Length", str(len(data)))
        self.end_headers()
        self.wfile.write(data)

    def do_GET(self):
        self._respond("GET")

    def do_POST(self):
        self._respond("POST")

    def log_message(self, fmt, *args):
        log.debug("%s - " + fmt, self.address_string(), *args)


def make_server(engine: Engine, host: str = "127.0.0.1", port: int = 8080) -> ThreadingHTTPServer:
    handler = type("Handler", (_Handler,), {"engine": engine})
    server = ThreadingHTTPServer((host, port), handler)
    server.daemon_threads = True
    return server


def serve(config: EngineConfig, host: str = "127.0.0.1", port: int = 8080) -> None:
    engine = Engine(config)
    server = make_server(engine, host, port)
    log.info("serving %s on http://%s:%d", config.snapshot_path, host, server.server_port)
    try:
        server.serve_forever()
    finally:
        server.server_close()
