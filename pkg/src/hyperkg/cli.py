"""``hkg`` command-line driver. Exit codes: 0 ok, 1 usage error, 2 data error."""

from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path

from . import snapshot
from .config import EngineConfig
from .core import Hypergraph
from .dedup import dedup_pass, merge_audit_rows, write_audit
from .embeddings import EmbeddingStore, provider_from_spec
from .errors import HyperKGError
from .ingest import parse_events
from .payloads import (
    dump_json,
    hubs_payload,
    match_payload,
    paths_payload,
    richclub_payload,
    scomponents_payload,
    signatures_tsv,
    stats_payload,
)
from .pipeline import build_graph
from .projections import PROJECTIONS
from .traverse import PathQuery

EXIT_OK, EXIT_USAGE, EXIT_DATA = 0, 1, 2


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def __init__(self, *args, **kwargs):
        # prefix matching would read a subcommand's --s as the global --snapshot
        kwargs.setdefault("allow_abbrev", False)
        super().__init__(*args, **kwargs)

    def error(self, message):
        raise UsageError(f"{self.format_usage()}{self.prog}: error: {message}")


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="hkg", description="Hypergraph knowledge store: build, analyze, traverse.")
    p.add_argument("--snapshot", help="snapshot file (env HKG_SNAPSHOT_PATH)")
    p.add_argument("--embeddings", help="embedding provider: URL, TSV file or hash[:dim] (env HKG_EMBEDDING_PROVIDER)")
    p.add_argument("--store", help="node-embedding cache TSV (default <snapshot>.emb.tsv)")
    p.add_argument("--pair-budget", type=int, help="max pair entries materialised per block")
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", parser_class=_Parser)
    sub.required = True

    ing = sub.add_parser("ingest", help="parse an event JSONL file and merge it into the snapshot")
    ing.add_argument("events")
    ing.add_argument("--fresh", action="store_true", help="start from an empty graph instead of the snapshot")
    ing.add_argument("--skip-invalid", action="store_true", help="drop bad lines instead of aborting")
    ing.add_argument("--dedup", action="store_true", help="run gated merge passes while ingesting")
    ing.add_argument("--theta", type=float)
    ing.add_argument("--frequency", type=int)
    ing.add_argument("--audit", help="append merge-plan audit rows (JSONL) here")

    dd = sub.add_parser("dedup", help="one merge pass over every node")
    dd.add_argument("--theta", type=float)
    dd.add_argument("--max-class-size", type=int)
    dd.add_argument("--audit")

    sub.add_parser("stats", help="summary statistics as JSON")

    hubs = sub.add_parser("hubs", help="ego-network report of the top-degree nodes")
    hubs.add_argument("--top", type=int, default=20)
    hubs.add_argument("--cooccur", type=int, default=3)

    rc = sub.add_parser("richclub", help="rich-club coefficient at degree threshold(s)")
    rc.add_argument("--k", type=int, action="append", required=True)

    sc = sub.add_parser("scomponents", help="s-connected components")
    sc.add_argument("--s", type=int, required=True)
    sc.add_argument("--singletons", action="store_true")

    pr = sub.add_parser("project", help="export a dyadic projection as a sorted edge list")
    pr.add_argument("--kind", choices=sorted(PROJECTIONS), required=True)

    pa = sub.add_parser("path", help="constrained shortest hyperpaths")
    pa.add_argument("--start", required=True)
    pa.add_argument("--end", required=True)
    pa.add_argument("--s", type=int, default=1)
    pa.add_argument("--k", type=int, default=1)
    pa.add_argument("--allow-longer", action="store_true")

    ma = sub.add_parser("match", help="map keywords to their nearest node labels")
    ma.add_argument("keywords", nargs="+")
    ma.add_argument("--threshold", type=float)

    sg = sub.add_parser("signatures", help="per-node structural signature TSV")
    sg.add_argument("--standardized", action="store_true")

    sv = sub.add_parser("serve", help="run the JSON query service")
    sv.add_argument("--port", type=int, default=8080)
    sv.add_argument("--host", default="127.0.0.1")
    return p


def _load(config: EngineConfig) -> Hypergraph:
    if not Path(config.snapshot_path).exists():
        raise HyperKGError(f"snapshot {config.snapshot_path} does not exist")
    return snapshot.load(config.snapshot_path)


def _load_store(config: EngineConfig):
    path = Path(config.store_path)
    return EmbeddingStore.from_tsv(path) if path.exists() else None


def _write_audit(path, rows):
    if path and rows:
        with open(path, "a", encoding="utf-8") as fh:
            write_audit(rows, fh)


def run(args, config: EngineConfig, out, err=None) -> int:
    err = err or sys.stderr
    cmd = args.command
    if cmd == "ingest":
        provider = provider_from_spec(config.embedding_provider) if args.dedup else None
        if args.dedup and provider is None:
            raise UsageError("--dedup needs an embedding provider (--embeddings or HKG_EMBEDDING_PROVIDER)")
        base = None if args.fresh or not Path(config.snapshot_path).exists() else snapshot.load(config.snapshot_path)
        rejected = []
        with open(args.events, encoding="utf-8") as fh:
            events = parse_events(fh, skip_invalid=args.skip_invalid, rejected=rejected)
        for bad in rejected:
            print(f"skipped {bad}", file=err)
        builder = build_graph(
            events, provider,
            theta=args.theta or config.similarity_threshold,
            frequency=args.frequency or config.merge_frequency,
            base=base, store=_load_store(config) if provider else None,
            max_class_size=config.max_class_size,
        )
        snapshot.save(builder.graph, config.snapshot_path)
        if builder.store is not None:
            builder.store.to_tsv(config.store_path)
        _write_audit(args.audit, builder.audit)
        out.write(dump_json({
            "events": len(events), "rejected": len(rejected), "documents": builder.documents_seen,
            "nodes": builder.graph.num_nodes, "edges": builder.graph.num_edges,
        }))
    elif cmd == "dedup":
        provider = provider_from_spec(config.embedding_provider)
        if provider is None:
            raise UsageError("dedup needs an embedding provider (--embeddings or HKG_EMBEDDING_PROVIDER)")
        graph = _load(config)
        new_graph, store, plan = dedup_pass(
            graph, _load_store(config), sorted(graph.nodes), args.theta or config.similarity_threshold,
            provider, max_class_size=args.max_class_size or config.max_class_size,
        )
        _write_audit(args.audit, merge_audit_rows(graph, plan))
        snapshot.save(new_graph, config.snapshot_path)
        if store is not None:
            store.to_tsv(config.store_path)
        out.write(dump_json({"classes": len(plan.classes), "nodes": new_graph.num_nodes, "edges": new_graph.num_edges}))
    elif cmd == "stats":
        out.write(dump_json(stats_payload(_load(config), config.pair_budget)))
    elif cmd == "hubs":
        out.write(dump_json(hubs_payload(_load(config), args.top, args.cooccur)))
    elif cmd == "richclub":
        graph = _load(config)
        reports = [richclub_payload(graph, k) for k in args.k]
        out.write(dump_json(reports[0] if len(reports) == 1 else reports))
    elif cmd == "scomponents":
        out.write(dump_json(scomponents_payload(_load(config), args.s, args.singletons, config.pair_budget)))
    elif cmd == "project":
        lines = PROJECTIONS[args.kind](_load(config)).edge_list()
        out.write("".join(line + "\n" for line in lines))
    elif cmd == "path":
        query = PathQuery(args.start, args.end, args.s, args.k, args.allow_longer)
        out.write(dump_json(paths_payload(_load(config), query)))
    elif cmd == "match":
        from .service import Engine

        engine = Engine(config, _load(config))
        store = engine.store_for(engine.current)
        threshold = args.threshold if args.threshold is not None else config.keyword_distance_threshold
        out.write(dump_json(match_payload(store, args.keywords, threshold, engine.provider)))
    elif cmd == "signatures":
        out.write(signatures_tsv(_load(config), args.standardized))
    elif cmd == "serve":
        from .service import serve

        serve(config, args.host, args.port)
    return EXIT_OK


def main(argv=None, out=None, err=None) -> int:
    out = out or sys.stdout
    err = err or sys.stderr
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING)
        config = EngineConfig.from_env(
            snapshot_path=args.snapshot,
            embedding_provider=args.embeddings,
            embedding_store=args.store,
            pair_budget=args.pair_budget,
        )
        return run(args, config, out, err)
    except UsageError as exc:
        print(str(exc), file=err)
        return EXIT_USAGE
    except (HyperKGError, OSError) as exc:
        print(f"hkg: error: {exc}", file=err)
        return EXIT_DATA


def main_entry():
    sys.exit(main())
