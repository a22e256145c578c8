"""Latency of constrained path queries over random endpoint pairs.

Queries go through a local HTTP server by default; --in-process skips it.
"""

import argparse
import json
import random
import threading
import time
import urllib.request

import numpy as np

from hyperkg import snapshot
from hyperkg.config import EngineConfig
from hyperkg.payloads import paths_payload
from hyperkg.service import Engine, make_server
from hyperkg.synthetic import SyntheticConfig, synthetic_hypergraph
from hyperkg.traverse import PathQuery


def main():
    p = argparse.ArgumentParser(description=__doc__)
    p.add_argument("--snapshot")
    p.add_argument("--queries", type=int, default=1000)
    p.add_argument("--s", type=int, default=1)
    p.add_argument("--k", type=int, default=3)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--in-process", action="store_true")
    args = p.parse_args()

    t = time.perf_counter()
    g = snapshot.load(args.snapshot) if args.snapshot else synthetic_hypergraph(SyntheticConfig())
    engine = Engine(EngineConfig(), graph=g)
    print(f"{g.num_nodes} nodes / {g.num_edges} edges ready in {time.perf_counter() - t:.1f}s")

    labels = sorted(g.nodes)
    rng = random.Random(args.seed)
    pairs = [rng.sample(labels, 2) for _ in range(args.queries)]

    if args.in_process:
        def query(a, b):
            return paths_payload(g, PathQuery(a, b, args.s, args.k))
        server = None
    else:
        server = make_server(engine, port=0)
        threading.Thread(target=server.serve_forever, daemon=True).start()
        url = f"http://127.0.0.1:{server.server_port}/paths"

        def query(a, b):
            body = json.dumps({"start": a, "end": b, "s": args.s, "k": args.k}).encode()
            with urllib.request.urlopen(urllib.request.Request(url, data=body, method="POST")) as resp:
                return json.loads(resp.read())

    latencies, found = [], 0
    for a, b in pairs:
        t = time.perf_counter()
        found += bool(query(a, b)["paths"])
        latencies.append(time.perf_counter() - t)
    if server:
        server.shutdown()

    p50, p95, p99 = np.percentile(np.array(latencies) * 1e3, [50, 95, 99])
    print(f"{args.queries} queries, {found} with a path: p50 {p50:.1f} ms, p95 {p95:.1f} ms, p99 {p99:.1f} ms")


if __name__ == "__main__":
    main()
