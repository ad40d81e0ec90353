#!/usr/bin/env python3
"""Desk-scale bulk ingestion benchmark.

Streams N synthetic single-table contributions through the bulk endpoint
of an in-process service, in fixed-size chunks so the splitter's
high-water mark is meaningful, and reports throughput plus the memory
bound.  A fraction of documents is deliberately malformed to exercise
per-item isolation.

    python scripts/bulk_benchmark.py --count 100000 --salt 0.01
"""

import argparse
import asyncio
import json
import random
import time

from contribkit.config import ServiceConfig
from contribkit.service import create_app
from contribkit.store import AccessContext, ContributionStore

KEY = "bench"


def build_stream(count: int, salt: float, seed: int) -> tuple[bytes, int]:
    rng = random.Random(seed)
    parts = []
    bad = 0
    for i in range(count):
        if rng.random() < salt:
            parts.append(b">>>>> broken\n")
            bad += 1
        else:
            parts.append(
                f">>> blk-{i}\n>>>> Series\nx,y\n0,{rng.random():.6f}\n1,{rng.random():.6f}\n".encode()
            )
        parts.append(b"---\n")
    return b"".join(parts), bad


def post_stream(app, stream: bytes, chunk_size: int) -> tuple[int, bytes]:
    chunks = [stream[o:o + chunk_size] for o in range(0, len(stream), chunk_size)]
    scope = {
        "type": "http",
        "http_version": "1.1",
        "method": "POST",
        "path": "/api/v1/contributions/bulk",
        "raw_path": b"/api/v1/contributions/bulk",
        "query_string": b"",
        "headers": [(b"host", b"bench"), (b"x-api-key", KEY.encode())],
        "scheme": "http",
    }
    feed = [{"type": "http.request", "body": c, "more_body": True} for c in chunks]
    feed.append({"type": "http.request", "body": b"", "more_body": False})
    feed.append({"type": "http.disconnect"})
    it = iter(feed)
    out = {"status": None, "body": b""}

    async def receive():
        return next(it)

    async def send(message):
        if message["type"] == "http.response.start":
            out["status"] = message["status"]
        elif message["type"] == "http.response.body":
            out["body"] += message.get("body", b"")

    asyncio.run(app(scope, receive, send))
    return out["status"], out["body"]


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--count", type=int, default=100_000)
    parser.add_argument("--salt", type=float, default=0.01,
                        help="fraction of malformed documents")
    parser.add_argument("--chunk", type=int, default=64 * 1024)
    parser.add_argument("--seed", type=int, default=0)
    args = parser.parse_args(argv)

    store = ContributionStore()
    ctx = AccessContext(account="bench", groups=frozenset({"blk"}), is_admin=False)
    app = create_app(store=store, config=ServiceConfig(api_keys={KEY: ctx}))

    stream, bad = build_stream(args.count, args.salt, args.seed)
    print(f"stream: {args.count} documents, {len(stream) / 1e6:.1f} MB, "
          f"{bad} malformed, {args.chunk} B chunks")

    t0 = time.perf_counter()
    status, body = post_stream(app, stream, args.chunk)
    elapsed = time.perf_counter() - t0
    if status != 200:
        print(f"unexpected status {status}: {body[:200]!r}")
        return 1

    report = json.loads(body)
    rate = report["submitted"] / elapsed
    print(f"accepted={report['accepted']} rejected={len(report['rejected'])} "
          f"submitted={report['submitted']}")
    print(f"wall {elapsed:.2f} s  ({rate:,.0f} docs/s)  "
          f"server-side {report['elapsed']:.2f} s")
    print(f"high-water mark {report['max_buffered']:,} B of a "
          f"{len(stream):,} B stream")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
