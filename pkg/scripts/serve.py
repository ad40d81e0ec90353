#!/usr/bin/env python3
"""Start the contribution service.

Reads the service table and API keys from a TOML config (see README),
attaches durable storage when data_dir is set, loads an optional core
materials index, and mounts the static viewer bundle if present.

    python scripts/serve.py --config service.toml
    python scripts/serve.py --port 9000 --data-dir ./data --core core.tsv
"""

import argparse
import sys
from pathlib import Path

from contribkit.builder import load_core_index
from contribkit.config import ConfigError, load_service_config
from contribkit.service import serve
from contribkit.store import ContributionStore, FileBackend

REPO = Path(__file__).resolve().parent.parent


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--config", help="TOML config with [service] and [keys.*] tables")
    parser.add_argument("--host", help="listen address override")
    parser.add_argument("--port", type=int, help="listen port override")
    parser.add_argument("--data-dir", help="directory for the write log and snapshots")
    parser.add_argument("--core", help="core materials index (TSV)")
    parser.add_argument("--frontend", help="static viewer directory to mount at /ui")
    args = parser.parse_args(argv)

    try:
        config = load_service_config(args.config)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    if args.host:
        config.host = args.host
    if args.port:
        config.port = args.port
    if args.data_dir:
        config.data_dir = args.data_dir

    backend = FileBackend(config.data_dir) if config.data_dir else None
    store = ContributionStore(backend=backend)

    core = []
    if args.core:
        core = load_core_index(args.core)
        print(f"core index: {len(core)} materials")

    frontend = args.frontend
    if frontend is None and (REPO / "frontend" / "dist").is_dir():
        frontend = REPO / "frontend" / "dist"

    where = f"http://{config.host}:{config.port}"
    print(f"serving on {where}  (keys: {len(config.api_keys)}, "
          f"durable: {bool(backend)}, ui: {bool(frontend)})")
    serve(store, config, core=core, frontend_dir=frontend)
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
