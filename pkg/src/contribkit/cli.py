"""Contributor command line: validate, apply recipes, preview, submit.

Exit codes are a stable contract:

* 0 success
* 1 validation errors (or per-item submission failures)
* 2 unreadable input or unusable configuration
* 3 authentication/permission failure
* 4 revision conflict
* 5 transport failure (endpoint unreachable, malformed response, 5xx)
"""

from __future__ import annotations

import argparse
import concurrent.futures
import os
import sys
from pathlib import Path

import httpx

from . import recipes, wire
from .config import CliConfig, ConfigError, ServiceConfig, load_cli_config
from .ingest import preview_store, preview_text, submit_text
from .mpfile import parse_with_findings, serialize_mpfile, validate_text
from .service import create_app

__all__ = ["main", "run"]

EXIT_OK = 0
EXIT_VALIDATION = 1
EXIT_UNREADABLE = 2
EXIT_AUTH = 3
EXIT_CONFLICT = 4
EXIT_TRANSPORT = 5


def _read(path: str) -> str:
    try:
        return Path(path).read_text(encoding="utf-8")
    except (OSError, UnicodeDecodeError) as exc:
        raise SystemExit(_fail(EXIT_UNREADABLE, f"cannot read {path}: {exc}"))


def _fail(code: int, message: str) -> int:
    print(message, file=sys.stderr)
    return code


def _print_report(report) -> None:
    for finding in report.errors:
        print(f"error: {finding}")
    for finding in report.warnings:
        print(f"warning: {finding}")


def cmd_validate(args: argparse.Namespace) -> int:
    text = _read(args.file)
    report = validate_text(text, source_name=args.file)
    _print_report(report)
    if report.ok:
        print(f"{args.file}: OK ({len(report.warnings)} warning(s))")
        return EXIT_OK
    print(f"{args.file}: {len(report.errors)} error(s)")
    return EXIT_VALIDATION


def cmd_apply(args: argparse.Namespace) -> int:
    text = _read(args.file)
    doc, findings = parse_with_findings(text, args.file)
    if findings:
        for f in findings:
            print(f"error: {f}")
        return EXIT_VALIDATION
    out_path = Path(args.out or args.file)
    sections = recipes.analysis_sections(doc)
    if not sections:
        # nothing to do: pass the input through untouched
        out_path.write_text(text, encoding="utf-8")
        print(f"{args.file}: no recipe sections, copied unchanged")
        return EXIT_OK
    if not args.raw:
        return _fail(EXIT_VALIDATION, "recipe sections present; --raw <dir> is required")
    raw: dict[str, recipes.PolarizedPair] = {}
    for root, analysis in sections:
        try:
            raw[f"{root.name}/{analysis.name}"] = recipes.load_pair(args.raw, analysis.name)
        except FileNotFoundError as exc:
            return _fail(EXIT_VALIDATION, str(exc))
        except recipes.RecipeError as exc:
            return _fail(EXIT_VALIDATION, f"{analysis.name}: {exc}")
    try:
        processed = recipes.apply_recipes(doc, raw)
    except recipes.RecipeError as exc:
        return _fail(EXIT_VALIDATION, str(exc))
    rendered = serialize_mpfile(processed)
    report = validate_text(rendered, source_name=str(out_path))
    if not report.ok:
        _print_report(report)
        return _fail(EXIT_VALIDATION, "recipe output does not validate; refusing to write")
    out_path.write_text(rendered, encoding="utf-8")
    print(f"wrote {out_path} ({len(sections)} analysis section(s) processed)")
    return EXIT_OK


def _cli_config(args: argparse.Namespace) -> CliConfig:
    try:
        cfg = load_cli_config(getattr(args, "config", None))
    except ConfigError as exc:
        raise SystemExit(_fail(EXIT_UNREADABLE, str(exc)))
    if getattr(args, "endpoint", None):
        cfg.endpoint = args.endpoint
    if getattr(args, "key", None):
        cfg.api_key = args.key
    if getattr(args, "project", None):
        cfg.project = args.project
    return cfg


def _exit_for_status(status: int) -> int:
    if status in (401, 403):
        return EXIT_AUTH
    if status == 409:
        return EXIT_CONFLICT
    if status >= 500:
        return EXIT_TRANSPORT
    if status >= 400:
        return EXIT_VALIDATION
    return EXIT_OK


def _exit_for_submission(payload: dict, status: int) -> int:
    codes = {item.get("status") for item in payload.get("results", [])}
    codes.add(status)
    codes.discard(207)
    return max((_exit_for_status(c) for c in codes if isinstance(c, int)), default=EXIT_OK)


def cmd_submit(args: argparse.Namespace) -> int:
    cfg = _cli_config(args)
    if not cfg.endpoint:
        return _fail(EXIT_UNREADABLE, "no endpoint configured (flag --endpoint, "
                     "CONTRIBKIT_ENDPOINT, or config file)")
    text = _read(args.file)
    params = {}
    if cfg.project:
        params["project"] = cfg.project
    headers = {"content-type": "text/plain; charset=utf-8"}
    if cfg.api_key:
        headers["X-API-KEY"] = cfg.api_key
    if args.expected_revision is not None or args.cid:
        body = {"mpfile": text}
        if args.expected_revision is not None:
            body["expected_revision"] = args.expected_revision
        if args.cid:
            body["cid"] = args.cid
        if cfg.project:
            body["project"] = cfg.project
        headers["content-type"] = "application/json"
        content = wire.dumps(body)
    else:
        content = text
    try:
        response = httpx.post(
            cfg.endpoint.rstrip("/") + "/api/v1/contributions",
            content=content.encode("utf-8"),
            headers=headers,
            params=params,
            timeout=60.0,
        )
        payload = response.json()
    except (httpx.HTTPError, ValueError) as exc:
        return _fail(EXIT_TRANSPORT, f"submission failed: {exc}")
    if "detail" in payload and "results" not in payload:
        print(f"error: {payload['detail']}")
        return _exit_for_status(response.status_code) or EXIT_TRANSPORT
    if payload.get("error"):
        print(f"error: {payload['error']}")
    for item in payload.get("results", []):
        if item.get("cid"):
            print(f"{item['name']}: {item['cid']} revision {item['revision']}")
        else:
            print(f"{item['name']}: ERROR {item.get('error', item['status'])}")
    return _exit_for_submission(payload, response.status_code)


def _bulk_files(target: str) -> list[Path]:
    path = Path(target)
    if path.is_dir():
        files = sorted(path.glob("*.mpf"))
        if not files:
            raise SystemExit(_fail(EXIT_UNREADABLE, f"no .mpf files under {path}"))
        return files
    if path.is_file():
        return [path]
    raise SystemExit(_fail(EXIT_UNREADABLE, f"no such file or directory: {path}"))


def _stream_batch(files: list[Path]):
    for p in files:
        yield p.read_bytes()
        yield b"\n---\n"


def cmd_bulk(args: argparse.Namespace) -> int:
    cfg = _cli_config(args)
    if not cfg.endpoint:
        return _fail(EXIT_UNREADABLE, "no endpoint configured (flag --endpoint, "
                     "CONTRIBKIT_ENDPOINT, or config file)")
    files = _bulk_files(args.path)
    headers = {"content-type": "text/plain; charset=utf-8"}
    if cfg.api_key:
        headers["X-API-KEY"] = cfg.api_key
    params = {}
    if cfg.project:
        params["project"] = cfg.project
    url = cfg.endpoint.rstrip("/") + "/api/v1/contributions/bulk"

    jobs = max(1, args.jobs)
    batches = [files[i::jobs] for i in range(jobs)]
    batches = [b for b in batches if b]

    def post(batch: list[Path]) -> tuple[int, dict]:
        response = httpx.post(
            url, content=_stream_batch(batch), headers=headers, params=params, timeout=600.0
        )
        return response.status_code, response.json()

    accepted = 0
    rejected = 0
    worst = EXIT_OK
    try:
        with concurrent.futures.ThreadPoolExecutor(max_workers=jobs) as pool:
            for status, payload in pool.map(post, batches):
                if "accepted" not in payload:
                    print(f"error: {payload.get('detail', payload)}")
                    worst = max(worst, _exit_for_status(status) or EXIT_TRANSPORT)
                    continue
                accepted += payload["accepted"]
                rejected += len(payload["rejected"])
                for index, message in payload["rejected"][:10]:
                    print(f"rejected[{index}]: {message}")
    except (httpx.HTTPError, ValueError) as exc:
        return _fail(EXIT_TRANSPORT, f"bulk submission failed: {exc}")
    print(f"accepted={accepted} rejected={rejected} submitted={accepted + rejected}")
    if rejected and worst == EXIT_OK:
        worst = EXIT_VALIDATION
    return worst


def cmd_view(args: argparse.Namespace) -> int:
    text = _read(args.file)
    report = validate_text(text, source_name=args.file)
    if not report.ok:
        _print_report(report)
        return EXIT_VALIDATION
    if not args.serve:
        dataset = preview_text(text, source=args.file)
        rendered = wire.dumps(dataset)
        if args.out:
            Path(args.out).write_text(rendered, encoding="utf-8")
            print(f"wrote preview dataset to {args.out}")
        else:
            print(rendered)
        return EXIT_OK

    store, ctx = preview_store()
    result = submit_text(text, store, ctx, source=args.file)
    if result.status not in (200, 201):
        print(f"error: preview submission failed with status {result.status}")
        for item in result.items:
            if item.error:
                print(f"  {item.name}: {item.error}")
        return EXIT_VALIDATION
    config = ServiceConfig(port=args.port, api_keys={"preview": ctx})
    frontend = os.environ.get("CONTRIBKIT_UI_DIR")
    if frontend is None and Path("frontend/dist").is_dir():
        frontend = "frontend/dist"
    app = create_app(store=store, config=config, frontend_dir=frontend)
    names = ", ".join(i.name for i in result.items)
    print(f"previewing {names} (staged)")
    print(f"API at http://{config.host}:{config.port}/api/v1, header X-API-KEY: preview")
    if frontend:
        print(f"viewer at http://{config.host}:{config.port}/ui/")
    import uvicorn

    uvicorn.run(app, host=config.host, port=config.port, log_level="warning")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="contribkit",
        description="Validate, pre-process, preview, and submit contribution files.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("validate", help="check a file and print all findings")
    p.add_argument("file")
    p.set_defaults(func=cmd_validate)

    p = sub.add_parser("apply", help="run recipe sections against raw spectra")
    p.add_argument("file")
    p.add_argument("--raw", help="directory holding <analysis>.plus.txt/.minus.txt")
    p.add_argument("--out", help="write here instead of rewriting the input")
    p.set_defaults(func=cmd_apply)

    for name, helptext in (
        ("submit", "submit one file to the service"),
        ("bulk", "submit a directory (or pre-joined stream) in bulk"),
    ):
        p = sub.add_parser(name, help=helptext)
        if name == "submit":
            p.add_argument("file")
            p.add_argument("--cid", help="target an existing contribution")
            p.add_argument("--expected-revision", type=int, default=None)
            p.set_defaults(func=cmd_submit)
        else:
            p.add_argument("path")
            p.add_argument("--jobs", type=int, default=4, help="parallel uploads (default 4)")
            p.set_defaults(func=cmd_bulk)
        p.add_argument("--endpoint")
        p.add_argument("--key")
        p.add_argument("--project")
        p.add_argument("--config")

    p = sub.add_parser("view", help="simulate a submission locally")
    p.add_argument("file")
    p.add_argument("--serve", action="store_true", help="start a local preview server")
    p.add_argument("--port", type=int, default=8421)
    p.add_argument("--out", help="write the preview dataset to a file")
    p.set_defaults(func=cmd_view)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        return args.func(args)
    except SystemExit as exc:
        # argparse and the helpers raise SystemExit; fold it into the
        # return-code contract so callers can treat main() as a function
        return exc.code if isinstance(exc.code, int) else EXIT_UNREADABLE



def run() -> None:
    sys.exit(main())


if __name__ == "__main__":
    run()
