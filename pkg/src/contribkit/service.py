"""REST boundary: submission, bulk streaming, queries, review, grid search.

All handlers are thin wrappers over the library pipeline (``ingest``) and
the store/builder modules, so the service's observable behavior is the
library's.  Responses are encoded through :mod:`contribkit.wire`, which
keeps GET payload bytes identical to what the CLI preview produces.

Endpoints (all under ``/api/v1``):

* ``POST /contributions`` — submit one document (raw text or structured).
* ``POST /contributions/bulk`` — streaming multi-document submission,
  documents separated by ``---`` lines; constant memory per document.
* ``GET /contributions`` / ``GET /contributions/{cid}`` — paginated list
  and single fetch, sandbox rules applied, denials masked as 404.
* ``PATCH /contributions/{cid}/state`` — review transitions.
* ``GET /index/grid`` / ``GET /index/region`` — binned 2D property grid
  and exact region membership.
* ``GET /materials/{identifier}`` — merged per-material detail view.
* ``POST /postprocess`` — run a registered batch processor (``grid``).
* ``GET /health``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path
from time import perf_counter

from fastapi import Depends, FastAPI, Request
from fastapi.exceptions import RequestValidationError
from fastapi.responses import JSONResponse, Response
from fastapi.staticfiles import StaticFiles

from . import builder, wire
from .builder import CoreMaterial, EmptyIndexError, UnknownProcessorError
from .config import ServiceConfig
from .identifiers import CompositionId, CoreId, IdentifierError, parse_identifier
from .ingest import record_payload, submit_document, submit_text
from .store import (
    ANONYMOUS,
    AccessContext,
    ContributionStore,
    IllegalTransitionError,
    NotFoundError,
    PermissionDeniedError,
    STATES,
)

__all__ = ["DocumentStreamSplitter", "create_app", "serve"]

API_KEY_HEADER = "X-API-KEY"


@dataclass
class ServiceState:
    store: ContributionStore
    config: ServiceConfig
    core: list[CoreMaterial] = field(default_factory=list)
    grids: dict[str, builder.GridIndex] = field(default_factory=dict)


class DocumentStreamSplitter:
    """Incremental splitter for ``---``-separated document streams.

    Buffers only the current document plus one incomplete line;
    ``max_buffered`` records the high-water mark so tests can prove the
    stream was never held in memory whole.
    """

    def __init__(self) -> None:
        self._tail = bytearray()
        self._doc = bytearray()
        self.max_buffered = 0

    def _note(self) -> None:
        buffered = len(self._tail) + len(self._doc)
        if buffered > self.max_buffered:
            self.max_buffered = buffered

    def feed(self, chunk: bytes) -> list[bytes]:
        self._tail += chunk
        self._note()
        docs: list[bytes] = []
        while True:
            nl = self._tail.find(b"\n")
            if nl < 0:
                break
            line = bytes(self._tail[: nl + 1])
            del self._tail[: nl + 1]
            if line.rstrip(b"\r\n") == b"---":
                docs.append(bytes(self._doc))
                self._doc.clear()
            else:
                self._doc += line
        return docs

    def finish(self) -> list[bytes]:
        self._doc += self._tail
        self._tail.clear()
        if self._doc.strip():
            doc = bytes(self._doc)
            self._doc.clear()
            return [doc]
        self._doc.clear()
        return []


def _error(status: int, detail: str) -> JSONResponse:
    return JSONResponse({"detail": detail}, status_code=status)


def _wire_response(payload: dict, status: int = 200) -> Response:
    return Response(wire.dumps(payload), status_code=status, media_type="application/json")


def create_app(
    store: ContributionStore | None = None,
    config: ServiceConfig | None = None,
    core: list[CoreMaterial] | None = None,
    frontend_dir: str | Path | None = None,
) -> FastAPI:
    state = ServiceState(
        store=store if store is not None else ContributionStore(),
        config=config or ServiceConfig(),
        core=core or [],
    )
    app = FastAPI(title="contribkit", docs_url=None, redoc_url=None)
    app.state.ck = state

    @app.exception_handler(RequestValidationError)
    async def bad_request(_request: Request, exc: RequestValidationError):
        first = exc.errors()[0] if exc.errors() else {}
        where = ".".join(str(p) for p in first.get("loc", ()))
        return _error(400, f"bad request: {where}: {first.get('msg', 'invalid')}")

    def ctx_for(request: Request) -> AccessContext:
        token = request.headers.get(API_KEY_HEADER)
        if token is None:
            return ANONYMOUS
        return state.config.api_keys.get(token, ANONYMOUS)

    # -- submission -----------------------------------------------------------

    @app.post("/api/v1/contributions")
    async def post_contribution(request: Request, ctx: AccessContext = Depends(ctx_for)):
        if ctx.account is None and not ctx.is_admin:
            return _error(401, "submissions need an API key bound to an account")
        project = request.query_params.get("project")
        cid = None
        expected_revision = None
        body = await request.body()
        content_type = request.headers.get("content-type", "")
        if content_type.startswith("application/json"):
            try:
                data = wire.loads(body)
            except ValueError:
                return _error(400, "request body is not valid JSON")
            if not isinstance(data, dict):
                return _error(400, "JSON body must be an object")
            project = data.get("project", project)
            cid = data.get("cid")
            expected_revision = data.get("expected_revision")
            if ("mpfile" in data) == ("document" in data):
                return _error(400, "provide exactly one of 'mpfile' or 'document'")
            if "mpfile" in data:
                if not isinstance(data["mpfile"], str):
                    return _error(400, "'mpfile' must be a string")
                text = data["mpfile"]
            else:
                try:
                    doc = wire.document_from_payload(data["document"])
                except (ValueError, TypeError) as exc:
                    return _error(400, f"bad structured document: {exc}")
                result = submit_document(
                    doc, state.store, ctx, project, expected_revision, cid
                )
                return _wire_response(result.payload(), result.status)
        else:
            try:
                text = body.decode("utf-8")
            except UnicodeDecodeError:
                return _error(400, "request body is not UTF-8 text")
        result = submit_text(
            text, state.store, ctx, project, expected_revision, cid
        )
        return _wire_response(result.payload(), result.status)

    @app.post("/api/v1/contributions/bulk")
    async def post_bulk(request: Request, ctx: AccessContext = Depends(ctx_for)):
        if ctx.account is None and not ctx.is_admin:
            return _error(401, "submissions need an API key bound to an account")
        project = request.query_params.get("project")
        started = perf_counter()
        splitter = DocumentStreamSplitter()
        accepted = 0
        rejected: list[list] = []
        doc_index = 0
        total_bytes = 0

        def handle(doc_bytes: bytes) -> None:
            nonlocal accepted, doc_index
            if not doc_bytes.strip():
                return
            index = doc_index
            doc_index += 1
            try:
                text = doc_bytes.decode("utf-8")
            except UnicodeDecodeError:
                rejected.append([index, "document is not UTF-8 text"])
                return
            result = submit_text(text, state.store, ctx, project)
            if result.error is not None:
                rejected.append([index, result.error])
                return
            for item in result.items:
                if item.status in (200, 201):
                    accepted += 1
                else:
                    rejected.append([index, f"{item.name}: {item.error}"])

        async for chunk in request.stream():
            total_bytes += len(chunk)
            if total_bytes > state.config.bulk_size_cap:
                return _error(
                    413,
                    f"stream exceeds the bulk size cap of {state.config.bulk_size_cap} bytes",
                )
            for doc_bytes in splitter.feed(chunk):
                handle(doc_bytes)
        for doc_bytes in splitter.finish():
            handle(doc_bytes)

        return _wire_response(
            {
                "accepted": accepted,
                "rejected": rejected,
                "submitted": accepted + len(rejected),
                "elapsed": perf_counter() - started,
                "max_buffered": splitter.max_buffered,
            }
        )

    # -- retrieval ------------------------------------------------------------

    @app.get("/api/v1/contributions")
    async def list_contributions(
        request: Request,
        project: str | None = None,
        identifier: str | None = None,
        contributor: str | None = None,
        limit: int = 100,
        offset: int = 0,
        ctx: AccessContext = Depends(ctx_for),
    ):
        # "state" would shadow the service state closure, so it comes from
        # the raw query string instead of the signature.
        state_ = request.query_params.get("state")
        if state_ is not None and state_ not in STATES:
            return _error(400, f"unknown state {state_!r}")
        if limit < 1 or offset < 0:
            return _error(400, "limit must be >= 1 and offset >= 0")
        try:
            records = state.store.query(
                ctx,
                project=project,
                identifier=identifier,
                state=state_,
                contributor=contributor,
            )
        except IdentifierError as exc:
            return _error(400, str(exc))
        page = records[offset : offset + limit]
        return _wire_response(
            {
                "total": len(records),
                "limit": limit,
                "offset": offset,
                "results": [record_payload(r) for r in page],
            }
        )

    @app.get("/api/v1/contributions/{cid}")
    async def get_contribution(cid: str, ctx: AccessContext = Depends(ctx_for)):
        try:
            record = state.store.get(cid, ctx)
        except NotFoundError as exc:
            return _error(404, str(exc))
        return _wire_response(record_payload(record))

    @app.patch("/api/v1/contributions/{cid}/state")
    async def patch_state(cid: str, request: Request, ctx: AccessContext = Depends(ctx_for)):
        try:
            data = wire.loads(await request.body())
        except ValueError:
            return _error(400, "request body is not valid JSON")
        new_state = data.get("state") if isinstance(data, dict) else None
        if not isinstance(new_state, str):
            return _error(400, "body must be an object with a 'state' string")
        try:
            revision = state.store.set_state(cid, new_state, ctx)
        except ValueError as exc:
            return _error(400, str(exc))
        except NotFoundError as exc:
            return _error(404, str(exc))
        except PermissionDeniedError as exc:
            return _error(403, str(exc))
        except IllegalTransitionError as exc:
            return _error(409, str(exc))
        record = state.store.get(cid, ctx)
        return _wire_response({"cid": cid, "state": record.state, "revision": revision})

    # -- materials and the grid ----------------------------------------------

    @app.get("/api/v1/materials/{name}")
    async def material_detail(name: str, ctx: AccessContext = Depends(ctx_for)):
        try:
            identifier = parse_identifier(name)
        except IdentifierError as exc:
            return _error(400, str(exc))
        records = state.store.query(ctx, identifier=identifier)
        if not ctx.is_admin:
            records = [r for r in records if r.state == "released"]
        if not records:
            return _error(404, f"no visible contributions for {name!r}")
        detail = builder.merge_view(identifier, records)
        correlation = builder.correlate(identifier, state.core)
        kind = (
            "core"
            if isinstance(identifier, CoreId)
            else "composition"
            if isinstance(identifier, CompositionId)
            else "project"
        )
        payload = {
            "identifier": str(identifier),
            "name": name,
            "kind": kind,
            "provenance": [list(p) for p in detail.provenance],
            "records": {ns: record_payload(r) for ns, r in detail.namespaces.items()},
            "correlation": {
                "matches": [str(m.material_id) for m in correlation.matches],
                "routed_project": correlation.routed_project,
            },
        }
        return _wire_response(payload)

    def _grid_payload(grid: builder.GridIndex) -> dict:
        return {
            "x": grid.x_prop,
            "y": grid.y_prop,
            "x_edges": grid.x_edges,
            "y_edges": grid.y_edges,
            "counts": grid.counts,
            "total": grid.total,
        }

    @app.get("/api/v1/index/grid")
    async def index_grid(
        x: str,
        y: str,
        project: str | None = None,
        nx: int = 10,
        ny: int = 10,
        artifact: str | None = None,
    ):
        if artifact is not None:
            grid = state.grids.get(artifact)
            if grid is None:
                return _error(404, f"no grid artifact {artifact!r}")
            return _wire_response(_grid_payload(grid) | {"artifact": artifact})
        if nx < 1 or ny < 1:
            return _error(400, "nx and ny must be >= 1")
        try:
            grid = builder.grid_for_scope(state.store, project, x, y, nx, ny)
        except EmptyIndexError as exc:
            return _error(404, str(exc))
        except builder.BuilderError as exc:
            return _error(404, str(exc))
        return _wire_response(_grid_payload(grid))

    @app.get("/api/v1/index/region")
    async def index_region(
        x: str,
        y: str,
        x0: float,
        x1: float,
        y0: float,
        y1: float,
        project: str | None = None,
        nx: int = 10,
        ny: int = 10,
    ):
        if x0 > x1 or y0 > y1:
            return _error(400, f"malformed rectangle [{x0}, {x1}] x [{y0}, {y1}]")
        try:
            grid = builder.grid_for_scope(state.store, project, x, y, nx, ny)
        except EmptyIndexError as exc:
            return _error(404, str(exc))
        except builder.BuilderError as exc:
            return _error(404, str(exc))
        ids = builder.region_query(grid, x0, x1, y0, y1)
        return _wire_response({"ids": ids, "count": len(ids)})

    @app.post("/api/v1/postprocess")
    async def postprocess(request: Request, ctx: AccessContext = Depends(ctx_for)):
        try:
            data = wire.loads(await request.body())
        except ValueError:
            return _error(400, "request body is not valid JSON")
        if not isinstance(data, dict) or not isinstance(data.get("name"), str):
            return _error(400, "body must be an object with a 'name' string")
        params = {k: v for k, v in data.items() if k not in ("name", "project")}
        try:
            report = builder.run_registered_postprocess(
                data["name"], data.get("project"), ctx, state.store, params
            )
        except UnknownProcessorError as exc:
            return _error(404, str(exc))
        except PermissionDeniedError as exc:
            return _error(403, str(exc))
        except EmptyIndexError as exc:
            return _error(404, str(exc))
        except builder.BuilderError as exc:
            return _error(404, str(exc))
        if isinstance(report.artifact, builder.GridIndex):
            state.grids[report.artifact_id] = report.artifact
        return _wire_response(
            {
                "name": report.name,
                "scope": report.scope,
                "processed": report.processed,
                "artifact": report.artifact_id,
            }
        )

    @app.get("/api/v1/health")
    async def health():
        return _wire_response({"status": "ok"})

    if frontend_dir is not None and Path(frontend_dir).is_dir():
        app.mount("/ui", StaticFiles(directory=str(frontend_dir), html=True), name="ui")

    return app


def serve(
    store: ContributionStore,
    config: ServiceConfig,
    core: list[CoreMaterial] | None = None,
    frontend_dir: str | Path | None = None,
) -> None:
    import uvicorn

    app = create_app(store=store, config=config, core=core, frontend_dir=frontend_dir)
    uvicorn.run(app, host=config.host, port=config.port, log_level="warning")
