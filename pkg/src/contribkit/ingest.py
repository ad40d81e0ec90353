"""The one submission pipeline: parse, embed, split, validate, upsert.

Both the REST service and the CLI preview run this exact code path, which
is what makes a local preview trustworthy: the preview's dataset is the
stored record a real submission would have produced, byte for byte, given
the same pinned account, id generator, and clock.
"""

from __future__ import annotations

import random
from dataclasses import dataclass

from .contributions import Contribution
from .identifiers import IdentifierError, ProjectId, parse_identifier
from .mpfile import (
    Document,
    EmbedCollisionError,
    GENERAL_SECTION,
    embed_general,
    parse_with_findings,
    serialize_mpfile,
    validate_document,
)
from .store import (
    AccessContext,
    AmbiguousMatchError,
    ContributionStore,
    ImmutableRecordError,
    NotFoundError,
    PermissionDeniedError,
    RevisionConflictError,
)
from .wire import section_payload, table_payload

__all__ = [
    "PREVIEW_ACCOUNT",
    "ItemResult",
    "SubmissionResult",
    "preview_store",
    "preview_text",
    "record_payload",
    "submit_document",
    "submit_text",
]

PREVIEW_ACCOUNT = "local-preview"


@dataclass
class ItemResult:
    """Outcome for one root section of a submitted document."""

    name: str
    status: int
    cid: str | None = None
    revision: int | None = None
    error: str | None = None

    def payload(self) -> dict:
        out: dict = {"name": self.name, "status": self.status}
        if self.cid is not None:
            out["cid"] = self.cid
            out["revision"] = self.revision
        if self.error is not None:
            out["error"] = self.error
        return out


@dataclass
class SubmissionResult:
    status: int
    items: list[ItemResult]
    error: str | None = None

    def payload(self) -> dict:
        out: dict = {"status": self.status, "results": [i.payload() for i in self.items]}
        if self.error is not None:
            out["error"] = self.error
        return out


def _overall(items: list[ItemResult]) -> int:
    statuses = {i.status for i in items}
    if len(statuses) == 1:
        return statuses.pop()
    return 207


def submit_document(
    doc: Document,
    store: ContributionStore,
    ctx: AccessContext,
    project: str | None = None,
    expected_revision: int | None = None,
    cid: str | None = None,
) -> SubmissionResult:
    """Embed, split, validate, and upsert a parsed document.

    Each root is processed independently and reported with its own status
    (201 created, 200 updated, 4xx failed); the overall status is the
    shared per-item status, or 207 when they differ.
    """
    if not doc.roots:
        return SubmissionResult(400, [], error="empty document")
    try:
        doc = embed_general(doc)
    except EmbedCollisionError as exc:
        return SubmissionResult(400, [], error=str(exc))
    if not doc.roots:
        return SubmissionResult(400, [], error="empty document: only a shared section")
    if cid is not None and len(doc.roots) != 1:
        return SubmissionResult(
            400, [], error="a cid-targeted submission must hold exactly one root"
        )

    items = []
    for root in doc.roots:
        items.append(_submit_root(root, store, ctx, project, expected_revision, cid))
    return SubmissionResult(_overall(items), items)


def _submit_root(root, store, ctx, project, expected_revision, cid) -> ItemResult:
    if root.name == GENERAL_SECTION:
        return ItemResult(root.name, 400, error="nested shared sections cannot be embedded")
    try:
        identifier = parse_identifier(root.name)
    except IdentifierError as exc:
        return ItemResult(root.name, 400, error=str(exc))
    report = validate_document(Document([root]))
    if not report.ok:
        return ItemResult(
            root.name,
            400,
            error="validation failed: "
            + "; ".join(str(f) for f in report.errors[:5])
            + ("" if len(report.errors) <= 5 else f"; and {len(report.errors) - 5} more"),
        )
    scope = identifier.project if isinstance(identifier, ProjectId) else project
    draft = Contribution(
        identifier, root, project=scope, cid=cid, expected_revision=expected_revision
    )
    try:
        assigned, revision = store.upsert(draft, ctx)
    except (RevisionConflictError, ImmutableRecordError, AmbiguousMatchError) as exc:
        return ItemResult(root.name, 409, error=str(exc))
    except NotFoundError as exc:
        return ItemResult(root.name, 404, error=str(exc))
    except PermissionDeniedError as exc:
        status = 401 if ctx.account is None and not ctx.is_admin else 403
        return ItemResult(root.name, status, error=str(exc))
    return ItemResult(root.name, 201 if revision == 1 else 200, cid=assigned, revision=revision)


def submit_text(
    text: str,
    store: ContributionStore,
    ctx: AccessContext,
    project: str | None = None,
    expected_revision: int | None = None,
    cid: str | None = None,
    source: str | None = None,
) -> SubmissionResult:
    """Parse then :func:`submit_document`; parse findings fail the whole
    request with their line numbers."""
    doc, findings = parse_with_findings(text, source)
    if findings:
        return SubmissionResult(
            400,
            [],
            error="parse failed: " + "; ".join(str(f) for f in findings[:5])
            + ("" if len(findings) <= 5 else f"; and {len(findings) - 5} more"),
        )
    return submit_document(doc, store, ctx, project, expected_revision, cid)


def record_payload(record) -> dict:
    """The wire form of one stored record, shared by GET responses and the
    CLI preview so both serialize to identical bytes."""
    draft = record.draft()
    tables = {
        name: {"path": list(ref.path), **table_payload(ref.table)}
        for name, ref in draft.tables.items()
    }
    return {
        "cid": record.cid,
        "name": record.name,
        "identifier": str(record.identifier),
        "project": record.project,
        "contributor": record.contributor,
        "state": record.state,
        "revision": record.revision,
        "created": record.created,
        "updated": record.updated,
        "audit": [
            {
                "account": a.account,
                "at": a.at,
                "action": a.action,
                "from": a.from_state,
                "to": a.to_state,
            }
            for a in record.audit
        ],
        "tree": section_payload(draft.tree),
        "tables": tables,
        "mpfile": serialize_mpfile(draft.document()),
    }


def preview_store() -> tuple[ContributionStore, AccessContext]:
    """A throwaway store pinned for reproducibility: seeded cid generator,
    zeroed clock, and a fixed preview account with admin rights so no
    project scope can block a local dry run."""
    store = ContributionStore(rng=random.Random(0), clock=lambda: 0.0)
    ctx = AccessContext(account=PREVIEW_ACCOUNT, groups=frozenset(), is_admin=True)
    return store, ctx


def preview_text(text: str, source: str | None = None) -> dict:
    """Simulate a submission and return what GETs would then serve.

    Runs :func:`submit_text` against a pinned preview store; the result
    lists the stored record payloads plus the per-item submission results.
    """
    store, ctx = preview_store()
    result = submit_text(text, store, ctx, source=source)
    contributions = []
    for item in result.items:
        if item.cid is not None:
            contributions.append(record_payload(store.get(item.cid, ctx)))
    return {
        "status": result.status,
        "results": [i.payload() for i in result.items],
        "contributions": contributions,
    }
