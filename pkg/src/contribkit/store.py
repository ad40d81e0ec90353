"""Versioned, sandbox-aware storage for contribution records.

Records move through a review lifecycle::

    staged -> approved -> released
       \\        |            |
        +-------+--> rejected-+

Every successful write bumps the revision by exactly 1; writers can pass an
expected revision to get compare-and-set semantics.  Visibility is
sandboxed: project-scoped records are only seen by group members, their
contributor, or an admin, and a denied lookup is indistinguishable from a
missing one so that sandboxed data leaks no existence signal.

The store itself is in-memory with an optional append-only file backend
(JSONL log plus periodic snapshot); writes are linearized under one lock
and reads hand out immutable record snapshots.
"""

from __future__ import annotations

import json
import random
import threading
import time
from copy import deepcopy
from dataclasses import dataclass, replace
from pathlib import Path
from time import perf_counter
from typing import Callable, Iterable, Protocol

from .contributions import Contribution
from .identifiers import (
    CompositionId,
    CoreId,
    Identifier,
    ProjectId,
    parse_identifier,
)
from .mpfile import Document, Section, parse_mpfile, serialize_mpfile

__all__ = [
    "STATES",
    "STAGED",
    "APPROVED",
    "RELEASED",
    "REJECTED",
    "TRANSITIONS",
    "ANONYMOUS",
    "AccessContext",
    "AmbiguousMatchError",
    "AuditEntry",
    "BulkResult",
    "ContributionRecord",
    "ContributionStore",
    "FileBackend",
    "IllegalTransitionError",
    "ImmutableRecordError",
    "NotFoundError",
    "PermissionDeniedError",
    "RevisionConflictError",
    "StoreError",
    "identity_key",
]

STAGED = "staged"
APPROVED = "approved"
RELEASED = "released"
REJECTED = "rejected"
STATES = (STAGED, APPROVED, RELEASED, REJECTED)

TRANSITIONS: dict[str, frozenset[str]] = {
    STAGED: frozenset({APPROVED, REJECTED}),
    APPROVED: frozenset({RELEASED, REJECTED}),
    RELEASED: frozenset({REJECTED}),
    REJECTED: frozenset(),
}


class StoreError(Exception):
    pass


class NotFoundError(StoreError):
    """Unknown cid, or one the caller is not allowed to know exists."""

    def __init__(self, cid: str):
        self.cid = cid
        super().__init__(f"no contribution {cid!r}")


class PermissionDeniedError(StoreError):
    pass


class RevisionConflictError(StoreError):
    def __init__(self, expected: int, actual: int):
        self.expected = expected
        self.actual = actual
        super().__init__(f"revision conflict: expected {expected}, record is at {actual}")


class ImmutableRecordError(StoreError):
    def __init__(self, cid: str):
        self.cid = cid
        super().__init__(f"contribution {cid!r} is released; content is immutable")


class IllegalTransitionError(StoreError):
    def __init__(self, current: str, requested: str):
        self.current = current
        self.requested = requested
        super().__init__(f"illegal state transition {current!r} -> {requested!r}")


class AmbiguousMatchError(StoreError):
    def __init__(self, cids: list[str]):
        self.cids = cids
        super().__init__(
            "identifier matches several records, pass a cid: " + ", ".join(sorted(cids))
        )


@dataclass(frozen=True)
class AccessContext:
    """Who is asking: account, project group memberships, admin flag."""

    account: str | None = None
    groups: frozenset[str] = frozenset()
    is_admin: bool = False


ANONYMOUS = AccessContext()


@dataclass(frozen=True)
class AuditEntry:
    account: str | None
    at: float
    action: str
    from_state: str | None
    to_state: str


@dataclass(frozen=True)
class ContributionRecord:
    """Immutable snapshot of one stored contribution.

    Updates replace the whole record object, so a reference obtained from
    get/query stays internally consistent while the store moves on.
    """

    cid: str
    name: str
    identifier: Identifier
    project: str | None
    section: Section
    contributor: str | None
    state: str
    revision: int
    created: float
    updated: float
    audit: tuple[AuditEntry, ...] = ()

    def draft(self) -> Contribution:
        return Contribution(
            self.identifier, deepcopy(self.section), project=self.project, cid=self.cid
        )


def identity_key(identifier: Identifier) -> tuple:
    """Order-insensitive identity used for (contributor, identifier) matching:
    compositions compare by element multiset, not by spelling order."""
    if isinstance(identifier, CoreId):
        return ("core", identifier.number)
    if isinstance(identifier, ProjectId):
        return ("project", identifier.project, identifier.label)
    assert isinstance(identifier, CompositionId)
    return ("composition",) + identifier.match_key


@dataclass
class BulkResult:
    accepted: int
    rejected: list[tuple[int, str]]
    elapsed: float

    @property
    def submitted(self) -> int:
        return self.accepted + len(self.rejected)


class Backend(Protocol):
    def load(self) -> list[dict]: ...
    def append(self, record: dict) -> None: ...
    def snapshot(self, records: list[dict]) -> None: ...


class FileBackend:
    """Append-only JSONL log plus a compacted snapshot file.

    Every write appends the record's full serialized form to ``log.jsonl``;
    ``snapshot()`` rewrites ``snapshot.json`` atomically and truncates the
    log.  Load order is snapshot first, then log replay, newest revision
    winning by cid.
    """

    LOG = "log.jsonl"
    SNAPSHOT = "snapshot.json"

    def __init__(self, directory: str | Path):
        self.directory = Path(directory)
        self.directory.mkdir(parents=True, exist_ok=True)
        self._log_path = self.directory / self.LOG
        self._snapshot_path = self.directory / self.SNAPSHOT
        self._log = open(self._log_path, "a", encoding="utf-8")

    def load(self) -> list[dict]:
        merged: dict[str, dict] = {}
        if self._snapshot_path.is_file():
            for rec in json.loads(self._snapshot_path.read_text(encoding="utf-8")):
                merged[rec["cid"]] = rec
        if self._log_path.is_file():
            with open(self._log_path, encoding="utf-8") as fh:
                for line in fh:
                    line = line.strip()
                    if line:
                        rec = json.loads(line)
                        merged[rec["cid"]] = rec
        return list(merged.values())

    def append(self, record: dict) -> None:
        self._log.write(json.dumps(record, ensure_ascii=False) + "\n")
        self._log.flush()

    def snapshot(self, records: list[dict]) -> None:
        tmp = self._snapshot_path.with_suffix(".tmp")
        tmp.write_text(json.dumps(records, ensure_ascii=False), encoding="utf-8")
        tmp.replace(self._snapshot_path)
        self._log.close()
        self._log = open(self._log_path, "w", encoding="utf-8")

    def close(self) -> None:
        self._log.close()


def record_to_dict(record: ContributionRecord) -> dict:
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
            [a.account, a.at, a.action, a.from_state, a.to_state] for a in record.audit
        ],
        "mpfile": serialize_mpfile(Document([record.section])),
    }


def record_from_dict(data: dict) -> ContributionRecord:
    doc = parse_mpfile(data["mpfile"])
    if len(doc.roots) != 1:
        raise StoreError(f"stored record {data.get('cid')!r} must hold exactly one root")
    return ContributionRecord(
        cid=data["cid"],
        name=data["name"],
        identifier=parse_identifier(data["identifier"]),
        project=data.get("project"),
        section=doc.roots[0],
        contributor=data.get("contributor"),
        state=data["state"],
        revision=data["revision"],
        created=data["created"],
        updated=data["updated"],
        audit=tuple(AuditEntry(*entry) for entry in data.get("audit", [])),
    )


class ContributionStore:
    """Linearized-write contribution storage with sandboxed reads.

    ``rng`` and ``clock`` are injectable so tests and local previews can pin
    cid assignment and timestamps to reproducible values.
    """

    def __init__(
        self,
        backend: Backend | None = None,
        rng: random.Random | None = None,
        clock: Callable[[], float] | None = None,
    ):
        self._backend = backend
        self._rng = rng or random.Random()
        self._clock = clock or time.time
        self._lock = threading.RLock()
        self._records: dict[str, ContributionRecord] = {}
        self._by_identity: dict[tuple, list[str]] = {}
        if backend is not None:
            for data in backend.load():
                record = record_from_dict(data)
                self._records[record.cid] = record
                self._index(record)

    def _index(self, record: ContributionRecord) -> None:
        key = (record.contributor, identity_key(record.identifier))
        self._by_identity.setdefault(key, []).append(record.cid)

    def _unindex(self, record: ContributionRecord) -> None:
        key = (record.contributor, identity_key(record.identifier))
        cids = self._by_identity.get(key, [])
        if record.cid in cids:
            cids.remove(record.cid)
            if not cids:
                del self._by_identity[key]

    def _persist(self, record: ContributionRecord) -> None:
        if self._backend is not None:
            self._backend.append(record_to_dict(record))

    def _new_cid(self) -> str:
        while True:
            cid = f"c-{self._rng.getrandbits(48):012x}"
            if cid not in self._records:
                return cid

    # -- visibility -----------------------------------------------------------

    @staticmethod
    def visible(record: ContributionRecord, ctx: AccessContext) -> bool:
        """Sandbox rule.  Project records are confined to their group (plus
        contributor and admin); records without a project scope are public
        once released."""
        if ctx.is_admin:
            return True
        if ctx.account is not None and record.contributor == ctx.account:
            return True
        if record.project is not None:
            return record.project in ctx.groups
        return record.state == RELEASED

    def _authorize_write(self, project: str | None, ctx: AccessContext) -> None:
        if ctx.is_admin:
            return
        if ctx.account is None:
            raise PermissionDeniedError("writing requires an account")
        if project is not None and project not in ctx.groups:
            raise PermissionDeniedError(f"no membership in project {project!r}")

    # -- writes ---------------------------------------------------------------

    def upsert(self, draft: Contribution, ctx: AccessContext) -> tuple[str, int]:
        """Insert or update one contribution; returns (cid, revision).

        A draft carrying a cid targets that record; otherwise the record is
        matched by (contributor, identifier), insensitive to composition
        spelling order.  Updates replace the content, bump the revision and
        reset the state to staged.  The store takes ownership of
        ``draft.section``; the caller must not mutate it afterwards.
        """
        with self._lock:
            self._authorize_write(draft.project, ctx)
            return self._upsert_locked(draft, ctx)

    def _upsert_locked(self, draft: Contribution, ctx: AccessContext) -> tuple[str, int]:
        target: ContributionRecord | None = None
        if draft.cid is not None:
            target = self._records.get(draft.cid)
            if target is None or not self.visible(target, ctx):
                raise NotFoundError(draft.cid)
            if not ctx.is_admin and target.contributor != ctx.account:
                raise PermissionDeniedError(
                    f"contribution {draft.cid!r} belongs to another account"
                )
        else:
            key = (ctx.account, identity_key(draft.identifier))
            cids = self._by_identity.get(key, [])
            if len(cids) > 1:
                raise AmbiguousMatchError(cids)
            if cids:
                target = self._records[cids[0]]

        now = self._clock()
        if target is None:
            if draft.expected_revision not in (None, 0):
                raise RevisionConflictError(draft.expected_revision, 0)
            record = ContributionRecord(
                cid=self._new_cid(),
                name=draft.name,
                identifier=draft.identifier,
                project=draft.project,
                section=draft.section,
                contributor=ctx.account,
                state=STAGED,
                revision=1,
                created=now,
                updated=now,
                audit=(AuditEntry(ctx.account, now, "create", None, STAGED),),
            )
            self._records[record.cid] = record
            self._index(record)
        else:
            if target.state == RELEASED:
                raise ImmutableRecordError(target.cid)
            if draft.expected_revision is not None and draft.expected_revision != target.revision:
                raise RevisionConflictError(draft.expected_revision, target.revision)
            record = replace(
                target,
                name=draft.name,
                identifier=draft.identifier,
                project=draft.project,
                section=draft.section,
                state=STAGED,
                revision=target.revision + 1,
                updated=now,
                audit=target.audit
                + (AuditEntry(ctx.account, now, "update", target.state, STAGED),),
            )
            self._unindex(target)
            self._records[record.cid] = record
            self._index(record)
        self._persist(record)
        return record.cid, record.revision

    def bulk_upsert(self, drafts: Iterable[Contribution], ctx: AccessContext) -> BulkResult:
        """Upsert many drafts with per-item error isolation.

        Project authorization is resolved once per distinct prefix, not per
        item; every draft either counts as accepted or appears in
        ``rejected`` with its index and error."""
        started = perf_counter()
        accepted = 0
        rejected: list[tuple[int, str]] = []
        authz: dict[str | None, str | None] = {}
        with self._lock:
            for i, draft in enumerate(drafts):
                verdict = authz.get(draft.project, "")
                if verdict == "":
                    try:
                        self._authorize_write(draft.project, ctx)
                        verdict = None
                    except PermissionDeniedError as exc:
                        verdict = str(exc)
                    authz[draft.project] = verdict
                if verdict is not None:
                    rejected.append((i, verdict))
                    continue
                try:
                    self._upsert_locked(draft, ctx)
                    accepted += 1
                except StoreError as exc:
                    rejected.append((i, str(exc)))
        return BulkResult(accepted, rejected, perf_counter() - started)

    def set_state(self, cid: str, new_state: str, ctx: AccessContext) -> int:
        """Move a record through the review lifecycle; returns the new revision.

        Only admins and members of the record's project group may transition;
        records outside any project are admin-only.  Requests against an
        invisible record fail exactly like a missing cid."""
        if new_state not in STATES:
            raise ValueError(f"unknown state {new_state!r}")
        with self._lock:
            record = self._records.get(cid)
            if record is None or not self.visible(record, ctx):
                raise NotFoundError(cid)
            allowed = ctx.is_admin or (
                record.project is not None and record.project in ctx.groups
            )
            if not allowed:
                raise PermissionDeniedError("state changes need review rights")
            if new_state not in TRANSITIONS[record.state]:
                raise IllegalTransitionError(record.state, new_state)
            now = self._clock()
            updated = replace(
                record,
                state=new_state,
                revision=record.revision + 1,
                updated=now,
                audit=record.audit
                + (AuditEntry(ctx.account, now, "state", record.state, new_state),),
            )
            self._records[cid] = updated
            self._persist(updated)
            return updated.revision

    # -- reads ----------------------------------------------------------------

    def get(self, cid: str, ctx: AccessContext) -> ContributionRecord:
        with self._lock:
            record = self._records.get(cid)
            if record is None or not self.visible(record, ctx):
                raise NotFoundError(cid)
            return record

    def query(
        self,
        ctx: AccessContext,
        project: str | None = None,
        identifier: str | Identifier | None = None,
        state: str | None = None,
        contributor: str | None = None,
    ) -> list[ContributionRecord]:
        """Visible records matching every given filter, cid-ascending.

        The identifier filter is spelling-insensitive for compositions:
        "Fe80Ni20Pt10" finds records stored as "Ni20Fe80Pt10"."""
        wanted: tuple | None = None
        if identifier is not None:
            if isinstance(identifier, str):
                identifier = parse_identifier(identifier)
            wanted = identity_key(identifier)
        with self._lock:
            out = []
            for cid in sorted(self._records):
                record = self._records[cid]
                if not self.visible(record, ctx):
                    continue
                if project is not None and record.project != project:
                    continue
                if wanted is not None and identity_key(record.identifier) != wanted:
                    continue
                if state is not None and record.state != state:
                    continue
                if contributor is not None and record.contributor != contributor:
                    continue
                out.append(record)
            return out

    def fingerprint(self) -> tuple:
        """Cheap state digest for asserting that reads mutate nothing."""
        with self._lock:
            return tuple((cid, r.revision, r.state) for cid, r in sorted(self._records.items()))

    def compact(self) -> None:
        if self._backend is None:
            return
        with self._lock:
            records = [record_to_dict(self._records[cid]) for cid in sorted(self._records)]
            self._backend.snapshot(records)
