import random
import threading

import pytest

from contribkit.contributions import Contribution
from contribkit.identifiers import parse_identifier
from contribkit.mpfile import parse_mpfile, serialize_mpfile
from contribkit.store import (
    ANONYMOUS,
    APPROVED,
    REJECTED,
    RELEASED,
    STAGED,
    STATES,
    AccessContext,
    AmbiguousMatchError,
    ContributionStore,
    FileBackend,
    IllegalTransitionError,
    ImmutableRecordError,
    NotFoundError,
    PermissionDeniedError,
    RevisionConflictError,
    identity_key,
    record_from_dict,
    record_to_dict,
)

from conftest import random_submission

ADMIN = AccessContext("root", frozenset(), True)
ALICE = AccessContext("alice", frozenset({"por"}), False)
BOB = AccessContext("bob", frozenset(), False)
CARA = AccessContext("cara", frozenset({"por", "abx"}), False)


def make_draft(name="Fe2O3", body="k: v", cid=None, expected=None):
    doc = parse_mpfile(f">>> {name}\n{body}\n")
    identifier = parse_identifier(name)
    project = identifier.project if hasattr(identifier, "project") else None
    return Contribution(identifier, doc.roots[0], project=project,
                        cid=cid, expected_revision=expected)


@pytest.fixture
def store():
    return ContributionStore(rng=random.Random(0), clock=lambda: 0.0)


class TestUpsert:
    def test_insert(self, store):
        cid, revision = store.upsert(make_draft(), BOB)
        assert cid.startswith("c-") and len(cid) == 14
        assert revision == 1
        record = store.get(cid, BOB)
        assert record.state == STAGED
        assert record.contributor == "bob"

    def test_identity_update(self, store):
        cid1, _ = store.upsert(make_draft(body="k: old"), BOB)
        cid2, revision = store.upsert(make_draft(body="k: new"), BOB)
        assert cid2 == cid1
        assert revision == 2
        assert store.get(cid1, BOB).section.get("k") == "new"

    def test_update_resets_state(self, store):
        cid, _ = store.upsert(make_draft(name="por-1"), ALICE)
        store.set_state(cid, APPROVED, ALICE)
        _, revision = store.upsert(make_draft(name="por-1"), ALICE)
        assert store.get(cid, ALICE).state == STAGED
        assert revision == 3

    def test_reordered_composition_is_same_record(self, store):
        cid1, _ = store.upsert(make_draft(name="Ni20Fe80Pt10"), BOB)
        cid2, revision = store.upsert(make_draft(name="Fe80Ni20Pt10"), BOB)
        assert cid2 == cid1
        assert revision == 2

    def test_same_identifier_different_accounts_are_distinct(self, store):
        cid1, _ = store.upsert(make_draft(), BOB)
        cid2, _ = store.upsert(make_draft(), ADMIN)
        assert cid1 != cid2

    def test_anonymous_write_denied(self, store):
        with pytest.raises(PermissionDeniedError):
            store.upsert(make_draft(), ANONYMOUS)

    def test_project_membership_enforced(self, store):
        with pytest.raises(PermissionDeniedError):
            store.upsert(make_draft(name="por-1"), BOB)
        store.upsert(make_draft(name="por-1"), ALICE)
        store.upsert(make_draft(name="por-2"), ADMIN)

    def test_cid_targeting(self, store):
        cid, _ = store.upsert(make_draft(), BOB)
        _, revision = store.upsert(make_draft(name="NiO", cid=cid), BOB)
        assert revision == 2
        assert str(store.get(cid, BOB).identifier) == "NiO"

    def test_unknown_cid(self, store):
        with pytest.raises(NotFoundError):
            store.upsert(make_draft(cid="c-000000000000"), BOB)

    def test_foreign_cid_invisible_masked(self, store):
        cid, _ = store.upsert(make_draft(), BOB)
        with pytest.raises(NotFoundError):
            store.upsert(make_draft(cid=cid), CARA)

    def test_foreign_cid_visible_denied(self, store):
        cid, _ = store.upsert(make_draft(name="por-1"), ALICE)
        # cara sees the record through project membership but does not own it
        with pytest.raises(PermissionDeniedError):
            store.upsert(make_draft(name="por-1", cid=cid), CARA)

    def test_admin_may_update_foreign_record(self, store):
        cid, _ = store.upsert(make_draft(), BOB)
        _, revision = store.upsert(make_draft(cid=cid), ADMIN)
        assert revision == 2
        # contributor is preserved, not reassigned
        assert store.get(cid, ADMIN).contributor == "bob"

    def test_ambiguous_identity_match(self, store):
        # two Fe2O3 records under one account can only arise through cid
        # retargeting; once they exist, identity matching must refuse to guess
        first, _ = store.upsert(make_draft(), BOB)
        store.upsert(make_draft(name="NiO", cid=first), BOB)
        second, _ = store.upsert(make_draft(), BOB)
        store.upsert(make_draft(name="Fe2O3", cid=first), BOB)
        assert second != first
        with pytest.raises(AmbiguousMatchError):
            store.upsert(make_draft(), BOB)


class TestRevisions:
    def test_expected_revision_match(self, store):
        cid, _ = store.upsert(make_draft(), BOB)
        _, revision = store.upsert(make_draft(expected=1), BOB)
        assert revision == 2

    def test_expected_revision_mismatch(self, store):
        store.upsert(make_draft(), BOB)
        store.upsert(make_draft(), BOB)
        with pytest.raises(RevisionConflictError) as err:
            store.upsert(make_draft(expected=1), BOB)
        assert err.value.expected == 1
        assert err.value.actual == 2

    def test_insert_with_expected_revision(self, store):
        with pytest.raises(RevisionConflictError) as err:
            store.upsert(make_draft(expected=3), BOB)
        assert err.value.actual == 0

    def test_insert_with_expected_zero_allowed(self, store):
        _, revision = store.upsert(make_draft(expected=0), BOB)
        assert revision == 1

    def test_state_change_bumps_revision(self, store):
        cid, _ = store.upsert(make_draft(name="por-1"), ALICE)
        assert store.set_state(cid, APPROVED, ALICE) == 2
        assert store.set_state(cid, RELEASED, ALICE) == 3


class TestLifecycle:
    def test_happy_path(self, store):
        cid, _ = store.upsert(make_draft(name="por-1"), ALICE)
        store.set_state(cid, APPROVED, ALICE)
        store.set_state(cid, RELEASED, ALICE)
        assert store.get(cid, ALICE).state == RELEASED

    def test_transition_matrix(self, store):
        # independently stated legal set; everything else must raise
        legal = {
            (STAGED, APPROVED), (STAGED, REJECTED),
            (APPROVED, RELEASED), (APPROVED, REJECTED),
            (RELEASED, REJECTED),
        }
        walk_to = {STAGED: [], APPROVED: [APPROVED], RELEASED: [APPROVED, RELEASED],
                   REJECTED: [REJECTED]}
        for current in STATES:
            for requested in STATES:
                # a fresh record per pair, named after the pair under test
                cid, _ = store.upsert(make_draft(name=f"por-{current}.{requested}"), ALICE)
                for step in walk_to[current]:
                    store.set_state(cid, step, ALICE)
                if (current, requested) in legal:
                    store.set_state(cid, requested, ALICE)
                else:
                    with pytest.raises(IllegalTransitionError):
                        store.set_state(cid, requested, ALICE)

    def test_released_content_is_immutable(self, store):
        cid, _ = store.upsert(make_draft(name="por-1"), ALICE)
        store.set_state(cid, APPROVED, ALICE)
        store.set_state(cid, RELEASED, ALICE)
        with pytest.raises(ImmutableRecordError):
            store.upsert(make_draft(name="por-1"), ALICE)
        with pytest.raises(ImmutableRecordError):
            store.upsert(make_draft(name="por-1", cid=cid), ADMIN)

    def test_rejected_is_terminal(self, store):
        cid, _ = store.upsert(make_draft(name="por-1"), ALICE)
        store.set_state(cid, REJECTED, ALICE)
        for requested in (STAGED, APPROVED, RELEASED):
            with pytest.raises(IllegalTransitionError):
                store.set_state(cid, requested, ALICE)

    def test_unknown_state_is_a_value_error(self, store):
        cid, _ = store.upsert(make_draft(name="por-1"), ALICE)
        with pytest.raises(ValueError):
            store.set_state(cid, "published", ALICE)

    def test_review_rights(self, store):
        cid, _ = store.upsert(make_draft(name="por-1"), ALICE)
        # the contributor has review rights only through group membership;
        # bob cannot even see it, cara reviews as a fellow member
        with pytest.raises(NotFoundError):
            store.set_state(cid, APPROVED, BOB)
        store.set_state(cid, APPROVED, CARA)

    def test_projectless_records_are_admin_reviewed(self, store):
        cid, _ = store.upsert(make_draft(), BOB)
        with pytest.raises(PermissionDeniedError):
            store.set_state(cid, APPROVED, BOB)
        store.set_state(cid, APPROVED, ADMIN)

    def test_audit_trail(self, store):
        cid, _ = store.upsert(make_draft(name="por-1"), ALICE)
        store.upsert(make_draft(name="por-1"), ALICE)
        store.set_state(cid, APPROVED, CARA)
        audit = store.get(cid, ALICE).audit
        assert [(a.account, a.action, a.from_state, a.to_state) for a in audit] == [
            ("alice", "create", None, STAGED),
            ("alice", "update", STAGED, STAGED),
            ("cara", "state", STAGED, APPROVED),
        ]


class TestVisibility:
    def test_projectless_lifecycle(self, store):
        cid, _ = store.upsert(make_draft(), BOB)
        assert store.visible(store.get(cid, BOB), BOB)
        for ctx in (ANONYMOUS, ALICE, CARA):
            with pytest.raises(NotFoundError):
                store.get(cid, ctx)
        store.set_state(cid, APPROVED, ADMIN)
        store.set_state(cid, RELEASED, ADMIN)
        # released projectless records are public
        for ctx in (ANONYMOUS, ALICE, CARA, BOB, ADMIN):
            assert store.get(cid, ctx).cid == cid

    def test_project_records_never_go_public(self, store):
        cid, _ = store.upsert(make_draft(name="por-1"), ALICE)
        store.set_state(cid, APPROVED, ALICE)
        store.set_state(cid, RELEASED, ALICE)
        with pytest.raises(NotFoundError):
            store.get(cid, ANONYMOUS)
        with pytest.raises(NotFoundError):
            store.get(cid, BOB)
        assert store.get(cid, CARA).cid == cid

    def test_contributor_always_sees_own(self, store):
        cid, _ = store.upsert(make_draft(name="por-1"), ALICE)
        solo = AccessContext("alice", frozenset(), False)
        assert store.get(cid, solo).cid == cid

    def test_masking_is_indistinguishable(self, store):
        cid, _ = store.upsert(make_draft(), BOB)
        with pytest.raises(NotFoundError) as hidden:
            store.get(cid, ALICE)
        with pytest.raises(NotFoundError) as missing:
            store.get("c-ffffffffffff", ALICE)
        assert str(hidden.value).replace(cid, "X") == str(missing.value).replace(
            "c-ffffffffffff", "X"
        )


class TestQuery:
    def fill(self, store):
        store.upsert(make_draft(name="por-1"), ALICE)
        store.upsert(make_draft(name="por-2"), ALICE)
        store.upsert(make_draft(name="abx-1"), CARA)
        store.upsert(make_draft(name="Ni20Fe80Pt10"), BOB)
        store.upsert(make_draft(name="mp-7"), BOB)

    def test_filters(self, store):
        self.fill(store)
        assert len(store.query(ADMIN)) == 5
        assert len(store.query(ADMIN, project="por")) == 2
        assert len(store.query(ADMIN, contributor="bob")) == 2
        assert len(store.query(ADMIN, state=STAGED)) == 5
        assert store.query(ADMIN, state=RELEASED) == []

    def test_identifier_filter_is_spelling_insensitive(self, store):
        self.fill(store)
        hits = store.query(ADMIN, identifier="Fe80Ni20Pt10")
        assert len(hits) == 1
        assert str(hits[0].identifier) == "Ni2Fe8Pt"

    def test_query_respects_visibility(self, store):
        self.fill(store)
        assert {r.project for r in store.query(ALICE)} == {"por"}
        assert store.query(ANONYMOUS) == []
        assert len(store.query(CARA)) == 3

    def test_cid_ascending(self, store):
        self.fill(store)
        cids = [r.cid for r in store.query(ADMIN)]
        assert cids == sorted(cids)

    def test_reads_do_not_mutate(self, store):
        self.fill(store)
        before = store.fingerprint()
        store.query(ADMIN)
        store.query(ANONYMOUS, project="por")
        try:
            store.get("c-ffffffffffff", ADMIN)
        except NotFoundError:
            pass
        assert store.fingerprint() == before


class TestBulk:
    def test_all_accepted(self, store):
        drafts = [make_draft(name=f"por-{i}") for i in range(5)]
        result = store.bulk_upsert(drafts, ALICE)
        assert result.accepted == 5
        assert result.rejected == []
        assert result.submitted == 5
        assert result.elapsed >= 0

    def test_per_item_isolation(self, store):
        store.upsert(make_draft(name="por-1"), ALICE)
        store.upsert(make_draft(name="por-1"), ALICE)
        drafts = [
            make_draft(name="por-9"),
            make_draft(name="por-1", expected=1),  # stale revision
            make_draft(name="abx-1"),              # no membership
            make_draft(name="por-8"),
        ]
        result = store.bulk_upsert(drafts, ALICE)
        assert result.accepted == 2
        assert [i for i, _ in result.rejected] == [1, 2]
        assert result.submitted == 4

    def test_matches_sequential_upserts(self, store):
        rng = random.Random(12)
        texts = [random_submission(rng, i, project="por") for i in range(20)]
        drafts = []
        for text in texts:
            doc = parse_mpfile(text)
            drafts.append(Contribution(parse_identifier(doc.roots[0].name), doc.roots[0],
                                       project="por"))
        one = ContributionStore(rng=random.Random(42), clock=lambda: 0.0)
        two = ContributionStore(rng=random.Random(42), clock=lambda: 0.0)
        for draft in drafts:
            one.upsert(draft, ALICE)
        result = two.bulk_upsert(drafts, ALICE)
        assert result.accepted == 20
        assert one.fingerprint() == two.fingerprint()

    def test_concurrent_bulk_batches(self, store):
        errors = []

        def submit(offset):
            try:
                drafts = [make_draft(name=f"por-{offset + i}") for i in range(25)]
                store.bulk_upsert(drafts, ALICE)
            except Exception as exc:  # noqa: BLE001
                errors.append(exc)

        threads = [threading.Thread(target=submit, args=(base,)) for base in range(0, 200, 25)]
        for t in threads:
            t.start()
        for t in threads:
            t.join()
        assert errors == []
        assert len(store.query(ADMIN, project="por")) == 200


class TestPersistence:
    def test_record_dict_round_trip(self, store):
        cid, _ = store.upsert(make_draft(name="Ni20Fe80Pt10", body="k: v"), BOB)
        store.set_state(cid, APPROVED, ADMIN)
        record = store.get(cid, ADMIN)
        again = record_from_dict(record_to_dict(record))
        assert again == record

    def test_reload(self, tmp_path):
        backend = FileBackend(tmp_path)
        store = ContributionStore(backend=backend, rng=random.Random(0), clock=lambda: 1.5)
        cid, _ = store.upsert(make_draft(name="por-1", body="k: v"), ALICE)
        store.upsert(make_draft(name="por-1", body="k: w"), ALICE)
        store.set_state(cid, APPROVED, ALICE)
        backend.close()

        reloaded = ContributionStore(backend=FileBackend(tmp_path))
        record = reloaded.get(cid, ALICE)
        assert record.revision == 3
        assert record.state == APPROVED
        assert record.section.get("k") == "w"
        assert len(record.audit) == 3
        assert reloaded.fingerprint() == store.fingerprint()

    def test_reload_preserves_identity_index(self, tmp_path):
        store = ContributionStore(backend=FileBackend(tmp_path), rng=random.Random(0))
        cid, _ = store.upsert(make_draft(name="por-1"), ALICE)
        reloaded = ContributionStore(backend=FileBackend(tmp_path), rng=random.Random(9))
        cid2, revision = reloaded.upsert(make_draft(name="por-1"), ALICE)
        assert cid2 == cid
        assert revision == 2

    def test_compaction(self, tmp_path):
        store = ContributionStore(backend=FileBackend(tmp_path), rng=random.Random(0))
        for i in range(5):
            store.upsert(make_draft(name=f"por-{i}"), ALICE)
        for _ in range(3):
            store.upsert(make_draft(name="por-0"), ALICE)
        store.compact()
        assert (tmp_path / "log.jsonl").read_text() == ""
        assert (tmp_path / "snapshot.json").exists()
        reloaded = ContributionStore(backend=FileBackend(tmp_path))
        assert reloaded.fingerprint() == store.fingerprint()

    def test_writes_after_compaction_replay(self, tmp_path):
        store = ContributionStore(backend=FileBackend(tmp_path), rng=random.Random(0))
        cid, _ = store.upsert(make_draft(name="por-1"), ALICE)
        store.compact()
        store.upsert(make_draft(name="por-1"), ALICE)
        reloaded = ContributionStore(backend=FileBackend(tmp_path))
        assert reloaded.get(cid, ALICE).revision == 2

    def test_serialized_section_round_trips_exactly(self, store):
        text = ">>> Ni20Fe80Pt10\nk: v\n>>>> T\na,b\n1,-8.87504e-05\n"
        doc = parse_mpfile(text)
        draft = Contribution(parse_identifier("Ni20Fe80Pt10"), doc.roots[0])
        cid, _ = store.upsert(draft, BOB)
        record = record_from_dict(record_to_dict(store.get(cid, BOB)))
        assert serialize_mpfile(record.draft().document()) == text


def test_identity_key_kinds():
    assert identity_key(parse_identifier("mp-5")) != identity_key(parse_identifier("Fe"))
    assert identity_key(parse_identifier("por-1")) != identity_key(parse_identifier("abx-1"))
    assert identity_key(parse_identifier("NiFe")) == identity_key(parse_identifier("FeNi"))
