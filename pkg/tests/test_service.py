import random

import pytest
from fastapi.testclient import TestClient

from contribkit import wire
from contribkit.builder import CoreMaterial
from contribkit.config import ServiceConfig
from contribkit.identifiers import parse_identifier
from contribkit.ingest import submit_text
from contribkit.mpfile import parse_mpfile
from contribkit.service import DocumentStreamSplitter, create_app
from contribkit.store import AccessContext, ContributionStore

from conftest import asgi_stream_bulk

API = "/api/v1"

ADMIN = AccessContext("root", frozenset(), True)
ALICE = AccessContext("alice", frozenset({"por"}), False)
BOB = AccessContext("bob", frozenset(), False)

KEYS = {"k-admin": ADMIN, "k-alice": ALICE, "k-bob": BOB}

CORE = [
    CoreMaterial(parse_identifier("mp-12"), parse_identifier("Ni2Fe8Pt"), {"band gap": 0.0}),
    CoreMaterial(parse_identifier("mp-13"), parse_identifier("Fe2O3"), {"band gap": 2.2}),
]


def fresh_client(**config_kwargs):
    store = ContributionStore(rng=random.Random(0), clock=lambda: 0.0)
    config = ServiceConfig(api_keys=dict(KEYS), **config_kwargs)
    app = create_app(store=store, config=config, core=list(CORE))
    return TestClient(app), store


@pytest.fixture
def client_store():
    return fresh_client()


def post_doc(client, text, key="k-bob", **params):
    headers = {"X-API-KEY": key} if key else {}
    return client.post(f"{API}/contributions", content=text, headers=headers, params=params)


def release(client, cid, key="k-admin"):
    for state in ("approved", "released"):
        r = client.patch(f"{API}/contributions/{cid}/state",
                         content=wire.dumps({"state": state}),
                         headers={"X-API-KEY": key})
        assert r.status_code == 200, r.text
    return cid


class TestSubmission:
    def test_create(self, client_store):
        client, _ = client_store
        r = post_doc(client, ">>> Fe2O3\nk: v\n")
        assert r.status_code == 201
        body = r.json()
        assert body["status"] == 201
        item = body["results"][0]
        assert item["name"] == "Fe2O3"
        assert item["cid"].startswith("c-")
        assert item["revision"] == 1

    def test_update(self, client_store):
        client, _ = client_store
        first = post_doc(client, ">>> Fe2O3\nk: v\n").json()["results"][0]
        r = post_doc(client, ">>> Fe2O3\nk: w\n")
        assert r.status_code == 200
        item = r.json()["results"][0]
        assert item["cid"] == first["cid"]
        assert item["revision"] == 2

    def test_anonymous_rejected_upfront(self, client_store):
        client, _ = client_store
        r = post_doc(client, ">>> Fe2O3\nk: v\n", key=None)
        assert r.status_code == 401

    def test_unknown_key_is_anonymous(self, client_store):
        client, _ = client_store
        r = post_doc(client, ">>> Fe2O3\nk: v\n", key="k-nope")
        assert r.status_code == 401

    def test_empty_document(self, client_store):
        client, _ = client_store
        r = post_doc(client, "")
        assert r.status_code == 400
        assert "empty document" in r.json()["error"]

    def test_parse_error(self, client_store):
        client, _ = client_store
        r = post_doc(client, ">>> A\n>>>>> Deep\n")
        assert r.status_code == 400
        assert "parse failed" in r.json()["error"]

    def test_shared_section_only(self, client_store):
        client, _ = client_store
        r = post_doc(client, ">>> GENERAL\nk: v\n")
        assert r.status_code == 400

    def test_mixed_results_are_207(self, client_store):
        client, _ = client_store
        text = ">>> por-1\nk: v\n>>> not an id!\nk: v\n"
        r = post_doc(client, text, key="k-alice")
        assert r.status_code == 207
        statuses = [item["status"] for item in r.json()["results"]]
        assert statuses == [201, 400]

    def test_uniform_results_keep_their_status(self, client_store):
        client, _ = client_store
        r = post_doc(client, ">>> Fe2O3\nk: v\n>>> NiO\nk: v\n")
        assert r.status_code == 201
        assert [i["status"] for i in r.json()["results"]] == [201, 201]

    def test_project_membership(self, client_store):
        client, _ = client_store
        assert post_doc(client, ">>> por-1\nk: v\n", key="k-bob").status_code == 403
        assert post_doc(client, ">>> por-1\nk: v\n", key="k-alice").status_code == 201

    def test_project_param_scopes_composition(self, client_store):
        client, _ = client_store
        r = post_doc(client, ">>> Fe2O3\nk: v\n", key="k-alice", project="por")
        assert r.status_code == 201
        cid = r.json()["results"][0]["cid"]
        record = client.get(f"{API}/contributions/{cid}",
                            headers={"X-API-KEY": "k-alice"}).json()
        assert record["project"] == "por"

    def test_general_is_embedded_before_storage(self, client_store):
        client, _ = client_store
        text = ">>> GENERAL\nowner: lab\n>>> Fe2O3\nk: v\n"
        r = post_doc(client, text)
        assert r.status_code == 201
        cid = r.json()["results"][0]["cid"]
        record = client.get(f"{API}/contributions/{cid}",
                            headers={"X-API-KEY": "k-bob"}).json()
        assert "owner: lab" in record["mpfile"]
        assert record["name"] == "Fe2O3"


class TestJsonSubmission:
    def test_mpfile_string(self, client_store):
        client, _ = client_store
        r = client.post(f"{API}/contributions",
                        json={"mpfile": ">>> Fe2O3\nk: v\n"},
                        headers={"X-API-KEY": "k-bob"})
        assert r.status_code == 201

    def test_structured_document(self, client_store):
        client, _ = client_store
        doc = parse_mpfile(">>> Fe2O3\nk: v\n>>>> T\na,b\n1,2\n")
        r = client.post(f"{API}/contributions",
                        json={"document": wire.document_payload(doc)},
                        headers={"X-API-KEY": "k-bob"})
        assert r.status_code == 201
        cid = r.json()["results"][0]["cid"]
        record = client.get(f"{API}/contributions/{cid}",
                            headers={"X-API-KEY": "k-bob"}).json()
        assert record["mpfile"] == ">>> Fe2O3\nk: v\n>>>> T\na,b\n1,2\n"

    def test_exactly_one_representation(self, client_store):
        client, _ = client_store
        r = client.post(f"{API}/contributions",
                        json={"mpfile": ">>> Fe2O3\n", "document": {}},
                        headers={"X-API-KEY": "k-bob"})
        assert r.status_code == 400
        r = client.post(f"{API}/contributions", json={},
                        headers={"X-API-KEY": "k-bob"})
        assert r.status_code == 400

    def test_invalid_json(self, client_store):
        client, _ = client_store
        r = client.post(f"{API}/contributions", content="{nope",
                        headers={"X-API-KEY": "k-bob", "content-type": "application/json"})
        assert r.status_code == 400

    def test_expected_revision_conflict(self, client_store):
        client, _ = client_store
        post_doc(client, ">>> Fe2O3\nk: v\n")
        post_doc(client, ">>> Fe2O3\nk: w\n")
        r = client.post(f"{API}/contributions",
                        json={"mpfile": ">>> Fe2O3\nk: x\n", "expected_revision": 1},
                        headers={"X-API-KEY": "k-bob"})
        assert r.status_code == 409

    def test_cid_retargeting(self, client_store):
        client, _ = client_store
        cid = post_doc(client, ">>> Fe2O3\nk: v\n").json()["results"][0]["cid"]
        r = client.post(f"{API}/contributions",
                        json={"mpfile": ">>> NiO\nk: v\n", "cid": cid},
                        headers={"X-API-KEY": "k-bob"})
        assert r.status_code == 200
        assert r.json()["results"][0]["cid"] == cid


class TestRetrieval:
    def test_get_bytes_are_deterministic(self, client_store):
        client, _ = client_store
        cid = post_doc(client, ">>> Fe2O3\nk: v\n").json()["results"][0]["cid"]
        url = f"{API}/contributions/{cid}"
        a = client.get(url, headers={"X-API-KEY": "k-bob"})
        b = client.get(url, headers={"X-API-KEY": "k-bob"})
        assert a.content == b.content

    def test_get_matches_library_payload(self, client_store):
        client, store = client_store
        cid = post_doc(client, ">>> Fe2O3\nk: v\n").json()["results"][0]["cid"]
        from contribkit.ingest import record_payload

        expected = wire.dumps(record_payload(store.get(cid, BOB)))
        got = client.get(f"{API}/contributions/{cid}", headers={"X-API-KEY": "k-bob"})
        assert got.content == expected.encode("utf-8")

    def test_masking_indistinguishable(self, client_store):
        client, _ = client_store
        cid = post_doc(client, ">>> Fe2O3\nk: v\n").json()["results"][0]["cid"]
        hidden = client.get(f"{API}/contributions/{cid}", headers={"X-API-KEY": "k-alice"})
        missing = client.get(f"{API}/contributions/c-ffffffffffff",
                             headers={"X-API-KEY": "k-alice"})
        assert hidden.status_code == missing.status_code == 404
        assert (hidden.json()["detail"].replace(cid, "#")
                == missing.json()["detail"].replace("c-ffffffffffff", "#"))

    def test_released_projectless_goes_public(self, client_store):
        client, _ = client_store
        cid = post_doc(client, ">>> Fe2O3\nk: v\n").json()["results"][0]["cid"]
        assert client.get(f"{API}/contributions/{cid}").status_code == 404
        release(client, cid)
        assert client.get(f"{API}/contributions/{cid}").status_code == 200

    def test_reads_do_not_mutate(self, client_store):
        client, store = client_store
        cid = post_doc(client, ">>> Fe2O3\nk: v\n").json()["results"][0]["cid"]
        before = store.fingerprint()
        client.get(f"{API}/contributions/{cid}", headers={"X-API-KEY": "k-bob"})
        client.get(f"{API}/contributions", headers={"X-API-KEY": "k-bob"})
        client.get(f"{API}/contributions/c-ffffffffffff")
        client.get(f"{API}/materials/Fe2O3", headers={"X-API-KEY": "k-admin"})
        assert store.fingerprint() == before


class TestListing:
    def fill(self, client, n=7):
        cids = []
        for i in range(n):
            r = post_doc(client, f">>> por-{i}\nbatch: {i}\n", key="k-alice")
            cids.append(r.json()["results"][0]["cid"])
        return cids

    def test_pagination_covers_everything_once(self, client_store):
        client, _ = client_store
        cids = self.fill(client)
        seen = []
        offset = 0
        while True:
            page = client.get(f"{API}/contributions",
                              params={"limit": 3, "offset": offset},
                              headers={"X-API-KEY": "k-alice"}).json()
            assert page["total"] == 7
            assert page["limit"] == 3
            seen.extend(r["cid"] for r in page["results"])
            if offset + 3 >= page["total"]:
                break
            offset += 3
        assert sorted(seen) == sorted(cids)
        assert len(set(seen)) == 7

    def test_results_are_cid_ordered(self, client_store):
        client, _ = client_store
        self.fill(client)
        listing = client.get(f"{API}/contributions",
                             headers={"X-API-KEY": "k-alice"}).json()
        got = [r["cid"] for r in listing["results"]]
        assert got == sorted(got)

    def test_visibility_filtering(self, client_store):
        client, _ = client_store
        self.fill(client, 3)
        post_doc(client, ">>> Fe2O3\nk: v\n", key="k-bob")
        assert client.get(f"{API}/contributions").json()["total"] == 0
        assert client.get(f"{API}/contributions",
                          headers={"X-API-KEY": "k-bob"}).json()["total"] == 1
        assert client.get(f"{API}/contributions",
                          headers={"X-API-KEY": "k-admin"}).json()["total"] == 4

    def test_filters(self, client_store):
        client, _ = client_store
        self.fill(client, 3)
        r = client.get(f"{API}/contributions",
                       params={"project": "por", "state": "staged"},
                       headers={"X-API-KEY": "k-alice"})
        assert r.json()["total"] == 3

    def test_identifier_filter_spelling_insensitive(self, client_store):
        client, _ = client_store
        post_doc(client, ">>> Ni20Fe80Pt10\nk: v\n")
        r = client.get(f"{API}/contributions",
                       params={"identifier": "Fe80Ni20Pt10"},
                       headers={"X-API-KEY": "k-bob"})
        assert r.json()["total"] == 1

    def test_parameter_errors(self, client_store):
        client, _ = client_store
        bad_state = client.get(f"{API}/contributions", params={"state": "launched"})
        assert bad_state.status_code == 400
        bad_limit = client.get(f"{API}/contributions", params={"limit": 0})
        assert bad_limit.status_code == 400
        bad_ident = client.get(f"{API}/contributions", params={"identifier": "???"})
        assert bad_ident.status_code == 400


class TestStateEndpoint:
    def test_lifecycle(self, client_store):
        client, _ = client_store
        cid = post_doc(client, ">>> por-1\nk: v\n", key="k-alice").json()["results"][0]["cid"]
        r = client.patch(f"{API}/contributions/{cid}/state",
                         content=wire.dumps({"state": "approved"}),
                         headers={"X-API-KEY": "k-alice"})
        assert r.status_code == 200
        assert r.json() == {"cid": cid, "state": "approved", "revision": 2}

    def test_illegal_transition(self, client_store):
        client, _ = client_store
        cid = post_doc(client, ">>> por-1\nk: v\n", key="k-alice").json()["results"][0]["cid"]
        r = client.patch(f"{API}/contributions/{cid}/state",
                         content=wire.dumps({"state": "released"}),
                         headers={"X-API-KEY": "k-alice"})
        assert r.status_code == 409

    def test_unknown_state(self, client_store):
        client, _ = client_store
        cid = post_doc(client, ">>> por-1\nk: v\n", key="k-alice").json()["results"][0]["cid"]
        r = client.patch(f"{API}/contributions/{cid}/state",
                         content=wire.dumps({"state": "launched"}),
                         headers={"X-API-KEY": "k-alice"})
        assert r.status_code == 400

    def test_invisible_is_404_not_403(self, client_store):
        client, _ = client_store
        cid = post_doc(client, ">>> por-1\nk: v\n", key="k-alice").json()["results"][0]["cid"]
        r = client.patch(f"{API}/contributions/{cid}/state",
                         content=wire.dumps({"state": "approved"}),
                         headers={"X-API-KEY": "k-bob"})
        assert r.status_code == 404

    def test_visible_without_rights_is_403(self, client_store):
        client, _ = client_store
        cid = post_doc(client, ">>> Fe2O3\nk: v\n", key="k-bob").json()["results"][0]["cid"]
        r = client.patch(f"{API}/contributions/{cid}/state",
                         content=wire.dumps({"state": "approved"}),
                         headers={"X-API-KEY": "k-bob"})
        assert r.status_code == 403

    def test_bad_body(self, client_store):
        client, _ = client_store
        r = client.patch(f"{API}/contributions/c-000000000000/state",
                         content="{bad", headers={"X-API-KEY": "k-admin"})
        assert r.status_code == 400


class TestMaterials:
    def test_project_detail(self, client_store):
        client, _ = client_store
        cid = post_doc(client, ">>> por-1\nk: v\n", key="k-alice").json()["results"][0]["cid"]
        release(client, cid)
        r = client.get(f"{API}/materials/por-1", headers={"X-API-KEY": "k-alice"})
        assert r.status_code == 200
        body = r.json()
        assert body["kind"] == "project"
        assert body["correlation"]["routed_project"] == "por"
        assert list(body["records"]) == [f"alice/{cid}"]
        assert body["provenance"] == [[cid, "alice", 3]]

    def test_composition_correlates_with_core(self, client_store):
        client, _ = client_store
        cid = post_doc(client, ">>> Ni20Fe80Pt10\nk: v\n").json()["results"][0]["cid"]
        release(client, cid)
        r = client.get(f"{API}/materials/Fe80Ni20Pt10")
        assert r.status_code == 200
        body = r.json()
        assert body["kind"] == "composition"
        assert body["identifier"] == "Fe8Ni2Pt"
        assert body["correlation"]["matches"] == ["mp-12"]

    def test_unreleased_hidden_from_non_admin(self, client_store):
        client, _ = client_store
        post_doc(client, ">>> Fe2O3\nk: v\n")
        assert client.get(f"{API}/materials/Fe2O3",
                          headers={"X-API-KEY": "k-bob"}).status_code == 404
        assert client.get(f"{API}/materials/Fe2O3",
                          headers={"X-API-KEY": "k-admin"}).status_code == 200

    def test_bad_identifier(self, client_store):
        client, _ = client_store
        assert client.get(f"{API}/materials/mp-abc").status_code == 400


def grid_fixture(client):
    cids = []
    for i, (x, y) in enumerate([(0, 0), (0, 1), (1, 0), (1, 1)]):
        r = post_doc(client, f">>> por-{i}\nx: {x}\ny: {y}\n", key="k-alice")
        cid = r.json()["results"][0]["cid"]
        release(client, cid)
        cids.append(cid)
    return cids


class TestGridEndpoints:
    def test_grid_counts(self, client_store):
        client, _ = client_store
        grid_fixture(client)
        r = client.get(f"{API}/index/grid",
                       params={"x": "x", "y": "y", "project": "por", "nx": 2, "ny": 2})
        assert r.status_code == 200
        body = r.json()
        assert body["counts"] == [[1, 1], [1, 1]]
        assert body["total"] == 4

    def test_region_matches_linear_scan(self, client_store):
        client, _ = client_store
        cids = grid_fixture(client)
        r = client.get(f"{API}/index/region",
                       params={"x": "x", "y": "y", "project": "por",
                               "x0": -1, "x1": 2, "y0": -1, "y1": 2})
        assert r.status_code == 200
        assert r.json()["ids"] == sorted(cids)
        r = client.get(f"{API}/index/region",
                       params={"x": "x", "y": "y", "project": "por",
                               "x0": 0.5, "x1": 1.0, "y0": -1, "y1": 2})
        assert r.json()["ids"] == sorted([cids[2], cids[3]])

    def test_malformed_rectangle(self, client_store):
        client, _ = client_store
        grid_fixture(client)
        r = client.get(f"{API}/index/region",
                       params={"x": "x", "y": "y", "project": "por",
                               "x0": 2, "x1": -1, "y0": 0, "y1": 1})
        assert r.status_code == 400

    def test_unknown_property(self, client_store):
        client, _ = client_store
        grid_fixture(client)
        r = client.get(f"{API}/index/grid",
                       params={"x": "nope", "y": "y", "project": "por"})
        assert r.status_code == 404

    def test_missing_parameter_is_400(self, client_store):
        client, _ = client_store
        r = client.get(f"{API}/index/grid", params={"y": "y"})
        assert r.status_code == 400
        assert "x" in r.json()["detail"]

    def test_bad_bin_counts(self, client_store):
        client, _ = client_store
        grid_fixture(client)
        r = client.get(f"{API}/index/grid",
                       params={"x": "x", "y": "y", "project": "por", "nx": 0})
        assert r.status_code == 400

    def test_empty_scope(self, client_store):
        client, _ = client_store
        r = client.get(f"{API}/index/grid", params={"x": "x", "y": "y", "project": "por"})
        assert r.status_code == 404


class TestPostprocess:
    def test_grid_artifact_cached_and_served(self, client_store):
        client, _ = client_store
        grid_fixture(client)
        r = client.post(f"{API}/postprocess",
                        json={"name": "grid", "project": "por",
                              "x": "x", "y": "y", "nx": 2, "ny": 2},
                        headers={"X-API-KEY": "k-alice"})
        assert r.status_code == 200
        body = r.json()
        assert body["processed"] == 4
        artifact = body["artifact"]
        assert artifact == "grid/por/xxy/2x2"
        served = client.get(f"{API}/index/grid",
                            params={"x": "x", "y": "y", "artifact": artifact})
        assert served.status_code == 200
        assert served.json()["counts"] == [[1, 1], [1, 1]]

    def test_unknown_artifact(self, client_store):
        client, _ = client_store
        r = client.get(f"{API}/index/grid",
                       params={"x": "x", "y": "y", "artifact": "grid/zzz/xxy/9x9"})
        assert r.status_code == 404

    def test_unknown_processor(self, client_store):
        client, _ = client_store
        r = client.post(f"{API}/postprocess", json={"name": "shiny"},
                        headers={"X-API-KEY": "k-admin"})
        assert r.status_code == 404

    def test_requires_scope_rights(self, client_store):
        client, _ = client_store
        r = client.post(f"{API}/postprocess", json={"name": "grid", "project": "por"},
                        headers={"X-API-KEY": "k-bob"})
        assert r.status_code == 403
        r = client.post(f"{API}/postprocess", json={"name": "grid", "project": "por"})
        assert r.status_code == 403


class TestBulk:
    def stream(self, client, content, key="k-alice", **params):
        headers = {"X-API-KEY": key} if key else {}
        return client.post(f"{API}/contributions/bulk", content=content,
                           headers=headers, params=params)

    def test_three_documents(self, client_store):
        client, _ = client_store
        docs = [f">>> por-{i}\nk: v\n" for i in range(3)]
        r = self.stream(client, "---\n".join(docs))
        assert r.status_code == 200
        body = r.json()
        assert body["accepted"] == 3
        assert body["rejected"] == []
        assert body["submitted"] == 3

    def test_malformed_document_is_isolated(self, client_store):
        client, _ = client_store
        content = ">>> por-0\nk: v\n---\n>>>>> broken\n---\n>>> por-1\nk: v\n"
        r = self.stream(client, content)
        body = r.json()
        assert body["accepted"] == 2
        assert len(body["rejected"]) == 1
        index, message = body["rejected"][0]
        assert index == 1
        assert "parse failed" in message

    def test_whitespace_segments_skipped(self, client_store):
        client, _ = client_store
        content = "---\n\n---\n>>> por-0\nk: v\n---\n   \n---\n"
        r = self.stream(client, content)
        body = r.json()
        assert body["accepted"] == 1
        assert body["submitted"] == 1

    def test_streamed_chunks_are_not_buffered_whole(self, client_store):
        client, _ = client_store
        chunks = [f">>> por-{i}\nbatch: {i}\n---\n".encode() for i in range(200)]
        status, raw = asgi_stream_bulk(client.app, chunks, api_key="k-alice")
        assert status == 200
        body = wire.loads(raw.decode())
        assert body["accepted"] == 200
        total = sum(len(c) for c in chunks)
        assert total > 4000
        assert body["max_buffered"] < 256

    def test_size_cap(self):
        client, _ = fresh_client(bulk_size_cap=64)
        r = client.post(f"{API}/contributions/bulk",
                        content=">>> por-0\nk: v\n" * 50,
                        headers={"X-API-KEY": "k-alice"})
        assert r.status_code == 413

    def test_anonymous_bulk_rejected(self, client_store):
        client, _ = client_store
        r = self.stream(client, ">>> Fe2O3\nk: v\n", key=None)
        assert r.status_code == 401

    def test_unscoped_compositions_use_project_param(self, client_store):
        client, store = client_store
        r = self.stream(client, ">>> Fe2O3\nk: v\n---\n>>> NiO\nk: v\n", project="por")
        assert r.json()["accepted"] == 2
        records = store.query(ALICE, project="por")
        assert len(records) == 2


class TestSplitter:
    def test_split_across_chunks(self):
        s = DocumentStreamSplitter()
        docs = s.feed(b">>> A\nk: v\n-")
        assert docs == []
        docs += s.feed(b"--\n>>> B\n")
        docs += s.finish()
        assert docs == [b">>> A\nk: v\n", b">>> B\n"]

    def test_crlf_separator(self):
        s = DocumentStreamSplitter()
        docs = s.feed(b">>> A\nk: v\n---\r\n>>> B\nk: v\n")
        docs += s.finish()
        assert len(docs) == 2

    def test_dashes_inside_lines_are_content(self):
        s = DocumentStreamSplitter()
        docs = s.feed(b">>> A\nk: a---b\n")
        docs += s.finish()
        assert docs == [b">>> A\nk: a---b\n"]

    def test_high_water_mark(self):
        s = DocumentStreamSplitter()
        for _ in range(100):
            s.feed(b">>> A\nk: v\n---\n")
        assert s.max_buffered <= len(b">>> A\nk: v\n---\n")


class TestEquivalence:
    def test_endpoint_equals_library_pipeline(self):
        client, service_store = fresh_client()
        lib_store = ContributionStore(rng=random.Random(0), clock=lambda: 0.0)
        text = ">>> GENERAL\nowner: lab\n>>> Fe2O3\nk: v\n>>> por-1\nk: v\n"
        r = post_doc(client, text, key="k-admin")
        lib_result = submit_text(text, lib_store, ADMIN)
        assert r.status_code == lib_result.status
        assert r.json()["results"] == [i.payload() for i in lib_result.items]
        assert service_store.fingerprint() == lib_store.fingerprint()


class TestMisc:
    def test_health(self, client_store):
        client, _ = client_store
        r = client.get(f"{API}/health")
        assert r.status_code == 200
        assert r.json() == {"status": "ok"}

    def test_frontend_mount(self, tmp_path):
        (tmp_path / "index.html").write_text("<h1>viewer</h1>")
        store = ContributionStore(rng=random.Random(0))
        app = create_app(store=store, config=ServiceConfig(api_keys=dict(KEYS)),
                         frontend_dir=tmp_path)
        client = TestClient(app)
        r = client.get("/ui/")
        assert r.status_code == 200
        assert "viewer" in r.text

    def test_no_frontend_dir_no_mount(self, client_store):
        client, _ = client_store
        assert client.get("/ui/").status_code == 404
