import base64
import json
import threading

import pytest
from fastapi.testclient import TestClient

from matgen.graph import MaterialGraph
from matgen.io import graph_to_doc, parse_graph
from matgen.service.app import create_app
from matgen.service.sessions import SessionStore


@pytest.fixture(scope="module")
def client(micro_bundle, library, tmp_path_factory):
    data_dir = tmp_path_factory.mktemp("sessions")
    app = create_app(bundle=micro_bundle, library=library, data_dir=data_dir)
    return TestClient(app)


def seed_graph_doc(library):
    g = MaterialGraph(library)
    a = g.add_node("checker")
    b = g.add_node("invert")
    from matgen.graph import in_slot, out_slot

    g.add_edge(out_slot(a), in_slot(b))
    return graph_to_doc(g)


def complete_body(count=3, **overrides):
    body = {"count": count, "temperature": 1.0, "seed": 4, "max_nodes": 10, "thumbnails": False}
    body.update(overrides)
    return body


def test_library_endpoint(client, library):
    resp = client.get("/v1/library")
    assert resp.status_code == 200
    doc = resp.json()
    assert doc["hash"] == library.content_hash
    assert len(doc["operators"]) == len(library)
    names = {op["name"] for op in doc["operators"]}
    assert "output_albedo" in names


def test_create_session_empty(client):
    resp = client.post("/v1/sessions", json={})
    assert resp.status_code == 200
    doc = resp.json()
    assert doc["graph"]["nodes"] == []
    assert doc["revision"] == 0


def test_create_session_with_graph_and_get(client, library):
    resp = client.post("/v1/sessions", json={"graph": seed_graph_doc(library)})
    assert resp.status_code == 200
    sid = resp.json()["session_id"]
    got = client.get(f"/v1/sessions/{sid}")
    assert got.status_code == 200
    assert len(got.json()["graph"]["nodes"]) == 2


def test_create_session_invalid_graph(client, library):
    doc = seed_graph_doc(library)
    doc["edges"].append({"from": [0, 0], "to": [9, 0]})
    resp = client.post("/v1/sessions", json={"graph": doc})
    assert resp.status_code == 422


def test_unknown_session_404(client):
    assert client.get("/v1/sessions/zzz").status_code == 404
    assert client.post("/v1/sessions/zzz/complete", json=complete_body()).status_code == 404


def test_complete_returns_candidates_with_identical_pins(client, library):
    sid = client.post("/v1/sessions", json={"graph": seed_graph_doc(library)}).json()["session_id"]
    resp = client.post(f"/v1/sessions/{sid}/complete", json=complete_body(count=3))
    assert resp.status_code == 200
    candidates = resp.json()["candidates"]
    assert len(candidates) == 3

    def pinned_part(doc):
        nodes = [n for n in doc["graph"]["nodes"] if doc["provenance"][str(n["id"])] == "pinned"]
        pinned_ids = {n["id"] for n in nodes}
        edges = [e for e in doc["graph"]["edges"] if e["from"][0] in pinned_ids and e["to"][0] in pinned_ids]
        return json.dumps({"nodes": nodes, "edges": edges}, sort_keys=True)

    assert len({pinned_part(c) for c in candidates}) == 1
    for c in candidates:
        assert {"pinned", "generated"} >= set(c["provenance"].values())
        assert sum(1 for v in c["provenance"].values() if v == "pinned") == 2


def test_complete_rejects_bad_pins(client, library):
    sid = client.post("/v1/sessions", json={"graph": seed_graph_doc(library)}).json()["session_id"]
    resp = client.post(f"/v1/sessions/{sid}/complete", json=complete_body(pinned_node_ids=[77]))
    assert resp.status_code == 422


def test_thumbnails_present_when_requested(client, library):
    sid = client.post("/v1/sessions", json={"graph": seed_graph_doc(library)}).json()["session_id"]
    resp = client.post(f"/v1/sessions/{sid}/complete", json=complete_body(count=1, thumbnails=True, max_nodes=6))
    assert resp.status_code == 200
    thumbs = resp.json()["candidates"][0]["thumbnails"]
    assert set(thumbs) == {"albedo", "normal", "roughness", "height", "metallic"}
    png = base64.b64decode(thumbs["albedo"])
    assert png[:8] == b"\x89PNG\r\n\x1a\n"


def test_accept_flow_and_round_trip(client, library):
    sid = client.post("/v1/sessions", json={"graph": seed_graph_doc(library)}).json()["session_id"]
    resp = client.post(f"/v1/sessions/{sid}/complete", json=complete_body(count=2))
    candidates = resp.json()["candidates"]
    chosen = candidates[1]
    kept = [int(k) for k, v in chosen["provenance"].items() if v == "pinned"]
    extra = [int(k) for k, v in chosen["provenance"].items() if v == "generated"][:1]
    kept_ids = kept + extra
    accept = client.post(
        f"/v1/sessions/{sid}/accept", json={"candidate_index": 1, "kept_node_ids": kept_ids}
    )
    assert accept.status_code == 200
    after = client.get(f"/v1/sessions/{sid}").json()

    candidate_graph = parse_graph(json.dumps(chosen["graph"]), library)
    expected = candidate_graph.subgraph(kept_ids)
    assert after["graph"] == graph_to_doc(expected)
    assert after["revision"] == 1


def test_accept_without_pending_round_conflicts(client, library):
    sid = client.post("/v1/sessions", json={}).json()["session_id"]
    resp = client.post(f"/v1/sessions/{sid}/accept", json={"candidate_index": 0, "kept_node_ids": []})
    assert resp.status_code == 409


def test_accept_rejects_foreign_kept_ids(client, library):
    sid = client.post("/v1/sessions", json={"graph": seed_graph_doc(library)}).json()["session_id"]
    client.post(f"/v1/sessions/{sid}/complete", json=complete_body(count=1))
    resp = client.post(f"/v1/sessions/{sid}/accept", json={"candidate_index": 0, "kept_node_ids": [999]})
    assert resp.status_code == 422


def test_concurrent_accepts_exactly_one_wins(client, library):
    sid = client.post("/v1/sessions", json={"graph": seed_graph_doc(library)}).json()["session_id"]
    resp = client.post(f"/v1/sessions/{sid}/complete", json=complete_body(count=2))
    kept = [n["id"] for n in resp.json()["candidates"][0]["graph"]["nodes"]]
    results = []
    barrier = threading.Barrier(2)

    def accept():
        barrier.wait()
        r = client.post(f"/v1/sessions/{sid}/accept", json={"candidate_index": 0, "kept_node_ids": kept})
        results.append(r.status_code)

    threads = [threading.Thread(target=accept) for _ in range(2)]
    for t in threads:
        t.start()
    for t in threads:
        t.join()
    assert sorted(results) == [200, 409]


def test_session_persistence_across_restart(micro_bundle, library, tmp_path):
    data_dir = tmp_path / "persist"
    app = create_app(bundle=micro_bundle, library=library, data_dir=data_dir)
    client_a = TestClient(app)
    sid = client_a.post("/v1/sessions", json={"graph": seed_graph_doc(library)}).json()["session_id"]
    resp = client_a.post(f"/v1/sessions/{sid}/complete", json=complete_body(count=1))
    kept = [n["id"] for n in resp.json()["candidates"][0]["graph"]["nodes"]]
    client_a.post(f"/v1/sessions/{sid}/accept", json={"candidate_index": 0, "kept_node_ids": kept})
    before = client_a.get(f"/v1/sessions/{sid}").json()

    # a fresh app over the same data dir replays the event log
    app2 = create_app(bundle=micro_bundle, library=library, data_dir=data_dir)
    client_b = TestClient(app2)
    after = client_b.get(f"/v1/sessions/{sid}").json()
    assert after["graph"] == before["graph"]
    assert after["revision"] == before["revision"]


def test_store_replay_handles_multiple_sessions(micro_bundle, library, tmp_path):
    store = SessionStore(library, data_dir=tmp_path)
    s1 = store.create(None)
    s2 = store.create(seed_graph_doc(library))
    again = SessionStore(library, data_dir=tmp_path)
    assert set(again._sessions) == {s1.session_id, s2.session_id}


def test_static_frontend_served_when_built(micro_bundle, library):
    from pathlib import Path

    dist = Path(__file__).resolve().parent.parent / "frontend" / "dist"
    if not (dist / "index.html").exists():
        pytest.skip("frontend not built")
    app = create_app(bundle=micro_bundle, library=library, static_dir=dist)
    local = TestClient(app)
    page = local.get("/")
    assert page.status_code == 200
    assert "Material Graph Studio" in page.text
    js = local.get("/js/main.js")
    assert js.status_code == 200
    # API routes still win over the static mount
    assert local.get("/v1/library").status_code == 200
