import pytest
from fastapi.testclient import TestClient

from wfreach.service import create_app

from conftest import FIXTURES

FIG1_TEXT = (FIXTURES / "fig1.wfnet").read_text()
FIG5_TEXT = (FIXTURES / "fig5.wfnet").read_text()


@pytest.fixture()
def client():
    return TestClient(create_app())


def upload(client, text):
    resp = client.post("/api/nets", content=text)
    assert resp.status_code == 200, resp.text
    return resp.json()


def test_upload_returns_structure_and_soundness(client):
    data = upload(client, FIG1_TEXT)
    assert len(data["netId"]) == 64
    assert data["soundness"] == "sound"
    assert data["structureReport"]["isWorkflow"] is True
    assert data["structureReport"]["isAcyclic"] is True


def test_upload_same_net_same_id(client):
    a = upload(client, FIG1_TEXT)
    b = upload(client, FIG1_TEXT + "\n# trailing comment\n")
    assert a["netId"] == b["netId"]
    c = upload(client, FIG5_TEXT)
    assert c["netId"] != a["netId"]


def test_upload_parse_error(client):
    resp = client.post("/api/nets", content="place p1\nwat p2\n")
    assert resp.status_code == 400
    assert resp.json()["error"]["code"] == "PARSE_ERROR"


def test_upload_structure_violation(client):
    text = "place i\nplace o\ntrans t\narc i t\nsource i\nsink o\n"
    resp = client.post("/api/nets", content=text)
    assert resp.status_code == 422
    body = resp.json()
    assert body["error"]["code"] == "STRUCTURE_VIOLATION"
    assert body["structureReport"]["isWorkflow"] is False


def test_get_net_nodes_and_edges(client):
    net_id = upload(client, FIG1_TEXT)["netId"]
    resp = client.get(f"/api/nets/{net_id}")
    assert resp.status_code == 200
    data = resp.json()
    by_id = {n["id"]: n for n in data["nodes"]}
    assert by_id["p1"]["isSource"] is True
    assert by_id["p7"]["isSink"] is True
    assert by_id["t4"]["kind"] == "transition"
    assert {"from": "p1", "to": "t1"} in data["edges"]


def test_get_unknown_net_404(client):
    resp = client.get("/api/nets/deadbeef")
    assert resp.status_code == 404
    assert resp.json()["error"]["code"] == "UNKNOWN_NET"


def test_analyze_admissible(client):
    net_id = upload(client, FIG1_TEXT)["netId"]
    resp = client.post(f"/api/nets/{net_id}/analyze", json={"marking": "[p9,p10]"})
    assert resp.status_code == 200
    data = resp.json()
    assert data["verdict"] == "coverable"
    assert data["admissibility"] == "admissible"
    assert data["missing"] == ["p2", "p3", "p11", "p12", "p13", "p14", "p16", "p17", "p18"]


def test_analyze_accepts_list_and_object_markings(client):
    net_id = upload(client, FIG1_TEXT)["netId"]
    r1 = client.post(f"/api/nets/{net_id}/analyze", json={"marking": ["p5", "p12", "p14"]})
    r2 = client.post(f"/api/nets/{net_id}/analyze", json={"marking": {"p5": 1, "p12": 1, "p14": 1}})
    r3 = client.post(f"/api/nets/{net_id}/analyze", json={"marking": "[p5,p12,p14]"})
    assert r1.json()["verdict"] == "reachable"
    assert r1.content == r2.content == r3.content


def test_analyze_unknown_place_400(client):
    net_id = upload(client, FIG1_TEXT)["netId"]
    resp = client.post(f"/api/nets/{net_id}/analyze", json={"marking": "[zz]"})
    assert resp.status_code == 400
    assert resp.json()["error"]["code"] == "UNKNOWN_PLACE"


def test_analyze_bad_mode_400(client):
    net_id = upload(client, FIG1_TEXT)["netId"]
    resp = client.post(f"/api/nets/{net_id}/analyze", json={"marking": "[p1]", "mode": "zig"})
    assert resp.status_code == 400
    assert resp.json()["error"]["code"] == "BAD_MODE"


def test_analyze_cover_mode(client):
    net_id = upload(client, FIG1_TEXT)["netId"]
    resp = client.post(
        f"/api/nets/{net_id}/analyze",
        json={"marking": "[p3,p8,p14,p17]", "mode": "cover"},
    )
    data = resp.json()
    assert data["verdict"] == "coverable"
    assert data["missing"] == ["p12"]
    assert data["chosenDelta"] == "t1"


def test_analyze_responses_byte_identical(client):
    net_id = upload(client, FIG1_TEXT)["netId"]
    payload = {"marking": "[p3,p8,p14,p17]", "mode": "exact"}
    r1 = client.post(f"/api/nets/{net_id}/analyze", json=payload)
    r2 = client.post(f"/api/nets/{net_id}/analyze", json=payload)
    assert r1.content == r2.content


def test_witness_included_when_positive(client):
    net_id = upload(client, FIG1_TEXT)["netId"]
    resp = client.post(f"/api/nets/{net_id}/witness", json={"marking": "[p5,p12,p14]"})
    data = resp.json()
    assert data["verdict"] == "reachable"
    wit = data["witness"]
    assert wit["sequence"][0] == "t1"
    assert wit["markings"][-1] == {"p5": 1, "p12": 1, "p14": 1}
    assert len(wit["markings"]) == len(wit["sequence"]) + 1


def test_witness_null_when_not_reachable(client):
    net_id = upload(client, FIG1_TEXT)["netId"]
    resp = client.post(f"/api/nets/{net_id}/witness", json={"marking": "[p3,p5]"})
    data = resp.json()
    assert data["verdict"] == "not-reachable"
    assert data["witness"] is None
    assert data["conflicts"][0]["kind"] == "forward-path"


def test_concurrency_endpoint(client):
    net_id = upload(client, FIG1_TEXT)["netId"]
    resp = client.get(f"/api/nets/{net_id}/concurrency")
    data = resp.json()
    assert data["concurrency"]["p15"] == ["p6"]
    assert data["concurrency"]["p7"] == []


def test_lru_eviction_and_reupload(client):
    app = create_app(max_sessions=2)
    c = TestClient(app)
    id1 = c.post("/api/nets", content=FIG1_TEXT).json()["netId"]
    id2 = c.post("/api/nets", content=FIG5_TEXT).json()["netId"]
    seq = "place i\nplace o\ntrans t\narc i t\narc t o\nsource i\nsink o\n"
    id3 = c.post("/api/nets", content=seq).json()["netId"]
    assert c.get(f"/api/nets/{id1}").status_code == 404
    assert c.get(f"/api/nets/{id2}").status_code == 200
    again = c.post("/api/nets", content=FIG1_TEXT).json()["netId"]
    assert again == id1
    assert c.get(f"/api/nets/{id1}").status_code == 200
    # the re-upload displaced the least recently used session (the tiny net)
    assert c.get(f"/api/nets/{id3}").status_code == 404


def test_roles_survive_the_wire(client):
    net_id = upload(client, FIG1_TEXT)["netId"]
    resp = client.post(f"/api/nets/{net_id}/analyze", json={"marking": "[p3,p8,p14,p17]"})
    roles = resp.json()["roles"]
    assert roles["t1"] == "witness-path"
    assert roles["t10"] == "diverging-primary"
    assert roles["p16"] == "diverging-place"
    assert roles["p12"] == "missing"
