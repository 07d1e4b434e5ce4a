import time

import pytest
from fastapi.testclient import TestClient

from corridor_te.baselines import BaselineKind, BaselineSpec
from corridor_te.server import build_app
from corridor_te.service import SessionStore, Slot


@pytest.fixture()
def client(tmp_path):
    slots = {
        "slot-1": Slot(name="slot-1", baseline=BaselineSpec(BaselineKind.RANDOM)),
        "slot-2": Slot(name="slot-2", baseline=BaselineSpec(BaselineKind.PURE_SF)),
    }
    store = SessionStore(slots, log_dir=str(tmp_path / "logs"), default_rounds=2)
    app = build_app(store)
    with TestClient(app) as tc:
        yield tc


def test_slots_endpoint(client):
    assert client.get("/slots").json() == {"slots": ["slot-1", "slot-2"]}


def test_http_create_act_report_flow(client):
    created = client.post("/sessions", json={"opponent_slot": "slot-1", "seed": 3}).json()
    assert created["kind"] == "created"
    sid = created["session_id"]
    assert created["your_objective"] in ("meet", "pass")

    for turn in range(5):
        resp = client.post(f"/sessions/{sid}/act", json={"action": "left", "turn": turn})
        assert resp.status_code == 200
        payload = resp.json()
        assert payload["kind"] == "turn"
    assert payload["round_status"] == "round-over"

    state = client.get(f"/sessions/{sid}").json()
    assert state["round"] == 2

    report = client.get(f"/sessions/{sid}/report").json()
    assert report["kind"] == "report"
    assert report["rounds_completed"] == 1


def test_http_unknown_slot_and_session(client):
    resp = client.post("/sessions", json={"opponent_slot": "nope"})
    assert resp.status_code == 404
    assert resp.json()["code"] == "not-found"
    assert client.post("/sessions/zzz/act", json={"action": "left"}).status_code == 404
    assert client.get("/sessions/zzz/report").status_code == 404


def test_http_conflict_on_stale_turn(client):
    created = client.post("/sessions", json={"opponent_slot": "slot-1", "seed": 1}).json()
    sid = created["session_id"]
    assert client.post(f"/sessions/{sid}/act", json={"action": "left", "turn": 0}).status_code == 200
    dup = client.post(f"/sessions/{sid}/act", json={"action": "left", "turn": 0})
    assert dup.status_code == 409
    assert dup.json()["code"] == "conflict"


def test_http_timeout_flow(client):
    created = client.post(
        "/sessions", json={"opponent_slot": "slot-1", "seed": 2, "turn_timeout_ms": 50}
    ).json()
    sid = created["session_id"]
    time.sleep(0.08)
    late = client.post(f"/sessions/{sid}/act", json={"action": "left"})
    assert late.status_code == 409
    assert late.json()["code"] == "timeout-already-applied"
    # the background ticker for WS clients also resolves stale turns; here the
    # forced move already happened, so the session advanced one turn
    state = client.get(f"/sessions/{sid}").json()
    assert state["turn"] == 1


def test_http_tick_endpoint(client):
    created = client.post(
        "/sessions", json={"opponent_slot": "slot-2", "seed": 4, "turn_timeout_ms": 50}
    ).json()
    sid = created["session_id"]
    assert client.post(f"/sessions/{sid}/tick").json()["kind"] == "pending"
    time.sleep(0.08)
    forced = client.post(f"/sessions/{sid}/tick").json()
    assert forced["kind"] == "turn"
    assert forced["forced"] is True
    assert forced["moves"]["you"] == "straight"


def test_websocket_round_trip(client):
    with client.websocket_connect("/ws") as ws:
        ws.send_json({"kind": "create", "opponent_slot": "slot-1", "seed": 9, "rounds": 1})
        created = ws.receive_json()
        assert created["kind"] == "created"
        sid = created["session_id"]
        for turn in range(5):
            ws.send_json({"kind": "act", "session_id": sid, "action": "right", "turn": turn})
            payload = ws.receive_json()
            assert payload["kind"] == "turn"
        assert payload["round_status"] == "finished"
        ws.send_json({"kind": "report", "session_id": sid})
        report = ws.receive_json()
        assert report["kind"] == "report"
        assert report["rounds_completed"] == 1
        ws.send_json({"kind": "bogus"})
        assert ws.receive_json()["kind"] == "error"


def test_websocket_server_pushes_forced_turn(client):
    with client.websocket_connect("/ws") as ws:
        ws.send_json(
            {"kind": "create", "opponent_slot": "slot-1", "seed": 9, "turn_timeout_ms": 80}
        )
        created = ws.receive_json()
        assert created["kind"] == "created"
        pushed = ws.receive_json()  # ticker fires after ~80ms without input
        assert pushed["kind"] == "turn"
        assert pushed["forced"] is True
