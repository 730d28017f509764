import threading
import time

from fastapi.testclient import TestClient

from conftest import make_turn_text
from stagecoach import corpus
from stagecoach.api import create_app
from stagecoach.provider import ScriptedProvider
from stagecoach.store import EventStore
from stagecoach.text import SENTINEL_PHRASE


def _client(tmp_path, responses):
    store = EventStore(tmp_path / "data")
    provider = ScriptedProvider(responses)
    app = create_app(store, provider)
    return TestClient(app), store, provider


def _wait_ticket(client, ticket, timeout=10.0):
    deadline = time.time() + timeout
    while time.time() < deadline:
        data = client.get(f"/turns/{ticket}").json()
        if data["status"] != "pending":
            return data
        time.sleep(0.02)
    raise AssertionError("ticket never resolved")


def _bootstrap(client):
    created = client.post("/campaigns", json={"subject": "BTB-H", "id": "c1"})
    assert created.status_code == 201
    assert created.json()["status"] == "scoping"
    blueprint = client.post("/campaigns/c1/blueprint", json={})
    assert blueprint.status_code == 200
    assert len(blueprint.json()["stages"]) == 5
    return created.json()["id"]


def test_campaign_lifecycle_endpoints(tmp_path):
    client, store, _ = _client(
        tmp_path,
        [
            corpus.blueprint_output_text(),
            corpus.turn_text("H", 1),
            corpus.executor_output_text(),
        ],
    )
    cid = _bootstrap(client)

    # fresh campaign: no current turn yet
    assert client.get(f"/campaigns/{cid}/turns/current").status_code == 404

    started = client.post(f"/campaigns/{cid}/turns")
    assert started.status_code == 202
    done = _wait_ticket(client, started.json()["ticket"])
    assert done["status"] == "done"
    assert len(done["turn"]["choices"]) == 3

    current = client.get(f"/campaigns/{cid}/turns/current")
    assert current.status_code == 200
    assert current.json()["cursor"] == "1-1"

    chosen = client.post(f"/campaigns/{cid}/choice", json={"index": 2})
    assert chosen.status_code == 200

    brief = client.post(f"/campaigns/{cid}/brief", json={})
    assert brief.status_code == 200
    assert len(brief.json()["steps"]) == 7
    assert "Temperature used" in brief.json()["slots"]

    feedback = client.post(f"/campaigns/{cid}/feedback", json={"text": "Done; no issues."})
    assert feedback.status_code == 200
    assert feedback.json() == {"cursor": "1-2", "status": "active"}


def test_sentinel_at_terminal_stage_completes(tmp_path):
    responses = [corpus.blueprint_output_text()] + [
        make_turn_text(c) for c in ("1-1", "2-1", "3-1", "4-1", "5-1")
    ]
    client, _, _ = _client(tmp_path, responses)
    cid = _bootstrap(client)
    for _ in range(5):
        ticket = client.post(f"/campaigns/{cid}/turns").json()["ticket"]
        assert _wait_ticket(client, ticket)["status"] == "done"
        assert client.post(f"/campaigns/{cid}/choice", json={"index": 1}).status_code == 200
        response = client.post(
            f"/campaigns/{cid}/feedback", json={"text": SENTINEL_PHRASE + "."}
        )
        assert response.status_code == 200
    assert response.json() == {"cursor": None, "status": "complete"}
    assert client.get(f"/campaigns/{cid}").json()["status"] == "complete"


def test_gets_append_no_events_mutations_append_some(tmp_path):
    client, store, _ = _client(
        tmp_path, [corpus.blueprint_output_text(), corpus.turn_text("H", 1)]
    )
    cid = _bootstrap(client)
    seq_before = store.state(cid).seq
    client.get(f"/campaigns/{cid}")
    client.get(f"/campaigns/{cid}/events")
    client.get("/campaigns")
    assert store.state(cid).seq == seq_before
    ticket = client.post(f"/campaigns/{cid}/turns").json()["ticket"]
    _wait_ticket(client, ticket)
    assert store.state(cid).seq > seq_before


def test_events_endpoint_pagination(tmp_path):
    client, store, _ = _client(tmp_path, [corpus.blueprint_output_text()])
    cid = _bootstrap(client)
    events = client.get(f"/campaigns/{cid}/events", params={"from": 2}).json()["events"]
    assert [e["seq"] for e in events] == list(range(2, store.state(cid).seq + 1))


def test_unknown_campaign_is_404(tmp_path):
    client, _, _ = _client(tmp_path, [])
    assert client.get("/campaigns/nope").status_code == 404
    assert client.post("/campaigns/nope/turns").status_code == 404
    assert client.post("/campaigns/nope/blueprint", json={}).status_code == 404
    assert client.post("/campaigns/nope/choice", json={"index": 1}).status_code == 404
    assert client.post("/campaigns/nope/feedback", json={"text": "x"}).status_code == 404


def test_invalid_choice_index_is_400(tmp_path):
    client, _, _ = _client(
        tmp_path, [corpus.blueprint_output_text(), corpus.turn_text("H", 1)]
    )
    cid = _bootstrap(client)
    ticket = client.post(f"/campaigns/{cid}/turns").json()["ticket"]
    _wait_ticket(client, ticket)
    assert client.post(f"/campaigns/{cid}/choice", json={"index": 4}).status_code == 400


def test_turn_conflict_while_in_flight(tmp_path):
    gate = threading.Event()

    class GatedProvider:
        def __init__(self, responses):
            self.inner = ScriptedProvider(responses)

        def chat(self, prompt: str) -> str:
            assert gate.wait(timeout=10)
            return self.inner.chat(prompt)

    store = EventStore(tmp_path / "data")
    scope_provider = ScriptedProvider([corpus.blueprint_output_text()])
    app = create_app(store, GatedProvider([corpus.turn_text("H", 1)]))
    client = TestClient(app)
    client.post("/campaigns", json={"subject": "BTB-H", "id": "c1"})
    corpus.run_scope_phase(store, "c1", scope_provider)

    first = client.post("/campaigns/c1/turns")
    assert first.status_code == 202
    second = client.post("/campaigns/c1/turns")
    assert second.status_code == 409
    gate.set()
    assert _wait_ticket(client, first.json()["ticket"])["status"] == "done"


def test_turn_failure_reported_via_ticket(tmp_path):
    client, _, _ = _client(tmp_path, [corpus.blueprint_output_text(), "junk response"])
    cid = _bootstrap(client)
    ticket = client.post(f"/campaigns/{cid}/turns").json()["ticket"]
    result = _wait_ticket(client, ticket)
    assert result["status"] == "failed"
    assert "MissingSection" in result["error"]


def test_scores_and_reports(tmp_path):
    client, store, _ = _client(
        tmp_path, [corpus.blueprint_output_text(), corpus.turn_text("H", 1)]
    )
    cid = _bootstrap(client)
    ticket = client.post(f"/campaigns/{cid}/turns").json()["ticket"]
    _wait_ticket(client, ticket)
    for choice in (1, 2, 3):
        response = client.post(
            "/scores",
            json={
                "campaign_id": cid,
                "cursor": "1-1",
                "choice": choice,
                "relevance": 1,
                "progress": choice != 3,
                "helpfulness": 1,
            },
        )
        assert response.status_code == 201
    report = client.get("/reports/rubric", params={"campaign": cid}).json()
    assert report["task_count"] == 3
    assert report["criteria"]["relevance"]["sum"] == 3
    assert report["criteria"]["progress"]["sum"] == 2

    duplicate = client.post(
        "/scores",
        json={
            "campaign_id": cid,
            "cursor": "1-1",
            "choice": 1,
            "relevance": 0,
            "progress": 0,
            "helpfulness": 0,
        },
    )
    assert duplicate.status_code == 409

    iterations = client.get("/reports/iterations").json()
    assert iterations[cid]["total"] == 1


def test_screening_summary_endpoint(tmp_path):
    client, _, _ = _client(tmp_path, [])
    data = client.get("/screening/summary").json()
    assert data["BTB-H"]["count"] == 52
    assert sum(v["count"] for v in data.values()) == 91
