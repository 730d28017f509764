import json

import pytest

from conftest import canonical_stages_payload, make_turn_text
from stagecoach import corpus
from stagecoach.errors import CorruptLog, IllegalTransition, NoSuchCampaign
from stagecoach.model import EventKind, StageCursor
from stagecoach.navigator import record_feedback, run_turn, select_choice
from stagecoach.provider import ScriptedProvider
from stagecoach.store import EventStore
from stagecoach.text import SENTINEL_PHRASE


def test_appends_are_sequential(store):
    cid = store.create_campaign("subject", campaign_id="c1")
    seq2 = store.append(cid, EventKind.BLUEPRINT_SET, {"stages": canonical_stages_payload()})
    assert seq2 == 2
    seqs = [e.seq for e in store.events(cid)]
    assert seqs == [1, 2]


def test_task_selected_on_fresh_campaign_is_illegal(store):
    cid = store.create_campaign("subject", campaign_id="c1")
    with pytest.raises(IllegalTransition):
        store.append(cid, EventKind.TASK_SELECTED, {"choice": 1})


def test_task_selected_after_turn_parsed_is_accepted(active_campaign):
    store, cid = active_campaign
    run_turn(store, cid, ScriptedProvider([make_turn_text("1-1")]))
    store.append(cid, EventKind.TASK_SELECTED, {"choice": 2})
    assert store.state(cid).turns[-1].selected == 2


def test_feedback_requires_selection(active_campaign):
    store, cid = active_campaign
    run_turn(store, cid, ScriptedProvider([make_turn_text("1-1")]))
    with pytest.raises(IllegalTransition):
        store.append(cid, EventKind.FEEDBACK_RECORDED, {"text": "x", "sentinel": False})


def test_double_creation_is_illegal(store):
    store.create_campaign("subject", campaign_id="c1")
    with pytest.raises(Exception):
        store.create_campaign("subject", campaign_id="c1")


def test_cursor_advanced_requires_feedback(active_campaign):
    store, cid = active_campaign
    with pytest.raises(IllegalTransition):
        store.append(cid, EventKind.CURSOR_ADVANCED, {"cursor": "1-2"})


def test_live_hash_equals_replay_hash_after_every_mutation(active_campaign):
    store, cid = active_campaign

    def check():
        assert store.state(cid).state_hash == store.replay(cid).state_hash

    check()
    provider = ScriptedProvider([make_turn_text("1-1"), make_turn_text("2-1")])
    run_turn(store, cid, provider)
    check()
    select_choice(store, cid, 1)
    check()
    record_feedback(store, cid, SENTINEL_PHRASE + ".")
    check()
    run_turn(store, cid, provider)
    check()
    assert store.state(cid).campaign.cursor == StageCursor(2, 1)


def test_replay_is_idempotent(active_campaign):
    store, cid = active_campaign
    run_turn(store, cid, ScriptedProvider([make_turn_text("1-1")]))
    assert store.replay(cid).state_hash == store.replay(cid).state_hash


def test_replay_survives_process_restart(active_campaign, tmp_path):
    store, cid = active_campaign
    run_turn(store, cid, ScriptedProvider([make_turn_text("1-1")]))
    live_hash = store.state(cid).state_hash
    reopened = EventStore(store.data_dir)
    assert reopened.state(cid).state_hash == live_hash


def test_seq_gap_is_corrupt(store):
    cid = store.create_campaign("subject", campaign_id="c1")
    path = store.data_dir / f"{cid}.jsonl"
    lines = path.read_text(encoding="utf-8").splitlines()
    event = json.loads(lines[1])
    event["seq"] = 3
    lines.append(json.dumps(event))
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")
    fresh = EventStore(store.data_dir)
    with pytest.raises(CorruptLog):
        fresh.replay(cid)


def test_missing_campaign(store):
    with pytest.raises(NoSuchCampaign):
        store.replay("nope")
    with pytest.raises(NoSuchCampaign):
        store.events("nope")


def test_header_only_log_is_no_campaign(store):
    path = store.data_dir / "empty.jsonl"
    path.write_text('{"schema": 1, "campaign": "empty"}\n', encoding="utf-8")
    with pytest.raises(NoSuchCampaign):
        store.replay("empty")


def test_events_from_seq(active_campaign):
    store, cid = active_campaign
    events = store.events(cid, from_seq=2)
    assert [e.seq for e in events] == [2]


def test_no_credentials_in_event_files(active_campaign, monkeypatch):
    secret = "sk-super-secret-value-123"
    monkeypatch.setenv("STAGECOACH_API_KEY", secret)
    store, cid = active_campaign
    run_turn(store, cid, ScriptedProvider([make_turn_text("1-1")]))
    select_choice(store, cid, 1)
    record_feedback(store, cid, "All good.")
    for path in store.data_dir.glob("*.jsonl"):
        assert secret not in path.read_text(encoding="utf-8")


def test_recorded_session_replays_to_identical_turn_events(tmp_path):
    def fresh_store(name):
        s = EventStore(tmp_path / name)
        cid = s.create_campaign("BTB-H", campaign_id="c1")
        s.append(cid, EventKind.BLUEPRINT_SET, {"stages": canonical_stages_payload()})
        return s

    transcript = tmp_path / "session.jsonl"
    from stagecoach.provider import ScriptedProvider as Scripted, record_mode

    live_store = fresh_store("live")
    recorder = record_mode(Scripted([corpus.turn_text("H", 1)]), transcript)
    run_turn(live_store, "c1", recorder)

    replay_store = fresh_store("replayed")
    run_turn(replay_store, "c1", Scripted.from_transcript(transcript))

    def turn_payloads(s):
        return [dict(e.payload) for e in s.events("c1") if e.kind is EventKind.TURN_PARSED]

    assert turn_payloads(replay_store) == turn_payloads(live_store)
    assert replay_store.state("c1").state_hash == live_store.state("c1").state_hash


def test_full_corpus_session_replay(store):
    corpus.load_into_store(store, ["H"])
    state = store.state("H")
    assert state.campaign.status.value == "complete"
    assert len(state.turns) == 34
    replayed = store.replay("H")
    assert replayed.campaign == state.campaign  # field-for-field
    assert replayed.state_hash == state.state_hash
