from __future__ import annotations

import json
from pathlib import Path

import pytest

from stagecoach import corpus
from stagecoach.model import EventKind
from stagecoach.store import EventStore


@pytest.fixture
def store(tmp_path) -> EventStore:
    return EventStore(tmp_path / "data")


def canonical_stages_payload() -> list[dict]:
    return [
        {
            "index": s.index,
            "title": s.title,
            "objective": s.objective,
            "completion_indicator": s.completion_indicator,
        }
        for s in corpus.canonical_blueprint().stages
    ]


@pytest.fixture
def active_campaign(store) -> tuple[EventStore, str]:
    """A campaign with the canonical blueprint set, cursor at 1-1."""
    cid = store.create_campaign("BTB-H", campaign_id="camp1")
    store.append(cid, EventKind.BLUEPRINT_SET, {"stages": canonical_stages_payload()})
    return store, cid


def make_turn_text(cursor: str, sentences: int = 12, with_summary: bool = False) -> str:
    """Synthetic but fully-formed navigator output."""
    body = " ".join(f"Step sentence number {i}." for i in range(1, sentences + 1))
    parts = []
    if with_summary:
        parts.append("Output Summary: The project advanced by one documented step.")
    parts.append(f"Current Stage and Iteration: {cursor}")
    parts.append("Status Evaluation: The last result was recorded and informs the next step.")
    for i in (1, 2, 3):
        parts.append(f"Task Choice {i}: {body}")
    return "\n\n".join(parts) + "\n"


def transcript_file(tmp_path: Path, responses: list[str], name: str = "script.jsonl") -> Path:
    path = tmp_path / name
    with open(path, "w", encoding="utf-8") as f:
        for r in responses:
            f.write(json.dumps({"response": r}, ensure_ascii=False) + "\n")
    return path
