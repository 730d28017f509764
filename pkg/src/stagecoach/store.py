"""Append-only event log per campaign; replay reconstructs all state.

One JSONL file per campaign: a schema header line, then one event per
line. Appends are durable before returning and serialized per campaign;
reads fold the log with the exact same step function that maintains the
live in-memory state, so live and replayed state are equal by
construction (and verified by tests, not trusted).

Timestamps are wall-clock at append time and excluded from the state
hash so replay equality is deterministic.
"""

from __future__ import annotations

import hashlib
import json
import os
import threading
import uuid
from dataclasses import dataclass, field
from datetime import datetime, timezone
from pathlib import Path
from typing import Any, Iterator, Optional

from .errors import CorruptLog, IllegalTransition, NoSuchCampaign, StorageFailure
from .model import (
    Blueprint,
    Campaign,
    CampaignStatus,
    Event,
    EventKind,
    StageCursor,
    StageSpec,
    format_cursor,
    parse_cursor,
)

SCHEMA_VERSION = 1


@dataclass
class TurnView:
    """Folded view of one navigator turn."""

    cursor: StageCursor
    reported_cursor: StageCursor
    summary: str
    evaluation: str
    choices: tuple[str, str, str]
    lints: tuple[dict, ...] = ()
    selected: Optional[int] = None
    feedback_text: Optional[str] = None
    feedback_sentinel: Optional[bool] = None

    def snapshot(self) -> dict[str, Any]:
        return {
            "cursor": format_cursor(self.cursor),
            "reported_cursor": format_cursor(self.reported_cursor),
            "summary": self.summary,
            "evaluation": self.evaluation,
            "choices": list(self.choices),
            "lints": [dict(l) for l in self.lints],
            "selected": self.selected,
            "feedback_text": self.feedback_text,
            "feedback_sentinel": self.feedback_sentinel,
        }


# Cycle phases within a campaign; the store enforces which event kinds are
# legal in each phase.
_SCOPING_PHASES = ("scoping", "scope_prompted", "scope_responded")


@dataclass
class CampaignState:
    """Everything foldable from one campaign's log."""

    campaign: Campaign
    seq: int = 0
    phase: str = "scoping"
    turns: list[TurnView] = field(default_factory=list)
    scores: dict[tuple[str, int], dict[str, int]] = field(default_factory=dict)
    stage_summaries: list[tuple[StageCursor, str]] = field(default_factory=list)
    latest_task_text: str = ""
    last_feedback_text: str = ""
    last_brief_text: str = ""

    @property
    def last_turn_cursor(self) -> Optional[StageCursor]:
        return self.turns[-1].cursor if self.turns else None

    @property
    def current_turn(self) -> Optional[TurnView]:
        """The open turn awaiting selection/feedback, if any."""
        if self.phase in ("turn_open", "task_selected", "exec_prompted", "exec_responded"):
            return self.turns[-1]
        return None

    def snapshot(self) -> dict[str, Any]:
        """Timestamp-free canonical form; basis of the state hash."""
        c = self.campaign
        return {
            "campaign": {
                "id": c.id,
                "subject": c.subject,
                "stage_count_hint": c.stage_count_hint,
                "blueprint": (
                    [
                        {
                            "index": s.index,
                            "title": s.title,
                            "objective": s.objective,
                            "completion_indicator": s.completion_indicator,
                        }
                        for s in c.blueprint.stages
                    ]
                    if c.blueprint
                    else None
                ),
                "exemplar_subject": c.exemplar_subject,
                "exemplar_summary": c.exemplar_summary,
                "cursor": format_cursor(c.cursor) if c.cursor else None,
                "rolling_summary": c.rolling_summary,
                "status": c.status.value,
            },
            "seq": self.seq,
            "phase": self.phase,
            "turns": [t.snapshot() for t in self.turns],
            "scores": sorted(
                [
                    list(k) + [v["relevance"], v["progress"], v["helpfulness"]]
                    for k, v in self.scores.items()
                ]
            ),
            "stage_summaries": [
                [format_cursor(cur), text] for cur, text in self.stage_summaries
            ],
            "latest_task_text": self.latest_task_text,
            "last_feedback_text": self.last_feedback_text,
            "last_brief_text": self.last_brief_text,
        }

    @property
    def state_hash(self) -> str:
        blob = json.dumps(
            self.snapshot(), sort_keys=True, separators=(",", ":"), ensure_ascii=False
        )
        return hashlib.sha256(blob.encode("utf-8")).hexdigest()


def _check_legal(state: Optional[CampaignState], kind: EventKind, payload: dict) -> None:
    if state is None:
        if kind is not EventKind.CAMPAIGN_CREATED:
            raise IllegalTransition(f"{kind.value} before CampaignCreated")
        return
    if kind is EventKind.CAMPAIGN_CREATED:
        raise IllegalTransition("campaign already created")
    status = state.campaign.status
    phase = state.phase
    if kind is EventKind.BLUEPRINT_SET:
        if status is not CampaignStatus.SCOPING:
            raise IllegalTransition("blueprint can only be set while scoping")
        return
    if kind is EventKind.PROMPT_RENDERED:
        stage = payload.get("phase")
        if stage == "scope":
            if status is not CampaignStatus.SCOPING:
                raise IllegalTransition("scope prompt after scoping finished")
        elif stage == "navigator":
            if status is not CampaignStatus.ACTIVE or phase not in (
                "idle",
                "nav_prompted",
                "nav_responded",
                "turn_open",
            ):
                raise IllegalTransition(f"navigator prompt illegal in phase {phase}")
        elif stage == "executor":
            if phase not in ("task_selected", "exec_prompted", "exec_responded"):
                raise IllegalTransition("executor prompt requires a selected task")
        else:
            raise IllegalTransition(f"unknown prompt phase {stage!r}")
        return
    if kind is EventKind.MODEL_RESPONDED:
        expected = {
            "scope": "scope_prompted",
            "navigator": "nav_prompted",
            "executor": "exec_prompted",
        }.get(payload.get("phase", ""))
        if expected is None or phase != expected:
            raise IllegalTransition(f"response without a pending prompt (phase {phase})")
        return
    if kind is EventKind.TURN_PARSED:
        if phase != "nav_responded":
            raise IllegalTransition("TurnParsed without a model response")
        return
    if kind is EventKind.TASK_SELECTED:
        if phase != "turn_open":
            raise IllegalTransition("TaskSelected without an open parsed turn")
        return
    if kind is EventKind.FEEDBACK_RECORDED:
        if phase not in ("task_selected", "exec_responded"):
            raise IllegalTransition("feedback requires a selected task")
        return
    if kind is EventKind.CURSOR_ADVANCED:
        if phase != "awaiting_advance":
            raise IllegalTransition("CursorAdvanced must follow FeedbackRecorded")
        return
    if kind is EventKind.CAMPAIGN_COMPLETED:
        if phase != "awaiting_advance":
            raise IllegalTransition("CampaignCompleted must follow FeedbackRecorded")
        return
    if kind is EventKind.SCORE_RECORDED:
        if status is CampaignStatus.SCOPING:
            raise IllegalTransition("no tasks to score while scoping")
        return
    raise IllegalTransition(f"unhandled event kind {kind}")


def _apply(state: Optional[CampaignState], event: Event) -> CampaignState:
    """The single fold step shared by live appends and replay."""
    kind, payload = event.kind, dict(event.payload)
    if state is None:
        campaign = Campaign(
            id=payload["id"],
            subject=payload["subject"],
            stage_count_hint=payload.get("stage_count", 5),
            exemplar_subject=payload.get("exemplar_subject"),
            exemplar_summary=payload.get("exemplar_summary"),
        )
        return CampaignState(campaign=campaign, seq=event.seq)
    state.seq = event.seq
    campaign = state.campaign
    if kind is EventKind.BLUEPRINT_SET:
        blueprint = Blueprint(
            stages=tuple(
                StageSpec(
                    index=s["index"],
                    title=s["title"],
                    objective=s["objective"],
                    completion_indicator=s["completion_indicator"],
                )
                for s in payload["stages"]
            )
        )
        state.campaign = _replace(
            campaign,
            blueprint=blueprint,
            cursor=StageCursor(1, 1),
            status=CampaignStatus.ACTIVE,
        )
        state.phase = "idle"
    elif kind is EventKind.PROMPT_RENDERED:
        state.phase = {
            "scope": "scope_prompted",
            "navigator": "nav_prompted",
            "executor": "exec_prompted",
        }[payload["phase"]]
    elif kind is EventKind.MODEL_RESPONDED:
        stage = payload["phase"]
        if stage == "scope":
            state.phase = "scope_responded"
        elif stage == "navigator":
            state.phase = "nav_responded"
        else:
            state.phase = "exec_responded"
            state.last_brief_text = payload.get("text", "")
    elif kind is EventKind.TURN_PARSED:
        if payload.get("ok"):
            turn = TurnView(
                cursor=parse_cursor(payload["expected_cursor"]),
                reported_cursor=parse_cursor(payload["cursor"]),
                summary=payload.get("summary", ""),
                evaluation=payload.get("evaluation", ""),
                choices=tuple(payload["choices"]),  # type: ignore[arg-type]
                lints=tuple(payload.get("lints", ())),
            )
            state.turns.append(turn)
            if turn.summary:
                state.campaign = _replace(campaign, rolling_summary=turn.summary)
            state.phase = "turn_open"
        else:
            state.phase = "idle"
    elif kind is EventKind.TASK_SELECTED:
        turn = state.turns[-1]
        turn.selected = payload["choice"]
        state.latest_task_text = turn.choices[payload["choice"] - 1]
        state.phase = "task_selected"
    elif kind is EventKind.FEEDBACK_RECORDED:
        turn = state.turns[-1]
        turn.feedback_text = payload["text"]
        turn.feedback_sentinel = payload["sentinel"]
        state.last_feedback_text = payload["text"]
        state.phase = "awaiting_advance"
    elif kind is EventKind.CURSOR_ADVANCED:
        new_cursor = parse_cursor(payload["cursor"])
        old = campaign.cursor
        if old is not None and new_cursor.stage > old.stage:
            state.stage_summaries.append((old, campaign.rolling_summary))
        state.campaign = _replace(campaign, cursor=new_cursor)
        state.phase = "idle"
    elif kind is EventKind.CAMPAIGN_COMPLETED:
        if campaign.cursor is not None:
            state.stage_summaries.append((campaign.cursor, campaign.rolling_summary))
        state.campaign = _replace(campaign, status=CampaignStatus.COMPLETE)
        state.phase = "complete"
    elif kind is EventKind.SCORE_RECORDED:
        key = (payload["cursor"], payload["choice"])
        state.scores[key] = {
            "relevance": payload["relevance"],
            "progress": payload["progress"],
            "helpfulness": payload["helpfulness"],
        }
    return state


def _replace(campaign: Campaign, **changes: Any) -> Campaign:
    from dataclasses import replace

    return replace(campaign, **changes)


class EventStore:
    """Filesystem-backed store: one JSONL log per campaign under
    ``data_dir``, per-campaign writer lock, cached live state."""

    def __init__(self, data_dir: str | Path):
        self.data_dir = Path(data_dir)
        self.data_dir.mkdir(parents=True, exist_ok=True)
        self._locks: dict[str, threading.Lock] = {}
        self._states: dict[str, CampaignState] = {}
        self._registry_lock = threading.Lock()

    def _lock(self, campaign_id: str) -> threading.Lock:
        with self._registry_lock:
            return self._locks.setdefault(campaign_id, threading.Lock())

    def _path(self, campaign_id: str) -> Path:
        return self.data_dir / f"{campaign_id}.jsonl"

    def create_campaign(
        self,
        subject: str,
        stage_count_hint: int = 5,
        exemplar_subject: Optional[str] = None,
        exemplar_summary: Optional[str] = None,
        campaign_id: Optional[str] = None,
    ) -> str:
        campaign_id = campaign_id or uuid.uuid4().hex[:12]
        if self._path(campaign_id).exists():
            raise StorageFailure(f"campaign {campaign_id} already exists")
        payload: dict[str, Any] = {
            "id": campaign_id,
            "subject": subject,
            "stage_count": stage_count_hint,
        }
        if exemplar_subject is not None:
            payload["exemplar_subject"] = exemplar_subject
        if exemplar_summary is not None:
            payload["exemplar_summary"] = exemplar_summary
        self.append(campaign_id, EventKind.CAMPAIGN_CREATED, payload)
        return campaign_id

    def append(self, campaign_id: str, kind: EventKind, payload: dict) -> int:
        with self._lock(campaign_id):
            state = self._states.get(campaign_id)
            if state is None and self._path(campaign_id).exists():
                state = self._fold(campaign_id)
                self._states[campaign_id] = state
            _check_legal(state, kind, payload)
            seq = (state.seq if state else 0) + 1
            event = Event(
                seq=seq,
                at=datetime.now(timezone.utc).isoformat(),
                kind=kind,
                payload=payload,
            )
            self._write(campaign_id, event, new=state is None)
            self._states[campaign_id] = _apply(state, event)
            return seq

    def _write(self, campaign_id: str, event: Event, new: bool) -> None:
        path = self._path(campaign_id)
        line = json.dumps(
            {
                "seq": event.seq,
                "at": event.at,
                "kind": event.kind.value,
                "payload": event.payload,
            },
            ensure_ascii=False,
        )
        try:
            with open(path, "a", encoding="utf-8") as f:
                if new:
                    f.write(
                        json.dumps({"schema": SCHEMA_VERSION, "campaign": campaign_id})
                        + "\n"
                    )
                f.write(line + "\n")
                f.flush()
                os.fsync(f.fileno())
        except OSError as exc:
            raise StorageFailure(f"cannot append to {path}: {exc}") from exc

    def _read_lines(self, campaign_id: str) -> list[str]:
        """Raw log lines; caller must hold the campaign lock."""
        path = self._path(campaign_id)
        if not path.exists():
            raise NoSuchCampaign(campaign_id)
        lines = path.read_text(encoding="utf-8").splitlines()
        if not lines:
            raise NoSuchCampaign(campaign_id)
        return lines

    @staticmethod
    def _parse_events(lines: list[str]) -> Iterator[Event]:
        header = json.loads(lines[0])
        if header.get("schema") != SCHEMA_VERSION:
            raise CorruptLog(0, f"unsupported schema {header.get('schema')!r}")
        expected = 1
        for raw in lines[1:]:
            if not raw.strip():
                continue
            try:
                obj = json.loads(raw)
            except json.JSONDecodeError as exc:
                raise CorruptLog(expected, f"bad JSON: {exc}") from exc
            if obj["seq"] != expected:
                raise CorruptLog(expected, f"found seq {obj['seq']}")
            yield Event(
                seq=obj["seq"],
                at=obj["at"],
                kind=EventKind(obj["kind"]),
                payload=obj["payload"],
            )
            expected += 1

    @classmethod
    def _fold_lines(cls, campaign_id: str, lines: list[str]) -> CampaignState:
        state: Optional[CampaignState] = None
        for event in cls._parse_events(lines):
            try:
                _check_legal(state, event.kind, dict(event.payload))
            except IllegalTransition as exc:
                raise CorruptLog(event.seq, str(exc)) from exc
            state = _apply(state, event)
        if state is None:
            raise NoSuchCampaign(campaign_id)
        return state

    def _fold(self, campaign_id: str) -> CampaignState:
        """Fold the on-disk log; caller must hold the campaign lock."""
        return self._fold_lines(campaign_id, self._read_lines(campaign_id))

    def events(self, campaign_id: str, from_seq: int = 1) -> list[Event]:
        with self._lock(campaign_id):
            lines = self._read_lines(campaign_id)
        return [e for e in self._parse_events(lines) if e.seq >= from_seq]

    def replay(self, campaign_id: str) -> CampaignState:
        """Fold the on-disk log from scratch; pure given the log."""
        with self._lock(campaign_id):
            return self._fold(campaign_id)

    def state(self, campaign_id: str) -> CampaignState:
        """Live cached state (folded incrementally on append)."""
        with self._lock(campaign_id):
            cached = self._states.get(campaign_id)
            if cached is None:
                cached = self._fold(campaign_id)
                self._states[campaign_id] = cached
            return cached

    def list_campaigns(self) -> list[str]:
        return sorted(p.stem for p in self.data_dir.glob("*.jsonl"))
