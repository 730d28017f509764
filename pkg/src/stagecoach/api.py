"""HTTP JSON gateway over the campaign lifecycle.

Every mutating endpoint maps 1:1 onto store events; GETs are snapshot
reads and append nothing. Navigator turns can take as long as the
provider does, so POST /campaigns/{id}/turns answers 202 with a ticket
pollable at /turns/{ticket}; at most one turn is in flight per campaign
(409 on conflict).
"""

from __future__ import annotations

import threading
import uuid
from concurrent.futures import ThreadPoolExecutor
from typing import Any, Optional

from fastapi import FastAPI, Query, Request
from fastapi.responses import JSONResponse
from pydantic import BaseModel, Field

from . import corpus, labdata, rubric
from .errors import (
    DuplicateScore,
    IllegalTransition,
    InvalidChoiceIndex,
    MalformedCursor,
    NoSuchCampaign,
    ProviderError,
    StagecoachError,
    UnknownTask,
)
from .executor import run_brief
from .model import CAMPAIGN_COMPLETE, format_cursor, parse_cursor
from .navigator import record_feedback, run_turn, select_choice
from .scope import ScopeRequest
from .store import CampaignState, EventStore

_STATUS_BY_ERROR: tuple[tuple[type, int], ...] = (
    (NoSuchCampaign, 404),
    (DuplicateScore, 409),
    (IllegalTransition, 409),
    (UnknownTask, 400),
    (InvalidChoiceIndex, 400),
    (MalformedCursor, 400),
    (ProviderError, 502),
    (StagecoachError, 400),
)


class CampaignCreate(BaseModel):
    subject: str
    stage_count: int = Field(default=5, ge=1)
    exemplar_subject: Optional[str] = None
    exemplar_summary: Optional[str] = None
    id: Optional[str] = None


class BlueprintRequest(BaseModel):
    practice_text: Optional[str] = None
    role_preamble: Optional[str] = None
    focus_instruction: Optional[str] = None
    project_notes: Optional[list[str]] = None
    refined_titles: Optional[list[str]] = None


class ChoiceBody(BaseModel):
    index: int


class BriefBody(BaseModel):
    choice: Optional[int] = None


class FeedbackBody(BaseModel):
    text: str


class ScoreBody(BaseModel):
    campaign_id: str
    cursor: str
    choice: int
    relevance: int = Field(ge=0, le=1)
    progress: int = Field(ge=0, le=1)
    helpfulness: int = Field(ge=0, le=1)
    overwrite: bool = False


def _campaign_view(state: CampaignState) -> dict[str, Any]:
    c = state.campaign
    return {
        "id": c.id,
        "subject": c.subject,
        "status": c.status.value,
        "cursor": format_cursor(c.cursor) if c.cursor else None,
        "stage_count": c.stage_count,
        "stage_titles": [s.title for s in c.blueprint.stages] if c.blueprint else [],
        "rolling_summary": c.rolling_summary,
        "seq": state.seq,
        "state_hash": state.state_hash,
    }


def _turn_view(state: CampaignState) -> Optional[dict[str, Any]]:
    turn = state.current_turn
    if turn is None:
        return None
    return {
        "cursor": format_cursor(turn.cursor),
        "reported_cursor": format_cursor(turn.reported_cursor),
        "summary": turn.summary,
        "evaluation": turn.evaluation,
        "choices": list(turn.choices),
        "lints": [dict(l) for l in turn.lints],
        "selected": turn.selected,
        "awaiting": state.phase,
    }


def create_app(store: EventStore, provider) -> FastAPI:
    app = FastAPI(title="stagecoach gateway")
    tickets: dict[str, dict[str, Any]] = {}
    in_flight: set[str] = set()
    guard = threading.Lock()
    executor_pool = ThreadPoolExecutor(max_workers=4)
    app.state.store = store
    app.state.provider = provider

    @app.exception_handler(StagecoachError)
    async def _stagecoach_error(_request: Request, exc: StagecoachError) -> JSONResponse:
        for etype, status in _STATUS_BY_ERROR:
            if isinstance(exc, etype):
                return JSONResponse(
                    status_code=status,
                    content={"error": type(exc).__name__, "detail": str(exc)},
                )
        return JSONResponse(status_code=500, content={"error": "internal", "detail": str(exc)})

    @app.post("/campaigns", status_code=201)
    def create_campaign(body: CampaignCreate) -> dict[str, Any]:
        cid = store.create_campaign(
            subject=body.subject,
            stage_count_hint=body.stage_count,
            exemplar_subject=body.exemplar_subject,
            exemplar_summary=body.exemplar_summary,
            campaign_id=body.id,
        )
        return _campaign_view(store.state(cid))

    @app.get("/campaigns")
    def list_campaigns() -> list[dict[str, Any]]:
        return [_campaign_view(store.state(cid)) for cid in store.list_campaigns()]

    @app.get("/campaigns/{cid}")
    def get_campaign(cid: str) -> dict[str, Any]:
        return _campaign_view(store.state(cid))

    @app.post("/campaigns/{cid}/blueprint")
    def set_blueprint(cid: str, body: BlueprintRequest) -> dict[str, Any]:
        store.state(cid)  # 404 before anything else if unknown
        request = None
        if body.practice_text is not None:
            canonical = corpus.canonical_scope_request()
            request = ScopeRequest(
                role_preamble=body.role_preamble or canonical.role_preamble,
                focus_instruction=body.focus_instruction or canonical.focus_instruction,
                practice_text=body.practice_text,
                project_notes=tuple(body.project_notes or ()),
                stage_count_hint=store.state(cid).campaign.stage_count_hint,
            )
        blueprint = corpus.run_scope_phase(
            store, cid, provider, request=request, refined_titles=body.refined_titles
        )
        return {
            "stages": [
                {
                    "index": s.index,
                    "title": s.title,
                    "objective": s.objective,
                    "completion_indicator": s.completion_indicator,
                }
                for s in blueprint.stages
            ]
        }

    @app.post("/campaigns/{cid}/turns", status_code=202)
    def start_turn(cid: str) -> dict[str, Any]:
        store.state(cid)  # 404 before ticketing if unknown
        with guard:
            if cid in in_flight:
                raise IllegalTransition(f"campaign {cid} already has a turn in flight")
            in_flight.add(cid)
            ticket = uuid.uuid4().hex
            tickets[ticket] = {"status": "pending", "campaign_id": cid}

        def _run() -> None:
            try:
                run_turn(store, cid, provider)
                tickets[ticket] = {
                    "status": "done",
                    "campaign_id": cid,
                    "turn": _turn_view(store.state(cid)),
                }
            except Exception as exc:  # noqa: BLE001 - surfaced via the ticket
                tickets[ticket] = {
                    "status": "failed",
                    "campaign_id": cid,
                    "error": f"{type(exc).__name__}: {exc}",
                }
            finally:
                with guard:
                    in_flight.discard(cid)

        executor_pool.submit(_run)
        return {"ticket": ticket}

    @app.get("/turns/{ticket}")
    def poll_turn(ticket: str) -> dict[str, Any]:
        if ticket not in tickets:
            raise NoSuchCampaign(f"unknown ticket {ticket}")
        return tickets[ticket]

    @app.get("/campaigns/{cid}/turns/current")
    def current_turn(cid: str):
        view = _turn_view(store.state(cid))
        if view is None:
            return JSONResponse(
                status_code=404,
                content={"error": "NoCurrentTurn", "detail": "no open turn"},
            )
        return view

    @app.post("/campaigns/{cid}/choice")
    def choose(cid: str, body: ChoiceBody) -> dict[str, Any]:
        store.state(cid)  # 404 before anything else if unknown
        select_choice(store, cid, body.index)
        return {"selected": body.index}

    @app.post("/campaigns/{cid}/brief")
    def brief(cid: str, body: BriefBody) -> dict[str, Any]:
        state = store.state(cid)
        turn = state.current_turn
        chosen = body.choice or (turn.selected if turn else None)
        if chosen is None:
            raise IllegalTransition("no task selected to brief")
        result = run_brief(store, cid, provider, chosen)
        return {
            "consolidated_summary": result.consolidated_summary,
            "steps": list(result.steps),
            "report_template": result.report_template,
            "slots": list(result.slots),
        }

    @app.post("/campaigns/{cid}/feedback")
    def feedback(cid: str, body: FeedbackBody) -> dict[str, Any]:
        nxt = record_feedback(store, cid, body.text)
        state = store.state(cid)
        return {
            "cursor": None if nxt is CAMPAIGN_COMPLETE else format_cursor(nxt),
            "status": state.campaign.status.value,
        }

    @app.get("/campaigns/{cid}/events")
    def events(cid: str, from_seq: int = Query(default=1, alias="from")) -> dict[str, Any]:
        return {
            "events": [
                {"seq": e.seq, "at": e.at, "kind": e.kind.value, "payload": e.payload}
                for e in store.events(cid, from_seq=from_seq)
            ]
        }

    @app.post("/scores", status_code=201)
    def record_score(body: ScoreBody) -> dict[str, Any]:
        score = rubric.score_task(
            store,
            body.campaign_id,
            parse_cursor(body.cursor),
            body.choice,
            body.relevance,
            body.progress,
            body.helpfulness,
            overwrite=body.overwrite,
        )
        return {"task": f"{body.campaign_id}/{body.cursor}/{body.choice}", "total": score.total}

    @app.get("/reports/rubric")
    def rubric_report(campaign: str) -> dict[str, Any]:
        state = store.state(campaign)
        scores = rubric.scores_from_state(state)
        task_count = 3 * len(state.turns)
        report = rubric.aggregate(scores, task_count)
        return {
            "campaign": campaign,
            "task_count": report.task_count,
            "criteria": {
                c.name: {"sum": c.total, "pct": c.pct, "pct_raw": c.pct_raw}
                for c in report.criteria
            },
            "total": {
                "sum": report.total,
                "pct": report.total_pct,
                "pct_raw": report.total_pct_raw,
            },
        }

    @app.get("/reports/iterations")
    def iterations_report() -> dict[str, Any]:
        table = {}
        for cid in store.list_campaigns():
            state = store.state(cid)
            stats = labdata.iteration_stats(labdata.trajectory_from_state(state))
            table[cid] = stats.as_dict()
        return table

    @app.get("/screening/summary")
    def screening_summary() -> dict[str, Any]:
        records = labdata.load_screening_csv(labdata.bundled_screening_path())
        summaries = labdata.dataset_summary(records)
        return {
            linker: {
                "count": s.count,
                "temp_min": s.temp_min,
                "temp_max": s.temp_max,
                "time_min": s.time_min,
                "time_max": s.time_max,
            }
            for linker, s in sorted(summaries.items())
        }

    return app


def serve(store: EventStore, provider, host: str = "127.0.0.1", port: int = 8787) -> None:
    import uvicorn

    uvicorn.run(create_app(store, provider), host=host, port=port)
