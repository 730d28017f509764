"""Access to the bundled campaign corpus and its replay verification.

The corpus index is the ground truth for expected cursors: each turn entry
carries the cursor printed in the published transcript and whether the
operator declared stage readiness afterwards. Verification feeds every
fixture through the parser and the advance rule and demands exact
agreement, including the terminal completion of each campaign.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from functools import lru_cache
from typing import Optional

from .model import (
    CAMPAIGN_COMPLETE,
    Blueprint,
    EventKind,
    Feedback,
    StageCursor,
    StageSpec,
    format_cursor,
    parse_cursor,
)
from .navigator import advance_cursor, parse_navigator_output, run_turn, select_choice, record_feedback
from .provider import ScriptedProvider
from .scope import ScopeRequest, parse_scope_output, render_scope_prompt
from .templates import data_path
from .text import SENTINEL_PHRASE

NON_SENTINEL_FEEDBACK = "Task executed; observations recorded for the next iteration."


@dataclass(frozen=True)
class CorpusTurn:
    n: int
    figure: str
    file: str
    cursor: str
    sentinel_after: bool


@dataclass(frozen=True)
class CorpusCampaign:
    id: str
    subject: str
    exemplar_of: Optional[str]
    turns: tuple[CorpusTurn, ...]


@lru_cache(maxsize=None)
def load_index() -> tuple[CorpusCampaign, ...]:
    raw = json.loads(data_path("corpus", "index.json").read_text(encoding="utf-8"))
    return tuple(
        CorpusCampaign(
            id=c["id"],
            subject=c["subject"],
            exemplar_of=c["exemplar_of"],
            turns=tuple(CorpusTurn(**t) for t in c["turns"]),
        )
        for c in raw["campaigns"]
    )


def campaign(campaign_id: str) -> CorpusCampaign:
    for c in load_index():
        if c.id == campaign_id:
            return c
    raise KeyError(campaign_id)


def turn_text(campaign_id: str, n: int) -> str:
    return data_path("corpus", "turns", campaign_id, f"turn_{n:02d}.txt").read_text(
        encoding="utf-8"
    )


def final_summary(campaign_id: str) -> str:
    return data_path("corpus", "summaries", f"{campaign_id}.txt").read_text(
        encoding="utf-8"
    )


def blueprint_output_text() -> str:
    return data_path("corpus", "scope", "blueprint_output.txt").read_text(
        encoding="utf-8"
    )


def executor_output_text() -> str:
    return data_path("corpus", "executor", "brief_output.txt").read_text(
        encoding="utf-8"
    )


def refinery_text(name: str) -> str:
    return data_path("corpus", "refinery", f"{name}.txt").read_text(encoding="utf-8")


def rubric_reference() -> dict:
    return json.loads(
        data_path("corpus", "rubric", "reference_report.json").read_text(
            encoding="utf-8"
        )
    )


def rubric_scores_path() -> str:
    return str(data_path("corpus", "rubric", "h_scores.csv"))


def golden_path(name: str) -> str:
    return str(data_path("corpus", "golden", name))


def canonical_scope_request() -> ScopeRequest:
    raw = json.loads(
        data_path("corpus", "scope", "request.json").read_text(encoding="utf-8")
    )
    return ScopeRequest(
        role_preamble=raw["role_preamble"],
        focus_instruction=raw["focus_instruction"],
        practice_text=raw["practice_text"],
        project_notes=tuple(raw["project_notes"]),
        stage_count_hint=raw["stage_count_hint"],
    )


@lru_cache(maxsize=None)
def canonical_blueprint() -> Blueprint:
    """The blueprint the corpus campaigns actually ran with: the refined
    stage titles joined with the scoped plan's objectives and completion
    indicators."""
    titles = (
        data_path("corpus", "scope", "refined_stages.txt")
        .read_text(encoding="utf-8")
        .splitlines()
    )
    scoped = parse_scope_output(blueprint_output_text())
    if len(titles) != scoped.stage_count:
        raise ValueError("refined stage list and scoped plan disagree on stage count")
    return Blueprint(
        stages=tuple(
            StageSpec(
                index=spec.index,
                title=title,
                objective=spec.objective,
                completion_indicator=spec.completion_indicator,
            )
            for title, spec in zip(titles, scoped.stages)
        )
    )


@dataclass(frozen=True)
class CampaignVerification:
    campaign_id: str
    turns: int
    per_stage: tuple[tuple[int, int], ...]
    completed: bool
    parse_errors: tuple[str, ...]
    cursor_mismatches: tuple[str, ...]

    @property
    def ok(self) -> bool:
        return self.completed and not self.parse_errors and not self.cursor_mismatches

    @property
    def total(self) -> int:
        return sum(count for _, count in self.per_stage)


@dataclass(frozen=True)
class CorpusVerification:
    campaigns: tuple[CampaignVerification, ...]

    @property
    def ok(self) -> bool:
        return all(c.ok for c in self.campaigns)

    @property
    def totals(self) -> dict[str, int]:
        return {c.campaign_id: c.turns for c in self.campaigns}


def verify_campaign(corpus_campaign: CorpusCampaign, stage_count: int = 5) -> CampaignVerification:
    """Feed every fixture through the parser and the advance rule; the
    machine-derived cursor must match both the parsed cursor and the index."""
    expected = StageCursor(1, 1)
    completed = False
    parse_errors: list[str] = []
    mismatches: list[str] = []
    per_stage: dict[int, int] = {}
    last = len(corpus_campaign.turns)
    for turn in corpus_campaign.turns:
        try:
            output = parse_navigator_output(turn_text(corpus_campaign.id, turn.n))
        except Exception as exc:  # noqa: BLE001 - verification collects everything
            parse_errors.append(f"turn {turn.n}: {type(exc).__name__}: {exc}")
            continue
        index_cursor = parse_cursor(turn.cursor)
        if output.cursor != expected or index_cursor != expected:
            mismatches.append(
                f"turn {turn.n}: expected {format_cursor(expected)}, "
                f"parsed {format_cursor(output.cursor)}, index {turn.cursor}"
            )
        per_stage[expected.stage] = max(
            per_stage.get(expected.stage, 0), expected.iteration
        )
        feedback = Feedback(
            SENTINEL_PHRASE + "." if turn.sentinel_after else NON_SENTINEL_FEEDBACK
        )
        nxt = advance_cursor(expected, feedback, stage_count)
        if nxt is CAMPAIGN_COMPLETE:
            completed = turn.n == last
            break
        expected = nxt
    return CampaignVerification(
        campaign_id=corpus_campaign.id,
        turns=len(corpus_campaign.turns),
        per_stage=tuple(sorted(per_stage.items())),
        completed=completed,
        parse_errors=tuple(parse_errors),
        cursor_mismatches=tuple(mismatches),
    )


def verify_corpus() -> CorpusVerification:
    return CorpusVerification(
        campaigns=tuple(verify_campaign(c) for c in load_index())
    )


def load_into_store(store, campaign_ids: Optional[list[str]] = None, choice: int = 1):
    """Materialize corpus campaigns into an event store by driving the
    real engine with scripted providers: scope, then every turn with the
    recorded readiness feedback, through completion."""
    loaded = []
    for corpus_campaign in load_index():
        if campaign_ids is not None and corpus_campaign.id not in campaign_ids:
            continue
        cid = store.create_campaign(
            subject=corpus_campaign.subject,
            stage_count_hint=5,
            exemplar_subject=(
                campaign(corpus_campaign.exemplar_of).subject
                if corpus_campaign.exemplar_of
                else None
            ),
            exemplar_summary=(
                final_summary(corpus_campaign.exemplar_of)
                if corpus_campaign.exemplar_of
                else None
            ),
            campaign_id=corpus_campaign.id,
        )
        scope_provider = ScriptedProvider([blueprint_output_text()])
        run_scope_phase(store, cid, scope_provider)
        provider = ScriptedProvider(
            [turn_text(corpus_campaign.id, t.n) for t in corpus_campaign.turns]
        )
        for turn in corpus_campaign.turns:
            run_turn(store, cid, provider)
            select_choice(store, cid, choice)
            record_feedback(
                store,
                cid,
                SENTINEL_PHRASE + "." if turn.sentinel_after else NON_SENTINEL_FEEDBACK,
            )
        loaded.append(cid)
    return loaded


def run_scope_phase(store, campaign_id: str, provider, request: Optional[ScopeRequest] = None,
                    refined_titles: Optional[list[str]] = None) -> Blueprint:
    """Drive the scoping phase against a provider and set the blueprint.
    The corpus campaigns use the canonical request and the refined titles;
    passing explicit arguments models human refinement."""
    request = request or canonical_scope_request()
    prompt = render_scope_prompt(request)
    store.append(
        campaign_id, EventKind.PROMPT_RENDERED, {"phase": "scope", "prompt": prompt}
    )
    response = provider.chat(prompt)
    store.append(
        campaign_id, EventKind.MODEL_RESPONDED, {"phase": "scope", "text": response}
    )
    parsed = parse_scope_output(response)
    titles = refined_titles
    if titles is None and request == canonical_scope_request():
        titles = [s.title for s in canonical_blueprint().stages]
    stages = [
        {
            "index": spec.index,
            "title": (titles[i] if titles else spec.title),
            "objective": spec.objective,
            "completion_indicator": spec.completion_indicator,
        }
        for i, spec in enumerate(parsed.stages)
    ]
    store.append(campaign_id, EventKind.BLUEPRINT_SET, {"stages": stages})
    return store.state(campaign_id).campaign.blueprint
