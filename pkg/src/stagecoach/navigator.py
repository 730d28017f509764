"""The per-iteration navigation loop.

Renders the navigator prompt from campaign state, parses the model's
structured response, applies the cursor-advance rule, and lints the
contracts. The model's self-reported cursor is stored verbatim but never
trusted: the authoritative cursor always comes from advance_cursor, and
divergence surfaces as a lint.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Optional, Union

from .errors import (
    DuplicateSection,
    IllegalTransition,
    MalformedCursor,
    MissingBlueprint,
    MissingSection,
)
from .model import (
    CAMPAIGN_COMPLETE,
    Campaign,
    CampaignStatus,
    EventKind,
    Feedback,
    Lint,
    LintKind,
    NavigatorOutput,
    StageCursor,
    TaskChoice,
    format_cursor,
    parse_cursor,
)
from .templates import count_word, load_template, substitute
from .text import EMPTY_MARKER, detect_sentinel  # noqa: F401  (re-exported)

SUMMARY_SENTENCE_LIMIT = 30
CHOICE_SENTENCE_RANGE = (10, 20)

SECTION_SUMMARY = "Output Summary"
SECTION_CURSOR = "Current Stage and Iteration"
SECTION_EVALUATION = "Status Evaluation"
SECTION_CHOICES = ("Task Choice 1", "Task Choice 2", "Task Choice 3")


@dataclass(frozen=True)
class NavigatorInput:
    """The four prompt input fields. On a campaign's very first turn the
    history fields are empty and render as the designated empty marker."""

    summary: str = ""
    last_cursor: Optional[StageCursor] = None
    latest_task: str = ""
    feedback: Optional[Feedback] = None


@dataclass(frozen=True)
class NavigatorTurn:
    """One loop round-trip as returned by run_turn; selection and feedback
    are separate human actions recorded later."""

    prompt: str
    response: str
    output: Optional[NavigatorOutput]
    lints: tuple[Lint, ...]
    expected_cursor: Optional[StageCursor]


def render_navigator_prompt(campaign: Campaign, nav_input: NavigatorInput) -> str:
    """Emit, in order: role line with the campaign subject substituted, the
    numbered stage list, the exemplar-summary block (only when the campaign
    carries one), the output-field rules, the inputs block, and the required
    output skeleton."""
    if campaign.blueprint is None:
        raise MissingBlueprint(f"campaign {campaign.id} has no blueprint")
    stage_list = "\n".join(f"{s.index}) {s.title}" for s in campaign.blueprint.stages)
    parts = [
        substitute(
            load_template("navigator_role"),
            {
                "linker name": campaign.subject,
                "stage count": count_word(campaign.blueprint.stage_count),
                "stage list": stage_list,
            },
        )
    ]
    if campaign.exemplar_summary is not None:
        parts.append(
            substitute(
                load_template("navigator_exemplar"),
                {
                    "another linker name": campaign.exemplar_subject or "another",
                    "full summary example": campaign.exemplar_summary,
                },
            )
        )
    feedback = nav_input.feedback
    parts.append(
        substitute(
            load_template("navigator_rules"),
            {
                "summary": nav_input.summary or EMPTY_MARKER,
                "iteration": (
                    format_cursor(nav_input.last_cursor)
                    if nav_input.last_cursor is not None
                    else EMPTY_MARKER
                ),
                "last task": nav_input.latest_task or EMPTY_MARKER,
                "human feedback": (
                    feedback.text if feedback is not None and feedback.text else EMPTY_MARKER
                ),
            },
        )
    )
    return "\n\n".join(p.rstrip("\n") for p in parts) + "\n"


_SECTION_HEADER = re.compile(
    r"^[\s>*#_-]*(?:\*\*)?"
    r"(output summary|current stage and iteration|status evaluation|task choice [123])"
    r"(?:\*\*)?\s*:\s*(.*)$",
    re.IGNORECASE,
)

_CANONICAL = {
    "output summary": SECTION_SUMMARY,
    "current stage and iteration": SECTION_CURSOR,
    "status evaluation": SECTION_EVALUATION,
    "task choice 1": SECTION_CHOICES[0],
    "task choice 2": SECTION_CHOICES[1],
    "task choice 3": SECTION_CHOICES[2],
}


def split_sections(text: str) -> dict[str, str]:
    """Split a response into its labeled sections. Labels match
    case-insensitively with optional markdown decoration; the first match
    wins and a second one raises DuplicateSection."""
    sections: dict[str, list[str]] = {}
    current: Optional[list[str]] = None
    for line in text.splitlines():
        m = _SECTION_HEADER.match(line)
        if m:
            name = _CANONICAL[m.group(1).lower()]
            if name in sections:
                raise DuplicateSection(name)
            current = sections[name] = []
            rest = m.group(2).strip()
            if rest:
                current.append(rest)
            continue
        if current is not None:
            current.append(line)
    return {name: "\n".join(body).strip() for name, body in sections.items()}


def parse_navigator_output(text: str) -> NavigatorOutput:
    """Extract the labeled sections into a NavigatorOutput. Section order is
    not required. The published transcripts omit the rolling summary, so a
    missing Output Summary yields an empty summary rather than an error; the
    cursor, evaluation, and all three task choices are mandatory."""
    sections = split_sections(text)
    if SECTION_CURSOR not in sections:
        raise MissingSection(SECTION_CURSOR)
    if SECTION_EVALUATION not in sections:
        raise MissingSection(SECTION_EVALUATION)
    for name in SECTION_CHOICES:
        if name not in sections:
            raise MissingSection(name)
    cursor = parse_cursor(sections[SECTION_CURSOR])
    choices = tuple(
        TaskChoice(index=i, text=sections[name])
        for i, name in enumerate(SECTION_CHOICES, start=1)
    )
    return NavigatorOutput(
        summary=sections.get(SECTION_SUMMARY, ""),
        cursor=cursor,
        evaluation=sections[SECTION_EVALUATION],
        choices=choices,  # type: ignore[arg-type]
    )


def advance_cursor(
    cursor: StageCursor, feedback: Feedback, stage_count: int
) -> Union[StageCursor, object]:
    """The advance rule: sentinel feedback moves to (stage+1, 1), or to
    CAMPAIGN_COMPLETE at the terminal stage; anything else increments the
    iteration. Pure function."""
    if cursor.stage > stage_count:
        raise ValueError(
            f"cursor stage {cursor.stage} exceeds stage count {stage_count}"
        )
    if feedback.sentinel:
        if cursor.stage == stage_count:
            return CAMPAIGN_COMPLETE
        return StageCursor(cursor.stage + 1, 1)
    return StageCursor(cursor.stage, cursor.iteration + 1)


def lint_turn(
    output: NavigatorOutput, expected_cursor: Optional[StageCursor] = None
) -> list[Lint]:
    """Advisory checks on a parsed turn; never blocks the loop."""
    lints: list[Lint] = []
    if output.summary_sentence_count > SUMMARY_SENTENCE_LIMIT:
        lints.append(
            Lint(
                LintKind.SUMMARY_TOO_LONG,
                f"summary has {output.summary_sentence_count} sentences "
                f"(limit {SUMMARY_SENTENCE_LIMIT})",
            )
        )
    lo, hi = CHOICE_SENTENCE_RANGE
    for choice in output.choices:
        if not lo <= choice.sentence_count <= hi:
            lints.append(
                Lint(
                    LintKind.TASK_CHOICE_LENGTH_OUT_OF_RANGE,
                    f"task choice {choice.index} has {choice.sentence_count} sentences "
                    f"(expected {lo}-{hi})",
                    choice=choice.index,
                )
            )
    if expected_cursor is not None and output.cursor != expected_cursor:
        lints.append(
            Lint(
                LintKind.CURSOR_DIVERGENCE,
                f"model reported {format_cursor(output.cursor)}, "
                f"advance rule expects {format_cursor(expected_cursor)}",
            )
        )
    return lints


def build_input(state) -> NavigatorInput:
    """Assemble the next turn's inputs from folded campaign state."""
    return NavigatorInput(
        summary=state.campaign.rolling_summary,
        last_cursor=state.last_turn_cursor,
        latest_task=state.latest_task_text,
        feedback=Feedback(state.last_feedback_text) if state.last_feedback_text else None,
    )


def run_turn(store, campaign_id: str, provider, nav_input: Optional[NavigatorInput] = None) -> NavigatorTurn:
    """Run one navigator turn: render, call the provider once with a fresh
    context, parse, lint, and append the turn events. Task selection is a
    separate human action and is never automated here.

    Provider and parse errors propagate; a parse failure still appends the
    model response plus a flagged failure event so the campaign stays
    resumable with its cursor unchanged.
    """
    state = store.state(campaign_id)
    campaign = state.campaign
    if campaign.status is not CampaignStatus.ACTIVE:
        raise IllegalTransition(
            f"campaign {campaign_id} is {campaign.status.value}, not active"
        )
    if nav_input is None:
        nav_input = build_input(state)
    expected = campaign.cursor
    prompt = render_navigator_prompt(campaign, nav_input)
    store.append(
        campaign_id,
        EventKind.PROMPT_RENDERED,
        {"phase": "navigator", "cursor": format_cursor(expected), "prompt": prompt},
    )
    response = provider.chat(prompt)
    store.append(
        campaign_id, EventKind.MODEL_RESPONDED, {"phase": "navigator", "text": response}
    )
    try:
        output = parse_navigator_output(response)
    except (MissingSection, DuplicateSection, MalformedCursor) as exc:
        store.append(
            campaign_id,
            EventKind.TURN_PARSED,
            {"ok": False, "error": f"{type(exc).__name__}: {exc}"},
        )
        raise
    lints = lint_turn(output, expected_cursor=expected)
    store.append(
        campaign_id,
        EventKind.TURN_PARSED,
        {
            "ok": True,
            "cursor": format_cursor(output.cursor),
            "summary": output.summary,
            "evaluation": output.evaluation,
            "choices": [c.text for c in output.choices],
            "lints": [l.as_dict() for l in lints],
            "expected_cursor": format_cursor(expected),
        },
    )
    return NavigatorTurn(
        prompt=prompt,
        response=response,
        output=output,
        lints=tuple(lints),
        expected_cursor=expected,
    )


def list_stage_summaries(state) -> list[tuple[StageCursor, str]]:
    """The (cursor, summary) memory channel handed to the executor: the
    last parsed summary of each completed stage, in stage order."""
    return list(state.stage_summaries)


def select_choice(store, campaign_id: str, choice: int) -> None:
    """Record the human's task selection on the open turn."""
    from .errors import InvalidChoiceIndex

    if choice not in (1, 2, 3):
        raise InvalidChoiceIndex(f"choice must be 1, 2 or 3, got {choice}")
    store.append(campaign_id, EventKind.TASK_SELECTED, {"choice": choice})


def record_feedback(store, campaign_id: str, text: str):
    """Record operator feedback and apply the advance rule: the feedback
    event is always followed by either CursorAdvanced or, on a sentinel at
    the terminal stage, CampaignCompleted.

    Returns the new cursor, or CAMPAIGN_COMPLETE.
    """
    state = store.state(campaign_id)
    campaign = state.campaign
    if campaign.cursor is None:
        raise IllegalTransition("campaign has no cursor yet")
    feedback = Feedback(text)
    store.append(
        campaign_id,
        EventKind.FEEDBACK_RECORDED,
        {"text": text, "sentinel": feedback.sentinel},
    )
    nxt = advance_cursor(campaign.cursor, feedback, campaign.stage_count)
    if nxt is CAMPAIGN_COMPLETE:
        store.append(campaign_id, EventKind.CAMPAIGN_COMPLETED, {})
    else:
        store.append(
            campaign_id, EventKind.CURSOR_ADVANCED, {"cursor": format_cursor(nxt)}
        )
    return nxt


def output_from_turn(turn) -> NavigatorOutput:
    """Rebuild a NavigatorOutput from a folded turn view."""
    return NavigatorOutput(
        summary=turn.summary,
        cursor=turn.reported_cursor,
        evaluation=turn.evaluation,
        choices=tuple(
            TaskChoice(index=i, text=t) for i, t in enumerate(turn.choices, start=1)
        ),  # type: ignore[arg-type]
    )
