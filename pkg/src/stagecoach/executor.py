"""Task-execution briefing: consolidate stage memory, render the brief
prompt for the chosen task, parse the returned steps and report template.

Unlike navigator turns, executor responses are free-form by design: a rigid
schema cannot cover the range of tasks (synthesis, characterization,
literature review, data analysis). The parser therefore keys on two stable
landmarks, the step-by-step header and the report-template header, and
treats bracketed spans in the template as fill-in slots.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Mapping, Sequence

from .errors import (
    InvalidChoiceIndex,
    MissingBlueprint,
    MissingStepsSection,
    MissingTemplateSection,
    UnknownSlotName,
)
from .model import (
    Campaign,
    ExecutorBrief,
    Lint,
    LintKind,
    NavigatorOutput,
    StageCursor,
    format_cursor,
)
from .templates import count_word, load_template, substitute
from .text import EMPTY_MARKER


def render_executor_prompt(
    campaign: Campaign,
    stage_summaries: Sequence[tuple[StageCursor, str]],
    current: NavigatorOutput,
    chosen: int,
) -> str:
    """Compose the brief prompt: role and blueprint preamble, consolidation
    instruction, then the inputs block with every (cursor, summary) pair,
    the current evaluation, and all three choice texts. ``chosen`` replaces
    the "{number}" placeholder."""
    if chosen not in (1, 2, 3):
        raise InvalidChoiceIndex(f"choice must be 1, 2 or 3, got {chosen}")
    if campaign.blueprint is None:
        raise MissingBlueprint(f"campaign {campaign.id} has no blueprint")
    stage_list = "\n".join(f"{s.index}) {s.title}" for s in campaign.blueprint.stages)
    summaries_block = "".join(
        f"Stage and Iteration: {format_cursor(cursor)}, Output Summary: {summary};\n\n"
        for cursor, summary in stage_summaries
    )
    return substitute(
        load_template("executor"),
        {
            "linker name": campaign.subject,
            "stage count": count_word(campaign.blueprint.stage_count),
            "stage list": stage_list,
            "number": str(chosen),
            "stage summaries": summaries_block,
            "iteration": format_cursor(current.cursor),
            "most recent summary": current.summary or EMPTY_MARKER,
            "reasoning": current.evaluation,
            "task 1 content": current.choices[0].text,
            "task 2 content": current.choices[1].text,
            "task 3 content": current.choices[2].text,
        },
    )


_STEPS_HEADER = re.compile(r"^[\s>*#_-]*(?:\*\*)?step-by-step\b.*$", re.IGNORECASE)
_TEMPLATE_HEADER = re.compile(r"^[\s>*#_-]*(?:\*\*)?template\b.*$", re.IGNORECASE)
_STEP_LINE = re.compile(r"^\s*(\d+)[.)]\s+(.*)$")
_SUMMARY_LABEL = re.compile(r"^[\s>*#_-]*(?:\*\*)?summary(?:\*\*)?\s*:\s*$", re.IGNORECASE)


def parse_executor_output(text: str) -> ExecutorBrief:
    """Split a brief into consolidated summary (before the step-by-step
    header), numbered steps, and the report template (after the template
    header). Step numbers are kept as given; contiguity is a lint, not an
    error."""
    lines = text.splitlines()
    steps_at = next((i for i, ln in enumerate(lines) if _STEPS_HEADER.match(ln)), None)
    if steps_at is None:
        raise MissingStepsSection("no step-by-step header found")
    template_at = next(
        (i for i, ln in enumerate(lines) if i > steps_at and _TEMPLATE_HEADER.match(ln)),
        None,
    )
    if template_at is None:
        raise MissingTemplateSection("no report-template header found")

    summary_lines = lines[:steps_at]
    while summary_lines and not summary_lines[0].strip():
        summary_lines.pop(0)
    if summary_lines and _SUMMARY_LABEL.match(summary_lines[0]):
        summary_lines = summary_lines[1:]
    consolidated = "\n".join(summary_lines).strip()

    numbers: list[int] = []
    steps: list[str] = []
    for ln in lines[steps_at + 1 : template_at]:
        m = _STEP_LINE.match(ln)
        if m:
            numbers.append(int(m.group(1)))
            steps.append(m.group(2).strip())
        elif steps and ln.strip():
            steps[-1] = steps[-1] + " " + ln.strip()
    if not steps:
        raise MissingStepsSection("step-by-step section contains no numbered steps")

    template = "\n".join(lines[template_at + 1 :]).strip()
    return ExecutorBrief(
        consolidated_summary=consolidated,
        steps=tuple(steps),
        report_template=template,
        step_numbers=tuple(numbers),
    )


def brief_lints(brief: ExecutorBrief) -> list[Lint]:
    if brief.step_numbers and list(brief.step_numbers) != list(
        range(1, len(brief.step_numbers) + 1)
    ):
        return [
            Lint(
                LintKind.NON_CONTIGUOUS_STEPS,
                f"step numbers are {list(brief.step_numbers)}",
            )
        ]
    return []


@dataclass(frozen=True)
class ReportInstance:
    """An instantiated report template; unfilled slots stay bracketed and
    are listed here. The text is the canonical feedback payload for the
    next navigator turn."""

    text: str
    unfilled: tuple[str, ...]


def run_brief(store, campaign_id: str, provider, chosen: int) -> ExecutorBrief:
    """Render the brief prompt for the selected choice of the open turn,
    call the provider once with a fresh context, parse, and append the
    prompt/response events. The consolidated stage summaries are the
    explicit memory channel; there is no conversational carry-over."""
    from .errors import IllegalTransition
    from .model import EventKind
    from .navigator import output_from_turn

    state = store.state(campaign_id)
    turn = state.current_turn
    if turn is None or turn.selected is None:
        raise IllegalTransition("no selected task to brief")
    if chosen not in (1, 2, 3):
        raise InvalidChoiceIndex(f"choice must be 1, 2 or 3, got {chosen}")
    current = output_from_turn(turn)
    prompt = render_executor_prompt(
        state.campaign, list(state.stage_summaries), current, chosen
    )
    store.append(
        campaign_id, EventKind.PROMPT_RENDERED, {"phase": "executor", "prompt": prompt}
    )
    response = provider.chat(prompt)
    store.append(
        campaign_id, EventKind.MODEL_RESPONDED, {"phase": "executor", "text": response}
    )
    return parse_executor_output(response)


_SLOT_RE = re.compile(r"\[([^\[\]]*)\]")


def instantiate_report(brief: ExecutorBrief, values: Mapping[str, str]) -> ReportInstance:
    """Replace each bracketed slot with its value; values for slots the
    template does not declare are an error."""
    known = set(brief.slots)
    for name in values:
        if name not in known:
            raise UnknownSlotName(name)
    unfilled: list[str] = []

    def repl(m: re.Match[str]) -> str:
        slot = m.group(1)
        if slot in values:
            return values[slot]
        if slot not in unfilled:
            unfilled.append(slot)
        return m.group(0)

    text = _SLOT_RE.sub(repl, brief.report_template)
    return ReportInstance(text=text, unfilled=tuple(unfilled))
