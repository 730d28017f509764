"""Project scoping: render the blueprint prompt, parse the staged plan.

The scoping prompt asks the assistant for a K-stage plan grounded in a
verbatim practice text; the response is parsed into a Blueprint of
contiguous stages, each with an objective and a completion indicator.
Human refinement of the plan is modeled as re-invoking the provider with
an amended request and re-parsing; there is no diff/merge machinery.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field

from .errors import (
    EmptyGroundingText,
    MissingCompletionIndicator,
    MissingObjective,
    MissingStageHeader,
    NonContiguousStages,
)
from .model import Blueprint, StageSpec
from .templates import load_template, substitute


@dataclass(frozen=True)
class ScopeRequest:
    role_preamble: str
    focus_instruction: str
    practice_text: str
    project_notes: tuple[str, ...] = ()
    stage_count_hint: int = 5


def render_scope_prompt(request: ScopeRequest) -> str:
    """Compose the six-part scoping prompt: role, focus, fenced grounding
    text, stage request, analogy guidance, numbered notes. Byte-stable for
    identical inputs."""
    if not request.practice_text.strip():
        raise EmptyGroundingText("scope request has no practice text")
    notes = "\n".join(
        f"{i}) {note}" for i, note in enumerate(request.project_notes, start=1)
    )
    return substitute(
        load_template("scope"),
        {
            "role preamble": request.role_preamble,
            "focus instruction": request.focus_instruction,
            "practice text": request.practice_text,
            "stage count": str(request.stage_count_hint),
            "project notes": notes,
        },
    )


# Header matching tolerates markdown decorations and is case-insensitive;
# chat models vary formatting.
_STAGE_HEADER = re.compile(
    r"^[\s>*#_-]*(?:\*\*)?stage\s+(\d+)\s*[:.]\s*(.*?)[\s*_]*$",
    re.IGNORECASE,
)
_LABEL = re.compile(
    r"^[\s>*#_-]*(?:\*\*)?(objective|completion indicator)(?:\*\*)?\s*:\s*(?:\*\*)?\s*(.*)$",
    re.IGNORECASE,
)


@dataclass
class _StageDraft:
    index: int
    title: str
    objective: list[str] = field(default_factory=list)
    completion: list[str] = field(default_factory=list)


def parse_scope_output(text: str) -> Blueprint:
    """Extract 'Stage N: <title>' headers with their Objective and
    Completion Indicator bodies into a Blueprint, contiguous from 1."""
    drafts: list[_StageDraft] = []
    current: _StageDraft | None = None
    bucket: list[str] | None = None
    for line in text.splitlines():
        header = _STAGE_HEADER.match(line)
        if header:
            current = _StageDraft(index=int(header.group(1)), title=header.group(2).strip())
            drafts.append(current)
            bucket = None
            continue
        if current is None:
            continue
        label = _LABEL.match(line)
        if label:
            name = label.group(1).lower()
            bucket = current.objective if name == "objective" else current.completion
            rest = label.group(2).strip()
            if rest:
                bucket.append(rest)
            continue
        if bucket is not None and line.strip():
            bucket.append(line.strip())

    if not drafts:
        raise MissingStageHeader("no 'Stage N:' headers found")
    for pos, d in enumerate(drafts, start=1):
        if d.index != pos:
            raise NonContiguousStages(
                f"expected stage {pos}, found stage {d.index}"
            )
        if not d.objective:
            raise MissingObjective(f"stage {d.index} has no objective")
        if not d.completion:
            raise MissingCompletionIndicator(f"stage {d.index} has no completion indicator")
    return Blueprint(
        stages=tuple(
            StageSpec(
                index=d.index,
                title=d.title,
                objective=" ".join(d.objective),
                completion_indicator=" ".join(d.completion),
            )
            for d in drafts
        )
    )
