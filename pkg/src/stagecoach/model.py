"""Domain types shared by every phase engine, plus the cursor operations.

All types are immutable value records; mutation happens only through the
event store's serialized appends. Invariants are enforced at construction
so an instance that exists is always valid.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from enum import Enum
from typing import Any, Mapping, Optional

from .errors import MalformedCursor
from .text import count_sentences, detect_sentinel, normalize_dashes

_CURSOR_RE = re.compile(r"^(\d+)-(\d+)$")


@dataclass(frozen=True, order=True)
class StageCursor:
    """The (stage, iteration) pair that is a campaign's sole progress
    coordinate. Both components are 1-based."""

    stage: int
    iteration: int

    def __post_init__(self) -> None:
        if self.stage < 1 or self.iteration < 1:
            raise MalformedCursor(
                f"cursor components must be >= 1, got ({self.stage}, {self.iteration})"
            )


def format_cursor(cursor: StageCursor) -> str:
    """Render as '<stage>-<iteration>' with plain decimal digits."""
    return f"{cursor.stage}-{cursor.iteration}"


def parse_cursor(text: str, *, normalize: bool = False) -> StageCursor:
    """Inverse of format_cursor after trimming surrounding whitespace.

    Non-ASCII dashes are rejected unless ``normalize=True`` maps them to
    hyphens first (bit-exact corpus fidelity by default).
    """
    t = text.strip()
    if normalize:
        t = normalize_dashes(t)
    m = _CURSOR_RE.match(t)
    if not m:
        raise MalformedCursor(f"not a stage-iteration pair: {text!r}")
    stage, iteration = int(m.group(1)), int(m.group(2))
    if stage < 1 or iteration < 1:
        raise MalformedCursor(f"cursor components must be >= 1: {text!r}")
    return StageCursor(stage, iteration)


class _CampaignComplete:
    """Sentinel returned by the advance rule at the terminal stage."""

    _instance: Optional["_CampaignComplete"] = None

    def __new__(cls) -> "_CampaignComplete":
        if cls._instance is None:
            cls._instance = super().__new__(cls)
        return cls._instance

    def __repr__(self) -> str:
        return "CampaignComplete"


CAMPAIGN_COMPLETE = _CampaignComplete()


@dataclass(frozen=True)
class StageSpec:
    index: int
    title: str
    objective: str
    completion_indicator: str

    def __post_init__(self) -> None:
        if self.index < 1:
            raise ValueError("stage index must be >= 1")
        if not self.title.strip() or not self.objective.strip():
            raise ValueError("stage title and objective must be non-empty")


@dataclass(frozen=True)
class Blueprint:
    """The K-stage project plan: one objective and completion indicator per
    stage, indices contiguous from 1."""

    stages: tuple[StageSpec, ...]

    def __post_init__(self) -> None:
        if not self.stages:
            raise ValueError("blueprint needs at least one stage")
        for pos, spec in enumerate(self.stages, start=1):
            if spec.index != pos:
                raise ValueError(
                    f"stage indices must be contiguous from 1; position {pos} has index {spec.index}"
                )

    @property
    def stage_count(self) -> int:
        return len(self.stages)


@dataclass(frozen=True)
class TaskChoice:
    index: int
    text: str
    sentence_count: int = field(init=False)

    def __post_init__(self) -> None:
        if self.index not in (1, 2, 3):
            raise ValueError(f"task choice index must be 1..3, got {self.index}")
        if not self.text.strip():
            raise ValueError("task choice text must be non-empty")
        object.__setattr__(self, "sentence_count", count_sentences(self.text))


@dataclass(frozen=True)
class NavigatorOutput:
    """One parsed navigator response. Exactly three task choices, indices
    {1,2,3}; the summary may be empty (published transcripts omit it)."""

    summary: str
    cursor: StageCursor
    evaluation: str
    choices: tuple[TaskChoice, TaskChoice, TaskChoice]
    summary_sentence_count: int = field(init=False)

    def __post_init__(self) -> None:
        if len(self.choices) != 3:
            raise ValueError(f"exactly 3 task choices required, got {len(self.choices)}")
        if [c.index for c in self.choices] != [1, 2, 3]:
            raise ValueError("task choice indices must be exactly 1, 2, 3 in order")
        object.__setattr__(self, "summary_sentence_count", count_sentences(self.summary))


@dataclass(frozen=True)
class Feedback:
    """Operator feedback on the latest task. ``sentinel`` is derived from
    the text by the detection rule and cached; it cannot be set freely."""

    text: str
    sentinel: bool = field(init=False)

    def __post_init__(self) -> None:
        object.__setattr__(self, "sentinel", detect_sentinel(self.text))


_SLOT_RE = re.compile(r"\[([^\[\]]*)\]")


@dataclass(frozen=True)
class ExecutorBrief:
    """Consolidated summary, ordered steps, and a report template whose
    bracketed spans are the fill-in slots (in template order, duplicates
    preserved)."""

    consolidated_summary: str
    steps: tuple[str, ...]
    report_template: str
    step_numbers: tuple[int, ...] = ()
    slots: tuple[str, ...] = field(init=False)

    def __post_init__(self) -> None:
        object.__setattr__(
            self, "slots", tuple(m.group(1) for m in _SLOT_RE.finditer(self.report_template))
        )


@dataclass(frozen=True)
class RubricScore:
    """Per-task booleans for relevance / potential-for-progress /
    helpfulness; task identified by (campaign, cursor, choice index)."""

    campaign_id: str
    cursor: StageCursor
    choice: int
    relevance: int
    progress: int
    helpfulness: int

    def __post_init__(self) -> None:
        if self.choice not in (1, 2, 3):
            raise ValueError(f"choice index must be 1..3, got {self.choice}")
        for name in ("relevance", "progress", "helpfulness"):
            v = getattr(self, name)
            if v not in (0, 1):
                raise ValueError(f"{name} must be 0 or 1, got {v}")

    @property
    def total(self) -> int:
        return self.relevance + self.progress + self.helpfulness


@dataclass(frozen=True)
class ScreeningRecord:
    """One typed synthesis-condition row; the chemistry stays opaque."""

    exp_id: int
    linker: str
    modulators: tuple[tuple[str, int], ...]
    lm_ratio: tuple[int, int]
    temp_c: int
    time_h: int


class LintKind(str, Enum):
    SUMMARY_TOO_LONG = "SummaryTooLong"
    TASK_CHOICE_LENGTH_OUT_OF_RANGE = "TaskChoiceLengthOutOfRange"
    CURSOR_DIVERGENCE = "CursorDivergence"
    NON_CONTIGUOUS_STEPS = "NonContiguousSteps"


@dataclass(frozen=True)
class Lint:
    """Advisory contract violation; lints never block the loop."""

    kind: LintKind
    message: str
    choice: Optional[int] = None

    def as_dict(self) -> dict[str, Any]:
        d: dict[str, Any] = {"kind": self.kind.value, "message": self.message}
        if self.choice is not None:
            d["choice"] = self.choice
        return d


class CampaignStatus(str, Enum):
    SCOPING = "scoping"
    ACTIVE = "active"
    COMPLETE = "complete"


@dataclass(frozen=True)
class Campaign:
    """Aggregate folded from a campaign's event log."""

    id: str
    subject: str
    stage_count_hint: int = 5
    blueprint: Optional[Blueprint] = None
    exemplar_subject: Optional[str] = None
    exemplar_summary: Optional[str] = None
    cursor: Optional[StageCursor] = None
    rolling_summary: str = ""
    status: CampaignStatus = CampaignStatus.SCOPING

    @property
    def stage_count(self) -> int:
        return self.blueprint.stage_count if self.blueprint else self.stage_count_hint


class EventKind(str, Enum):
    CAMPAIGN_CREATED = "CampaignCreated"
    BLUEPRINT_SET = "BlueprintSet"
    PROMPT_RENDERED = "PromptRendered"
    MODEL_RESPONDED = "ModelResponded"
    TURN_PARSED = "TurnParsed"
    TASK_SELECTED = "TaskSelected"
    FEEDBACK_RECORDED = "FeedbackRecorded"
    CURSOR_ADVANCED = "CursorAdvanced"
    SCORE_RECORDED = "ScoreRecorded"
    CAMPAIGN_COMPLETED = "CampaignCompleted"


@dataclass(frozen=True)
class Event:
    """Append-only record; seq gap-free from 1, immutable once appended.
    ``at`` is wall-clock at append time and excluded from replay equality."""

    seq: int
    at: str
    kind: EventKind
    payload: Mapping[str, Any]

    def __post_init__(self) -> None:
        if self.seq < 1:
            raise ValueError("event seq must be >= 1")
