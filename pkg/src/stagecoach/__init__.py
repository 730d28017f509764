"""Event-sourced orchestrator for human-in-the-loop LLM research campaigns."""

from .model import (
    CAMPAIGN_COMPLETE,
    Blueprint,
    Campaign,
    CampaignStatus,
    Event,
    EventKind,
    ExecutorBrief,
    Feedback,
    NavigatorOutput,
    RubricScore,
    ScreeningRecord,
    StageCursor,
    StageSpec,
    TaskChoice,
    format_cursor,
    parse_cursor,
)
from .navigator import (
    NavigatorInput,
    advance_cursor,
    detect_sentinel,
    parse_navigator_output,
    render_navigator_prompt,
)
from .store import EventStore
from .text import SENTINEL_PHRASE, count_sentences

__version__ = "0.1.0"

__all__ = [
    "CAMPAIGN_COMPLETE",
    "Blueprint",
    "Campaign",
    "CampaignStatus",
    "Event",
    "EventKind",
    "EventStore",
    "ExecutorBrief",
    "Feedback",
    "NavigatorInput",
    "NavigatorOutput",
    "RubricScore",
    "SENTINEL_PHRASE",
    "ScreeningRecord",
    "StageCursor",
    "StageSpec",
    "TaskChoice",
    "advance_cursor",
    "count_sentences",
    "detect_sentinel",
    "format_cursor",
    "parse_cursor",
    "parse_navigator_output",
    "render_navigator_prompt",
]
