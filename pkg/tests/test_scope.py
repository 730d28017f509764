from pathlib import Path

import pytest

from stagecoach import corpus
from stagecoach.errors import (
    EmptyGroundingText,
    MissingCompletionIndicator,
    MissingObjective,
    MissingStageHeader,
    NonContiguousStages,
)
from stagecoach.scope import ScopeRequest, parse_scope_output, render_scope_prompt


def test_canonical_render_matches_golden():
    golden = Path(corpus.golden_path("scope_prompt.txt")).read_text(encoding="utf-8")
    rendered = render_scope_prompt(corpus.canonical_scope_request())
    assert rendered == golden


def test_render_is_byte_stable():
    req = corpus.canonical_scope_request()
    assert render_scope_prompt(req) == render_scope_prompt(req)


def test_stage_count_hint_and_single_note():
    req = ScopeRequest(
        role_preamble="You plan research projects.",
        focus_instruction="Work only from the text below.",
        practice_text="Some grounding text.",
        project_notes=("Only one note.",),
        stage_count_hint=3,
    )
    prompt = render_scope_prompt(req)
    assert "propose 3 broad stages" in prompt
    assert "1) Only one note." in prompt
    assert "2)" not in prompt


def test_empty_grounding_text():
    req = ScopeRequest(
        role_preamble="r", focus_instruction="f", practice_text="  ", project_notes=()
    )
    with pytest.raises(EmptyGroundingText):
        render_scope_prompt(req)


def test_parse_bundled_plan():
    blueprint = parse_scope_output(corpus.blueprint_output_text())
    assert blueprint.stage_count == 5
    assert blueprint.stages[0].title == "Synthesis of the Linker (BTB-X)"
    for spec in blueprint.stages:
        assert spec.objective.strip()
        assert spec.completion_indicator.strip()


def test_parse_non_contiguous():
    text = (
        "Stage 1: A\nObjective: a\nCompletion Indicator: b\n\n"
        "Stage 2: B\nObjective: c\nCompletion Indicator: d\n\n"
        "Stage 4: D\nObjective: e\nCompletion Indicator: f\n"
    )
    with pytest.raises(NonContiguousStages):
        parse_scope_output(text)


def test_parse_missing_completion_indicator():
    text = "Stage 1: A\nObjective: something useful\n"
    with pytest.raises(MissingCompletionIndicator):
        parse_scope_output(text)


def test_parse_missing_objective():
    text = "Stage 1: A\nCompletion Indicator: done when done\n"
    with pytest.raises(MissingObjective):
        parse_scope_output(text)


def test_parse_no_headers():
    with pytest.raises(MissingStageHeader):
        parse_scope_output("just prose, no stages anywhere")


def test_parse_tolerates_markdown_decoration():
    text = (
        "**Stage 1: Linker Work**\n"
        "**Objective:** make it\n"
        "**Completion Indicator:** made it\n"
    )
    blueprint = parse_scope_output(text)
    assert blueprint.stages[0].title == "Linker Work"
    assert blueprint.stages[0].objective == "make it"


def test_parse_multiline_bodies():
    text = (
        "Stage 1: A\n"
        "Objective: first line\ncontinues here\n"
        "Completion Indicator: done\n"
    )
    blueprint = parse_scope_output(text)
    assert blueprint.stages[0].objective == "first line continues here"
