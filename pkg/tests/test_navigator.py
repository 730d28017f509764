from pathlib import Path

import pytest

from conftest import make_turn_text
from stagecoach import corpus
from stagecoach.errors import (
    DuplicateSection,
    MalformedCursor,
    MissingBlueprint,
    MissingSection,
    TransportFailure,
)
from stagecoach.model import (
    CAMPAIGN_COMPLETE,
    Campaign,
    Feedback,
    LintKind,
    StageCursor,
)
from stagecoach.navigator import (
    NavigatorInput,
    advance_cursor,
    detect_sentinel,
    lint_turn,
    parse_navigator_output,
    record_feedback,
    render_navigator_prompt,
    run_turn,
    select_choice,
)
from stagecoach.provider import ScriptedProvider
from stagecoach.text import EMPTY_MARKER, SENTINEL_PHRASE


# --- parsing -----------------------------------------------------------------


def test_parse_first_bundled_turn():
    out = parse_navigator_output(corpus.turn_text("H", 1))
    assert out.cursor == StageCursor(1, 1)
    assert out.evaluation.startswith("As we're at the beginning")
    assert len(out.choices) == 3
    assert out.summary == ""  # published transcripts omit the rolling summary


def test_parse_mid_campaign_turn():
    out = parse_navigator_output(corpus.turn_text("H", 11))
    assert out.cursor == StageCursor(2, 6)


def test_parse_missing_choice():
    text = make_turn_text("1-1").replace("Task Choice 3:", "Simply prose:")
    with pytest.raises(MissingSection) as err:
        parse_navigator_output(text)
    assert err.value.name == "Task Choice 3"


def test_parse_duplicate_section():
    text = make_turn_text("1-1") + "\nStatus Evaluation: again\n"
    with pytest.raises(DuplicateSection):
        parse_navigator_output(text)


def test_parse_summary_when_present():
    out = parse_navigator_output(make_turn_text("2-3", with_summary=True))
    assert out.summary.startswith("The project advanced")
    assert out.cursor == StageCursor(2, 3)


def test_parse_junk():
    with pytest.raises(MissingSection):
        parse_navigator_output("hello")


def test_parse_bad_cursor():
    text = make_turn_text("1-1").replace("1-1", "one-one")
    with pytest.raises(MalformedCursor):
        parse_navigator_output(text)


def test_parse_tolerates_decoration_and_order():
    text = (
        "**Status Evaluation**: solid progress\n\n"
        "## Task Choice 2: second choice text.\n\n"
        "Task Choice 1: first choice text.\n\n"
        "current stage and iteration: 3-4\n\n"
        "Task Choice 3: third choice text.\n"
    )
    out = parse_navigator_output(text)
    assert out.cursor == StageCursor(3, 4)
    assert out.choices[1].text == "second choice text."


# --- rendering ----------------------------------------------------------------


def _campaign(exemplar: bool = False) -> Campaign:
    return Campaign(
        id="c",
        subject="BTB-H",
        blueprint=corpus.canonical_blueprint(),
        exemplar_subject="BTB-prior" if exemplar else None,
        exemplar_summary="Past project summary text." if exemplar else None,
    )


def test_render_first_campaign_has_no_exemplar_block():
    prompt = render_navigator_prompt(_campaign(), NavigatorInput())
    assert "example of work summary" not in prompt


def test_render_exemplar_block_when_present():
    prompt = render_navigator_prompt(_campaign(exemplar=True), NavigatorInput())
    assert "example of work summary" in prompt
    assert "Past project summary text." in prompt
    assert "BTB-prior" in prompt


def test_render_first_turn_empty_markers():
    prompt = render_navigator_prompt(_campaign(), NavigatorInput())
    assert prompt.count(EMPTY_MARKER) == 4
    assert f"Current Summary: {EMPTY_MARKER}" in prompt
    assert f"Last Iteration: {EMPTY_MARKER}" in prompt


def test_render_with_history():
    nav_input = NavigatorInput(
        summary="So far so good.",
        last_cursor=StageCursor(1, 5),
        latest_task="Do the thing.",
        feedback=Feedback("It worked."),
    )
    prompt = render_navigator_prompt(_campaign(), nav_input)
    assert "Current Summary: So far so good." in prompt
    assert "Last Iteration: 1-5" in prompt
    assert "Human Feedback: It worked." in prompt
    assert EMPTY_MARKER not in prompt


def test_render_requires_blueprint():
    with pytest.raises(MissingBlueprint):
        render_navigator_prompt(Campaign(id="c", subject="s"), NavigatorInput())


def test_render_matches_golden_fixtures():
    first = Path(corpus.golden_path("navigator_prompt_first.txt")).read_text(encoding="utf-8")
    campaign = Campaign(id="H", subject="BTB-H", blueprint=corpus.canonical_blueprint())
    assert render_navigator_prompt(campaign, NavigatorInput()) == first

    exemplar = Path(corpus.golden_path("navigator_prompt_exemplar.txt")).read_text(encoding="utf-8")
    campaign2 = Campaign(
        id="oF",
        subject="BTB-oF",
        blueprint=corpus.canonical_blueprint(),
        exemplar_subject="BTB-H",
        exemplar_summary=corpus.final_summary("H"),
    )
    assert render_navigator_prompt(campaign2, NavigatorInput()) == exemplar


def test_prompt_skeleton_never_parses_as_output():
    prompt = render_navigator_prompt(_campaign(), NavigatorInput())
    with pytest.raises((DuplicateSection, MissingSection, MalformedCursor)):
        parse_navigator_output(prompt)


# --- sentinel / advance ---------------------------------------------------------


def test_detect_sentinel_reexport():
    assert detect_sentinel(SENTINEL_PHRASE + ".") is True


def test_advance_sentinel_mid_campaign():
    fb = Feedback(SENTINEL_PHRASE + ".")
    assert advance_cursor(StageCursor(3, 6), fb, 5) == StageCursor(4, 1)


def test_advance_non_sentinel():
    fb = Feedback("We should optimize more before proceeding.")
    assert advance_cursor(StageCursor(3, 6), fb, 5) == StageCursor(3, 7)


def test_advance_sentinel_early_stage():
    fb = Feedback(SENTINEL_PHRASE)
    assert advance_cursor(StageCursor(1, 5), fb, 5) == StageCursor(2, 1)


def test_advance_terminal_stage_completes():
    fb = Feedback(SENTINEL_PHRASE)
    assert advance_cursor(StageCursor(5, 4), fb, 5) is CAMPAIGN_COMPLETE


def test_advance_rejects_cursor_beyond_stage_count():
    with pytest.raises(ValueError):
        advance_cursor(StageCursor(6, 1), Feedback("x"), 5)


# --- lints ---------------------------------------------------------------------


def test_lint_summary_too_long():
    long_summary = " ".join(f"W{i}." for i in range(31))
    out = parse_navigator_output(
        "Output Summary: " + long_summary + "\n\n" + make_turn_text("1-1")
    )
    kinds = {l.kind for l in lint_turn(out)}
    assert LintKind.SUMMARY_TOO_LONG in kinds


def test_lint_choice_length_out_of_range():
    out = parse_navigator_output(make_turn_text("1-1", sentences=5))
    lints = lint_turn(out)
    flagged = [l for l in lints if l.kind is LintKind.TASK_CHOICE_LENGTH_OUT_OF_RANGE]
    assert {l.choice for l in flagged} == {1, 2, 3}


def test_lint_in_range_choice_is_clean():
    out = parse_navigator_output(make_turn_text("1-1", sentences=12))
    assert lint_turn(out, expected_cursor=StageCursor(1, 1)) == []


def test_lint_cursor_divergence():
    out = parse_navigator_output(make_turn_text("1-6", sentences=12))
    lints = lint_turn(out, expected_cursor=StageCursor(2, 1))
    assert any(l.kind is LintKind.CURSOR_DIVERGENCE for l in lints)


def test_first_bundled_turn_has_no_divergence():
    out = parse_navigator_output(corpus.turn_text("H", 1))
    lints = lint_turn(out, expected_cursor=StageCursor(1, 1))
    assert not any(l.kind is LintKind.CURSOR_DIVERGENCE for l in lints)


# --- run_turn against the store ---------------------------------------------------


def test_run_turn_flow(active_campaign):
    store, cid = active_campaign
    provider = ScriptedProvider([corpus.turn_text("H", 1), corpus.turn_text("H", 2)])
    turn1 = run_turn(store, cid, provider)
    assert turn1.output.cursor == StageCursor(1, 1)
    assert "respond in the format" in turn1.prompt
    select_choice(store, cid, 1)
    nxt = record_feedback(store, cid, "Literature gathered; procedure identified.")
    assert nxt == StageCursor(1, 2)
    turn2 = run_turn(store, cid, provider)
    assert turn2.output.cursor == StageCursor(1, 2)
    assert len(turn2.output.choices) == 3
    assert store.state(cid).campaign.cursor == StageCursor(1, 2)
    # the second prompt carries the first turn's selection and feedback
    assert "Literature gathered; procedure identified." in turn2.prompt


def test_run_turn_provider_failure_leaves_cursor(active_campaign):
    store, cid = active_campaign
    provider = ScriptedProvider([])  # exhausted immediately
    with pytest.raises(TransportFailure):
        run_turn(store, cid, provider)
    state = store.state(cid)
    assert state.campaign.cursor == StageCursor(1, 1)
    assert not state.turns
    kinds = [e.kind.value for e in store.events(cid)]
    assert "ModelResponded" not in kinds
    assert "TurnParsed" not in kinds


def test_run_turn_junk_response_is_flagged_and_resumable(active_campaign):
    store, cid = active_campaign
    provider = ScriptedProvider(["hello", corpus.turn_text("H", 1)])
    with pytest.raises(MissingSection):
        run_turn(store, cid, provider)
    state = store.state(cid)
    assert state.campaign.cursor == StageCursor(1, 1)
    events = store.events(cid)
    parsed = [e for e in events if e.kind.value == "TurnParsed"]
    assert len(parsed) == 1 and parsed[0].payload["ok"] is False
    # resumable: the next run succeeds
    turn = run_turn(store, cid, provider)
    assert turn.output.cursor == StageCursor(1, 1)
