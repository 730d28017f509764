import json

import pytest
from click.testing import CliRunner

from conftest import make_turn_text, transcript_file
from stagecoach import corpus
from stagecoach.cli import main


@pytest.fixture
def runner():
    return CliRunner()


def _invoke(runner, tmp_path, *args, **kwargs):
    return runner.invoke(
        main, ["--data-dir", str(tmp_path / "data"), *args], **kwargs
    )


def test_campaign_new_list_show(runner, tmp_path):
    result = _invoke(runner, tmp_path, "campaign", "new", "BTB-H", "--id", "c1")
    assert result.exit_code == 0, result.output
    assert "created campaign c1" in result.output

    listing = _invoke(runner, tmp_path, "campaign", "list")
    assert "c1" in listing.output and "scoping" in listing.output

    shown = _invoke(runner, tmp_path, "--json", "campaign", "show", "c1")
    data = json.loads(shown.output)
    assert data["id"] == "c1" and data["status"] == "scoping"


def test_full_loop_via_cli(runner, tmp_path):
    script = transcript_file(
        tmp_path,
        [corpus.blueprint_output_text(), corpus.turn_text("H", 1), corpus.executor_output_text()],
    )
    assert _invoke(runner, tmp_path, "campaign", "new", "BTB-H", "--id", "c1").exit_code == 0
    scoped = _invoke(
        runner, tmp_path, "campaign", "scope", "--campaign", "c1", "--scripted", str(script)
    )
    assert scoped.exit_code == 0, scoped.output
    assert "1) Synthesis" in scoped.output

    turn = _invoke(runner, tmp_path, "turn", "run", "--campaign", "c1", "--scripted", str(script))
    assert turn.exit_code == 0, turn.output
    assert "cursor: 1-1" in turn.output

    chosen = _invoke(runner, tmp_path, "choose", "2", "--campaign", "c1")
    assert chosen.exit_code == 0

    briefed = _invoke(
        runner, tmp_path, "brief", "--campaign", "c1", "--scripted", str(script),
        "--fill", "Temperature used=120°C",
    )
    assert briefed.exit_code == 0, briefed.output
    assert "report template" in briefed.output

    fed = _invoke(
        runner, tmp_path, "feedback", "-", "--campaign", "c1", input="All done, crystals grew.\n"
    )
    assert fed.exit_code == 0, fed.output
    assert "advanced to 1-2" in fed.output

    shown = _invoke(runner, tmp_path, "turn", "show", "--campaign", "c1")
    assert "1-1" in shown.output


def test_feedback_ready_flag_appends_sentinel(runner, tmp_path):
    script = transcript_file(
        tmp_path, [corpus.blueprint_output_text(), make_turn_text("1-1")]
    )
    _invoke(runner, tmp_path, "campaign", "new", "BTB-H", "--id", "c1")
    _invoke(runner, tmp_path, "campaign", "scope", "--campaign", "c1", "--scripted", str(script))
    _invoke(runner, tmp_path, "turn", "run", "--campaign", "c1", "--scripted", str(script))
    _invoke(runner, tmp_path, "choose", "1", "--campaign", "c1")
    fed = _invoke(
        runner, tmp_path, "feedback", "-", "--campaign", "c1", "--ready", input="Stage done.\n"
    )
    assert fed.exit_code == 0, fed.output
    assert "advanced to 2-1" in fed.output


def test_choose_out_of_range_is_usage_error(runner, tmp_path):
    result = _invoke(runner, tmp_path, "choose", "4", "--campaign", "c1")
    assert result.exit_code == 2


def test_corpus_verify(runner, tmp_path):
    result = _invoke(runner, tmp_path, "corpus", "verify")
    assert result.exit_code == 0, result.output
    assert "totals: 34 / 29 / 26 / 26" in result.output
    for line in ("H: 34 turns", "oF: 29 turns", "mF: 26 turns", "CH3: 26 turns"):
        assert line in result.output


def test_corpus_load_and_reports(runner, tmp_path):
    loaded = _invoke(runner, tmp_path, "corpus", "load", "--campaign", "H")
    assert loaded.exit_code == 0, loaded.output

    imported = _invoke(
        runner, tmp_path, "score", "import", "--csv", corpus.rubric_scores_path()
    )
    assert imported.exit_code == 0, imported.output
    assert "imported 102 scores" in imported.output

    report = _invoke(runner, tmp_path, "report", "rubric", "--campaign", "H")
    assert report.exit_code == 0, report.output
    for token in ("92", "90.1", "82", "80.3", "83", "81.3", "257", "83.9"):
        assert token in report.output
    assert "DocumentedDiscrepancy" in report.output and "83.4" in report.output

    replayed = _invoke(runner, tmp_path, "--json", "replay", "--campaign", "H")
    data = json.loads(replayed.output)
    assert data["status"] == "complete" and data["turns"] == 34

    shown = _invoke(runner, tmp_path, "--json", "campaign", "show", "H")
    assert json.loads(shown.output)["state_hash"] == data["state_hash"]

    iterations = _invoke(runner, tmp_path, "report", "iterations")
    assert "H: total 34" in iterations.output


def test_report_iterations_corpus(runner, tmp_path):
    result = _invoke(runner, tmp_path, "--json", "report", "iterations", "--corpus")
    data = json.loads(result.output)
    assert {cid: d["total"] for cid, d in data.items()} == {
        "H": 34, "oF": 29, "mF": 26, "CH3": 26,
    }


def test_report_screening(runner, tmp_path):
    result = _invoke(runner, tmp_path, "report", "screening")
    assert result.exit_code == 0
    assert "BTB-H" in result.output and "52" in result.output


def test_score_record_on_loaded_campaign(runner, tmp_path):
    _invoke(runner, tmp_path, "corpus", "load", "--campaign", "H")
    result = _invoke(
        runner, tmp_path, "score", "record", "--campaign", "H", "--cursor", "1-1",
        "--choice", "1", "--relevance", "1", "--progress", "0", "--helpfulness", "1",
    )
    assert result.exit_code == 0, result.output
    assert "total 2" in result.output


def test_error_exit_code_is_nonzero(runner, tmp_path):
    result = _invoke(runner, tmp_path, "campaign", "show", "ghost")
    assert result.exit_code == 1
    assert "NoSuchCampaign" in result.output
