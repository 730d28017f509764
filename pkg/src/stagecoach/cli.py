"""Command-line interface over the campaign lifecycle.

All state lives in the event-log directory (``--data-dir`` or
STAGECOACH_DATA_DIR). Provider settings select the live backend; passing
``--scripted FILE`` replays a recorded transcript instead, which is also
how tests and corpus replays run without network access.
"""

from __future__ import annotations

import json
import sys
from pathlib import Path

import click

from . import corpus, labdata, rubric
from .errors import StagecoachError
from .executor import instantiate_report, run_brief
from .model import CAMPAIGN_COMPLETE, format_cursor, parse_cursor
from .navigator import record_feedback, run_turn, select_choice
from .provider import FileTranscriptProvider, HttpChatProvider, ProviderConfig
from .refinery import (
    ACCEPT,
    ExpectedPattern,
    RefinementSession,
    compose_candidate,
    export_template,
    probe_round,
    record_verdict,
    revise,
)
from .store import EventStore
from .text import SENTINEL_PHRASE


class Ctx:
    def __init__(self, data_dir: str, endpoint: str, model: str, credential_env: str, as_json: bool):
        self.data_dir = Path(data_dir)
        self.endpoint = endpoint
        self.model = model
        self.credential_env = credential_env
        self.as_json = as_json
        self._store: EventStore | None = None

    @property
    def store(self) -> EventStore:
        if self._store is None:
            self._store = EventStore(self.data_dir)
        return self._store

    def provider(self, scripted: str | None):
        if scripted:
            return FileTranscriptProvider(scripted)
        config = ProviderConfig(
            endpoint_url=self.endpoint,
            model_name=self.model,
            credential_env_var=self.credential_env,
        )
        return HttpChatProvider(config)

    def emit(self, data, text: str | None = None) -> None:
        if self.as_json:
            click.echo(json.dumps(data, indent=2, sort_keys=True))
        else:
            click.echo(text if text is not None else json.dumps(data, indent=2, sort_keys=True))


pass_ctx = click.make_pass_decorator(Ctx)


@click.group()
@click.option("--data-dir", envvar="STAGECOACH_DATA_DIR", default="./stagecoach-data", show_default=True)
@click.option("--endpoint", envvar="STAGECOACH_ENDPOINT", default="https://api.openai.com/v1/chat/completions", show_default=True)
@click.option("--model", envvar="STAGECOACH_MODEL", default="gpt-4", show_default=True)
@click.option("--credential-env", default="STAGECOACH_API_KEY", show_default=True,
              help="Name of the environment variable holding the provider secret.")
@click.option("--json", "as_json", is_flag=True, help="Machine-readable output.")
@click.pass_context
def main(ctx: click.Context, data_dir: str, endpoint: str, model: str, credential_env: str, as_json: bool) -> None:
    """Steer human-in-the-loop research campaigns."""
    ctx.obj = Ctx(data_dir, endpoint, model, credential_env, as_json)


def _fail(exc: Exception) -> None:
    raise click.ClickException(f"{type(exc).__name__}: {exc}")


# --- campaign ----------------------------------------------------------------


@main.group()
def campaign() -> None:
    """Create and inspect campaigns."""


@campaign.command("new")
@click.argument("subject")
@click.option("--stages", default=5, show_default=True)
@click.option("--id", "campaign_id", default=None)
@click.option("--exemplar-from", default=None, help="Campaign whose final summary seeds this one.")
@pass_ctx
def campaign_new(ctx: Ctx, subject: str, stages: int, campaign_id: str | None, exemplar_from: str | None) -> None:
    exemplar_subject = exemplar_summary = None
    try:
        if exemplar_from:
            state = ctx.store.state(exemplar_from)
            exemplar_subject = state.campaign.subject
            exemplar_summary = state.campaign.rolling_summary
        cid = ctx.store.create_campaign(
            subject,
            stage_count_hint=stages,
            exemplar_subject=exemplar_subject,
            exemplar_summary=exemplar_summary,
            campaign_id=campaign_id,
        )
    except StagecoachError as exc:
        _fail(exc)
    ctx.emit({"id": cid, "status": "scoping"}, f"created campaign {cid} (scoping)")


@campaign.command("list")
@pass_ctx
def campaign_list(ctx: Ctx) -> None:
    rows = []
    for cid in ctx.store.list_campaigns():
        state = ctx.store.state(cid)
        c = state.campaign
        rows.append(
            {
                "id": cid,
                "subject": c.subject,
                "status": c.status.value,
                "cursor": format_cursor(c.cursor) if c.cursor else None,
            }
        )
    ctx.emit(rows, "\n".join(f"{r['id']}  {r['subject']}  {r['status']}  {r['cursor'] or '-'}" for r in rows))


@campaign.command("scope")
@click.option("--campaign", "campaign_id", required=True)
@click.option("--scripted", default=None, type=click.Path(exists=True))
@click.option("--practice-text", "practice_path", default=None, type=click.Path(exists=True),
              help="Grounding text file; default: the bundled canonical request.")
@pass_ctx
def campaign_scope(ctx: Ctx, campaign_id: str, scripted: str | None, practice_path: str | None) -> None:
    """Run the scoping phase and set the campaign blueprint."""
    request = None
    if practice_path:
        canonical = corpus.canonical_scope_request()
        from dataclasses import replace

        request = replace(canonical, practice_text=Path(practice_path).read_text(encoding="utf-8"))
    try:
        blueprint = corpus.run_scope_phase(
            ctx.store, campaign_id, ctx.provider(scripted), request=request
        )
    except StagecoachError as exc:
        _fail(exc)
    titles = [s.title for s in blueprint.stages]
    ctx.emit({"stages": titles}, "\n".join(f"{i}) {t}" for i, t in enumerate(titles, start=1)))


@campaign.command("show")
@click.argument("campaign_id")
@pass_ctx
def campaign_show(ctx: Ctx, campaign_id: str) -> None:
    try:
        state = ctx.store.state(campaign_id)
    except StagecoachError as exc:
        _fail(exc)
    c = state.campaign
    data = {
        "id": c.id,
        "subject": c.subject,
        "status": c.status.value,
        "cursor": format_cursor(c.cursor) if c.cursor else None,
        "stage_count": c.stage_count,
        "turns": len(state.turns),
        "seq": state.seq,
        "state_hash": state.state_hash,
    }
    ctx.emit(data, "\n".join(f"{k}: {v}" for k, v in data.items()))


# --- turn --------------------------------------------------------------------


@main.group()
def turn() -> None:
    """Run and inspect navigator turns."""


@turn.command("run")
@click.option("--campaign", "campaign_id", required=True)
@click.option("--scripted", default=None, type=click.Path(exists=True), help="Replay a recorded transcript.")
@pass_ctx
def turn_run(ctx: Ctx, campaign_id: str, scripted: str | None) -> None:
    try:
        result = run_turn(ctx.store, campaign_id, ctx.provider(scripted))
    except StagecoachError as exc:
        _fail(exc)
    out = result.output
    data = {
        "cursor": format_cursor(out.cursor),
        "evaluation": out.evaluation,
        "choices": [c.text for c in out.choices],
        "lints": [l.as_dict() for l in result.lints],
    }
    text = [f"cursor: {data['cursor']}", "", out.evaluation, ""]
    for i, c in enumerate(out.choices, start=1):
        text.append(f"[{i}] {c.text}")
        text.append("")
    for lint in result.lints:
        text.append(f"lint: {lint.kind.value}: {lint.message}")
    ctx.emit(data, "\n".join(text))


@turn.command("show")
@click.option("--campaign", "campaign_id", required=True)
@click.option("--n", default=None, type=int, help="Turn number (default: latest).")
@pass_ctx
def turn_show(ctx: Ctx, campaign_id: str, n: int | None) -> None:
    try:
        state = ctx.store.state(campaign_id)
    except StagecoachError as exc:
        _fail(exc)
    if not state.turns:
        raise click.ClickException("no turns recorded")
    idx = (n - 1) if n else len(state.turns) - 1
    if not 0 <= idx < len(state.turns):
        raise click.ClickException(f"turn {n} out of range (1..{len(state.turns)})")
    t = state.turns[idx]
    data = t.snapshot()
    ctx.emit(data, "\n".join(f"{k}: {v}" for k, v in data.items()))


@main.command("choose")
@click.argument("index", type=click.IntRange(1, 3))
@click.option("--campaign", "campaign_id", required=True)
@pass_ctx
def choose(ctx: Ctx, index: int, campaign_id: str) -> None:
    """Select one of the three task choices of the open turn."""
    try:
        select_choice(ctx.store, campaign_id, index)
    except StagecoachError as exc:
        _fail(exc)
    ctx.emit({"selected": index}, f"selected task choice {index}")


@main.command("feedback")
@click.argument("source", default="-")
@click.option("--campaign", "campaign_id", required=True)
@click.option("--ready", is_flag=True, help="Append the stage-readiness declaration.")
@pass_ctx
def feedback(ctx: Ctx, source: str, campaign_id: str, ready: bool) -> None:
    """Record operator feedback from FILE or stdin ('-')."""
    text = sys.stdin.read() if source == "-" else Path(source).read_text(encoding="utf-8")
    if ready:
        text = text.rstrip("\n")
        text = (text + "\n\n" if text else "") + SENTINEL_PHRASE + "."
    try:
        nxt = record_feedback(ctx.store, campaign_id, text)
    except StagecoachError as exc:
        _fail(exc)
    if nxt is CAMPAIGN_COMPLETE:
        ctx.emit({"status": "complete"}, "campaign complete")
    else:
        ctx.emit({"cursor": format_cursor(nxt)}, f"advanced to {format_cursor(nxt)}")


@main.command("brief")
@click.option("--campaign", "campaign_id", required=True)
@click.option("--choice", default=None, type=click.IntRange(1, 3), help="Default: the selected choice.")
@click.option("--scripted", default=None, type=click.Path(exists=True))
@click.option("--fill", multiple=True, metavar="SLOT=VALUE", help="Instantiate template slots.")
@pass_ctx
def brief(ctx: Ctx, campaign_id: str, choice: int | None, scripted: str | None, fill: tuple[str, ...]) -> None:
    """Run the execution-briefing phase for the selected task."""
    try:
        state = ctx.store.state(campaign_id)
        current = state.current_turn
        chosen = choice or (current.selected if current else None)
        if chosen is None:
            raise click.ClickException("no task selected; run 'choose' first")
        result = run_brief(ctx.store, campaign_id, ctx.provider(scripted), chosen)
    except StagecoachError as exc:
        _fail(exc)
    data = {
        "consolidated_summary": result.consolidated_summary,
        "steps": list(result.steps),
        "report_template": result.report_template,
        "slots": list(result.slots),
    }
    if fill:
        values = dict(item.split("=", 1) for item in fill)
        instance = instantiate_report(result, values)
        data["report"] = instance.text
        data["unfilled"] = list(instance.unfilled)
    lines = [f"steps ({len(result.steps)}):"]
    lines += [f"  {i}. {s}" for i, s in enumerate(result.steps, start=1)]
    lines += ["", "report template:", result.report_template]
    ctx.emit(data, "\n".join(lines))


# --- scoring and reports -------------------------------------------------------


@main.group()
def score() -> None:
    """Record rubric scores."""


@score.command("record")
@click.option("--campaign", "campaign_id", required=True)
@click.option("--cursor", "cursor_text", required=True)
@click.option("--choice", type=click.IntRange(1, 3), required=True)
@click.option("--relevance", type=click.IntRange(0, 1), required=True)
@click.option("--progress", type=click.IntRange(0, 1), required=True)
@click.option("--helpfulness", type=click.IntRange(0, 1), required=True)
@click.option("--overwrite", is_flag=True)
@pass_ctx
def score_record(ctx: Ctx, campaign_id: str, cursor_text: str, choice: int,
                 relevance: int, progress: int, helpfulness: int, overwrite: bool) -> None:
    try:
        s = rubric.score_task(
            ctx.store, campaign_id, parse_cursor(cursor_text), choice,
            relevance, progress, helpfulness, overwrite=overwrite,
        )
    except StagecoachError as exc:
        _fail(exc)
    ctx.emit({"total": s.total}, f"scored {cursor_text}/{choice}: total {s.total}")


@score.command("import")
@click.option("--csv", "csv_path", required=True, type=click.Path(exists=True))
@click.option("--overwrite", is_flag=True)
@pass_ctx
def score_import(ctx: Ctx, csv_path: str, overwrite: bool) -> None:
    try:
        scores = rubric.load_scores_csv(csv_path)
        for s in scores:
            rubric.score_task(
                ctx.store, s.campaign_id, s.cursor, s.choice,
                s.relevance, s.progress, s.helpfulness, overwrite=overwrite,
            )
    except StagecoachError as exc:
        _fail(exc)
    ctx.emit({"imported": len(scores)}, f"imported {len(scores)} scores")


@main.group()
def report() -> None:
    """Aggregated reports."""


@report.command("rubric")
@click.option("--campaign", "campaign_id", required=True)
@click.option("--reference/--no-reference", default=True,
              help="Diff against the bundled published table when available.")
@pass_ctx
def report_rubric(ctx: Ctx, campaign_id: str, reference: bool) -> None:
    try:
        state = ctx.store.state(campaign_id)
        scores = rubric.scores_from_state(state)
        task_count = 3 * len(state.turns)
        rep = rubric.aggregate(scores, task_count)
    except StagecoachError as exc:
        _fail(exc)
    ref = corpus.rubric_reference() if (reference and campaign_id == "H") else None
    data = {
        "task_count": rep.task_count,
        "criteria": {c.name: {"sum": c.total, "pct": c.pct} for c in rep.criteria},
        "total": {"sum": rep.total, "pct": rep.total_pct, "pct_raw": rep.total_pct_raw},
        "discrepancies": [
            {"field": d.field, "computed": d.computed, "published": d.published}
            for d in (rubric.diff_reference(rep, ref) if ref else [])
        ],
    }
    ctx.emit(data, rubric.render_table(rep, ref))


@report.command("iterations")
@click.option("--corpus", "use_corpus", is_flag=True, help="Report over the bundled corpus.")
@pass_ctx
def report_iterations(ctx: Ctx, use_corpus: bool) -> None:
    table = {}
    if use_corpus:
        for c in corpus.load_index():
            cursors = [parse_cursor(t.cursor) for t in c.turns]
            table[c.id] = labdata.iteration_stats(cursors)
    else:
        for cid in ctx.store.list_campaigns():
            state = ctx.store.state(cid)
            table[cid] = labdata.iteration_stats(labdata.trajectory_from_state(state))
    data = {cid: stats.as_dict() for cid, stats in table.items()}
    lines = [
        f"{cid}: total {stats.total} " +
        " ".join(f"s{stage}={count}" for stage, count in stats.per_stage)
        for cid, stats in table.items()
    ]
    ctx.emit(data, "\n".join(lines))


@report.command("screening")
@click.option("--csv", "csv_path", default=None, type=click.Path(exists=True),
              help="Default: the bundled full table.")
@pass_ctx
def report_screening(ctx: Ctx, csv_path: str | None) -> None:
    try:
        records = labdata.load_screening_csv(csv_path or labdata.bundled_screening_path())
        summaries = labdata.dataset_summary(records)
    except StagecoachError as exc:
        _fail(exc)
    ctx.emit(json.loads(labdata.export_summary_json(summaries)), labdata.summary_table(summaries))


@main.command("replay")
@click.option("--campaign", "campaign_id", required=True)
@pass_ctx
def replay(ctx: Ctx, campaign_id: str) -> None:
    """Fold the on-disk log from scratch and print the reconstructed state."""
    try:
        state = ctx.store.replay(campaign_id)
    except StagecoachError as exc:
        _fail(exc)
    data = {
        "id": state.campaign.id,
        "status": state.campaign.status.value,
        "cursor": format_cursor(state.campaign.cursor) if state.campaign.cursor else None,
        "turns": len(state.turns),
        "seq": state.seq,
        "state_hash": state.state_hash,
    }
    ctx.emit(data, "\n".join(f"{k}: {v}" for k, v in data.items()))


# --- refinery ------------------------------------------------------------------


@main.command("refine")
@click.option("--goal", "goal_path", required=True, type=click.Path(exists=True),
              help="File with the role/duties/expectations statement.")
@click.option("--name", default="template", show_default=True)
@click.option("--writer-script", default=None, type=click.Path(exists=True))
@click.option("--probe-script", default=None, type=click.Path(exists=True))
@click.option("--session-log", default=None, type=click.Path())
@click.option("--export-dir", default="./templates", show_default=True)
@pass_ctx
def refine(ctx: Ctx, goal_path: str, name: str, writer_script: str | None,
           probe_script: str | None, session_log: str | None, export_dir: str) -> None:
    """Interactive prompt-refinement loop (compose, probe, judge)."""
    goal = Path(goal_path).read_text(encoding="utf-8")
    session = RefinementSession(goal_statement=goal, name=name,
                                log_path=Path(session_log) if session_log else None)
    writer = ctx.provider(writer_script)
    prober = ctx.provider(probe_script)
    while session.status == "open":
        candidate = compose_candidate(session, writer)
        click.echo("--- candidate ---")
        click.echo(candidate)
        probe_input = click.prompt("probe input (blank to skip probing)", default="", show_default=False)
        if probe_input:
            expected_text = click.prompt("expected (must-contain)")
            output = probe_round(session, probe_input, ExpectedPattern(expected_text), prober)
            click.echo("--- probe output ---")
            click.echo(output)
            click.echo(f"match: {session.rounds[-1].passed}")
        verdict = click.prompt("verdict [accept/revise/quit]", default="revise")
        if verdict == "quit":
            return
        if verdict == "accept":
            record_verdict(session, ACCEPT)
            path = export_template(session, export_dir)
            click.echo(f"accepted; exported {path}")
            return
        note = click.prompt("revision note")
        record_verdict(session, revise(note))


# --- corpus ----------------------------------------------------------------------


@main.group("corpus")
def corpus_group() -> None:
    """Bundled transcript corpus operations."""


@corpus_group.command("verify")
@pass_ctx
def corpus_verify(ctx: Ctx) -> None:
    """Replay every bundled campaign through the parser and advance rule."""
    result = corpus.verify_corpus()
    lines = []
    for c in result.campaigns:
        status = "ok" if c.ok else "FAIL"
        per_stage = " ".join(f"s{stage}={count}" for stage, count in c.per_stage)
        lines.append(f"{c.campaign_id}: {c.turns} turns ({per_stage}) {status}")
        lines.extend(f"  parse error: {e}" for e in c.parse_errors)
        lines.extend(f"  cursor mismatch: {m}" for m in c.cursor_mismatches)
    totals = " / ".join(str(c.turns) for c in result.campaigns)
    lines.append(f"totals: {totals}")
    data = {
        "ok": result.ok,
        "totals": result.totals,
        "campaigns": [
            {
                "id": c.campaign_id,
                "turns": c.turns,
                "per_stage": {str(s): n for s, n in c.per_stage},
                "ok": c.ok,
            }
            for c in result.campaigns
        ],
    }
    ctx.emit(data, "\n".join(lines))
    if not result.ok:
        sys.exit(1)


@corpus_group.command("load")
@click.option("--campaign", "campaign_ids", multiple=True,
              help="Load only these campaigns (default: all four).")
@pass_ctx
def corpus_load(ctx: Ctx, campaign_ids: tuple[str, ...]) -> None:
    """Materialize the bundled campaigns into the event store by driving
    the engine with scripted providers."""
    try:
        loaded = corpus.load_into_store(ctx.store, list(campaign_ids) or None)
    except StagecoachError as exc:
        _fail(exc)
    ctx.emit({"loaded": loaded}, f"loaded campaigns: {', '.join(loaded)}")


@main.command("serve")
@click.option("--port", default=8787, show_default=True)
@click.option("--host", default="127.0.0.1", show_default=True)
@click.option("--scripted", default=None, type=click.Path(exists=True))
@pass_ctx
def serve_cmd(ctx: Ctx, port: int, host: str, scripted: str | None) -> None:
    """Run the HTTP gateway for the console."""
    from .api import serve

    serve(ctx.store, ctx.provider(scripted), host=host, port=port)


if __name__ == "__main__":
    main()
