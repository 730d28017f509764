"""Task-quality rubric: per-task 0/1 scores on three criteria and the
aggregation report.

Percentages are truncated to one decimal, not rounded: truncation is the
rule that reproduces the published per-criterion table exactly, and the
raw values are always retained alongside. A reference report can be
diffed against a computed one; mismatches are flagged as documented
discrepancies rather than silently adopted.
"""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass
from typing import Iterable, Mapping, Optional, Sequence

from .errors import DuplicateScore, UnknownTask, ZeroTasks
from .model import EventKind, RubricScore, StageCursor, format_cursor, parse_cursor

CRITERIA = ("relevance", "progress", "helpfulness")


def truncate_1dp(value_num: int, value_den: int) -> float:
    """Truncate 100*num/den to one decimal using integer arithmetic."""
    if value_den == 0:
        raise ZeroTasks("cannot aggregate over zero tasks")
    return (1000 * value_num // value_den) / 10


@dataclass(frozen=True)
class CriterionStat:
    name: str
    total: int
    pct: float
    pct_raw: float


@dataclass(frozen=True)
class RubricReport:
    task_count: int
    criteria: tuple[CriterionStat, CriterionStat, CriterionStat]
    total: int
    total_pct: float
    total_pct_raw: float

    def criterion(self, name: str) -> CriterionStat:
        for c in self.criteria:
            if c.name == name:
                return c
        raise KeyError(name)


def aggregate(scores: Iterable[RubricScore], task_count: int) -> RubricReport:
    """Per-criterion sums and truncated percentages over ``task_count``
    scored tasks; the total percentage is over 3*task_count possible
    points. Order-independent."""
    if task_count <= 0:
        raise ZeroTasks("task_count must be positive")
    sums = {name: 0 for name in CRITERIA}
    for score in scores:
        sums["relevance"] += score.relevance
        sums["progress"] += score.progress
        sums["helpfulness"] += score.helpfulness
    stats = tuple(
        CriterionStat(
            name=name,
            total=sums[name],
            pct=truncate_1dp(sums[name], task_count),
            pct_raw=100 * sums[name] / task_count,
        )
        for name in CRITERIA
    )
    total = sum(sums.values())
    return RubricReport(
        task_count=task_count,
        criteria=stats,  # type: ignore[arg-type]
        total=total,
        total_pct=truncate_1dp(total, 3 * task_count),
        total_pct_raw=100 * total / (3 * task_count),
    )


@dataclass(frozen=True)
class Discrepancy:
    """A published value that the computed report does not reproduce."""

    field: str
    computed: float
    published: float


def diff_reference(report: RubricReport, reference: Mapping) -> list[Discrepancy]:
    """Compare a computed report against a published one; every mismatch is
    returned as a flagged discrepancy (the computed value stands)."""
    found: list[Discrepancy] = []
    for stat in report.criteria:
        ref = reference["criteria"][stat.name]
        if stat.total != ref["sum"]:
            found.append(Discrepancy(f"{stat.name}.sum", stat.total, ref["sum"]))
        if stat.pct != ref["pct"]:
            found.append(Discrepancy(f"{stat.name}.pct", stat.pct, ref["pct"]))
    ref_total = reference["total"]
    if report.total != ref_total["sum"]:
        found.append(Discrepancy("total.sum", report.total, ref_total["sum"]))
    if report.total_pct != ref_total["pct"]:
        found.append(Discrepancy("total.pct", report.total_pct, ref_total["pct"]))
    return found


def score_task(
    store,
    campaign_id: str,
    cursor: StageCursor,
    choice: int,
    relevance: int,
    progress: int,
    helpfulness: int,
    overwrite: bool = False,
) -> RubricScore:
    """Persist one task score. The task reference must resolve to an
    existing parsed choice; rescoring requires the explicit overwrite flag."""
    state = store.state(campaign_id)
    cursor_key = format_cursor(cursor)
    known = {format_cursor(t.cursor) for t in state.turns}
    if cursor_key not in known or choice not in (1, 2, 3):
        raise UnknownTask(f"no task {cursor_key}/{choice} in campaign {campaign_id}")
    if (cursor_key, choice) in state.scores and not overwrite:
        raise DuplicateScore(
            f"task {cursor_key}/{choice} already scored; pass overwrite to rescore"
        )
    score = RubricScore(
        campaign_id=campaign_id,
        cursor=cursor,
        choice=choice,
        relevance=relevance,
        progress=progress,
        helpfulness=helpfulness,
    )
    store.append(
        campaign_id,
        EventKind.SCORE_RECORDED,
        {
            "cursor": cursor_key,
            "choice": choice,
            "relevance": relevance,
            "progress": progress,
            "helpfulness": helpfulness,
        },
    )
    return score


def scores_from_state(state) -> list[RubricScore]:
    return [
        RubricScore(
            campaign_id=state.campaign.id,
            cursor=parse_cursor(cursor_key),
            choice=choice,
            relevance=vals["relevance"],
            progress=vals["progress"],
            helpfulness=vals["helpfulness"],
        )
        for (cursor_key, choice), vals in sorted(state.scores.items())
    ]


def load_scores_csv(path) -> list[RubricScore]:
    """Read a score set: campaign, cursor, choice, relevance, progress,
    helpfulness."""
    with open(path, encoding="utf-8", newline="") as f:
        return [
            RubricScore(
                campaign_id=row["campaign"],
                cursor=parse_cursor(row["cursor"]),
                choice=int(row["choice"]),
                relevance=int(row["relevance"]),
                progress=int(row["progress"]),
                helpfulness=int(row["helpfulness"]),
            )
            for row in csv.DictReader(f)
        ]


def scores_to_csv(scores: Sequence[RubricScore]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf)
    writer.writerow(["campaign", "cursor", "choice", "relevance", "progress", "helpfulness", "total"])
    for s in scores:
        writer.writerow(
            [s.campaign_id, format_cursor(s.cursor), s.choice, s.relevance, s.progress, s.helpfulness, s.total]
        )
    return buf.getvalue()


def render_table(report: RubricReport, reference: Optional[Mapping] = None) -> str:
    """Text table in the published shape: criterion, score, percentage.
    When a reference is supplied, discrepancies are appended as flags."""
    rows = [("Criteria", "Score", "Percentage (%)")]
    labels = {
        "relevance": "Relevance",
        "progress": "Potential for Progress",
        "helpfulness": "Helpfulness",
    }
    for stat in report.criteria:
        rows.append((labels[stat.name], str(stat.total), f"{stat.pct:.1f}"))
    rows.append(("Total", str(report.total), f"{report.total_pct:.1f}"))
    widths = [max(len(r[i]) for r in rows) for i in range(3)]
    lines = ["  ".join(cell.ljust(widths[i]) for i, cell in enumerate(row)).rstrip() for row in rows]
    if reference is not None:
        for d in diff_reference(report, reference):
            lines.append(
                f"DocumentedDiscrepancy: {d.field} computed {d.computed} vs published {d.published}"
            )
    return "\n".join(lines) + "\n"
