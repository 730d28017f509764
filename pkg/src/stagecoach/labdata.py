"""Screening-condition ingestion and campaign iteration statistics.

Chemistry stays opaque: rows are typed records (linker code, modulator
mix, linker-to-metal ratio, temperature, time) with no interpretation.
Unicode subscripts are normalized to ASCII at ingestion so the modulator
vocabulary has one canonical spelling.
"""

from __future__ import annotations

import csv
import json
import re
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Mapping, Sequence

from .errors import (
    BadRatio,
    DuplicateExpId,
    NonIntegerField,
    NonMonotonicTrajectory,
    UnknownModulatorCode,
)
from .model import ScreeningRecord, StageCursor

DEFAULT_MODULATOR_VOCABULARY = frozenset({"FA", "TFA", "AA", "BA", "HCl", "H2O"})

_SUBSCRIPTS = str.maketrans("₀₁₂₃₄₅₆₇₈₉", "0123456789")

CSV_HEADER = ("exp_id", "linker", "modulator", "lm_ratio", "temp_c", "time_h")


def normalize_code(text: str) -> str:
    """ASCII-fy subscript digits and drop stray spaces around them."""
    t = re.sub(r"\s*([₀₁₂₃₄₅₆₇₈₉])\s*", r"\1", text.strip())
    return t.translate(_SUBSCRIPTS)


_MIXTURE = re.compile(r"^([^/()]+)/([^/()]+)\s*\((\d+):(\d+)\)$")
_RATIO = re.compile(r"^(\d+):(\d+)$")


def _parse_modulators(
    text: str, vocabulary: frozenset[str]
) -> tuple[tuple[str, int], ...]:
    t = normalize_code(text)
    m = _MIXTURE.match(t)
    if m:
        names = (m.group(1).strip(), m.group(2).strip())
        parts = (int(m.group(3)), int(m.group(4)))
    elif "/" in t or "(" in t or ")" in t:
        raise BadRatio(f"malformed modulator expression: {text!r}")
    else:
        names = (t,)
        parts = (1,)
    for name in names:
        if name not in vocabulary:
            raise UnknownModulatorCode(f"{name!r} not in vocabulary {sorted(vocabulary)}")
    for p in parts:
        if p < 1:
            raise BadRatio(f"modulator parts must be >= 1: {text!r}")
    return tuple(zip(names, parts))


def _parse_ratio(text: str) -> tuple[int, int]:
    m = _RATIO.match(normalize_code(text))
    if not m:
        raise BadRatio(f"not an a:b ratio: {text!r}")
    a, b = int(m.group(1)), int(m.group(2))
    if a < 1 or b < 1:
        raise BadRatio(f"ratio parts must be >= 1: {text!r}")
    return a, b


def _parse_int(text: str, field_name: str) -> int:
    t = text.strip()
    if not re.fullmatch(r"\d+", t):
        raise NonIntegerField(f"{field_name} must be an integer, got {text!r}")
    return int(t)


def parse_screening_row(
    fields: Sequence[str],
    vocabulary: frozenset[str] = DEFAULT_MODULATOR_VOCABULARY,
) -> ScreeningRecord:
    """Parse one (exp id, linker, modulator, L:M ratio, temp, time) row.
    Ratio and vocabulary errors are reported before integer-field errors so
    a malformed ratio is never masked by a placeholder experiment id."""
    if len(fields) != 6:
        raise NonIntegerField(f"expected 6 fields, got {len(fields)}")
    exp_raw, linker_raw, modulator_raw, ratio_raw, temp_raw, time_raw = fields
    modulators = _parse_modulators(modulator_raw, vocabulary)
    lm_ratio = _parse_ratio(ratio_raw)
    exp_id = _parse_int(exp_raw, "exp_id")
    if exp_id < 1:
        raise NonIntegerField(f"exp_id must be positive, got {exp_id}")
    return ScreeningRecord(
        exp_id=exp_id,
        linker=normalize_code(linker_raw),
        modulators=modulators,
        lm_ratio=lm_ratio,
        temp_c=_parse_int(temp_raw, "temp_c"),
        time_h=_parse_int(time_raw, "time_h"),
    )


def load_screening_csv(
    path, vocabulary: frozenset[str] = DEFAULT_MODULATOR_VOCABULARY
) -> list[ScreeningRecord]:
    with open(path, encoding="utf-8", newline="") as f:
        reader = csv.DictReader(f)
        return [
            parse_screening_row(
                [row[h] for h in CSV_HEADER],
                vocabulary,
            )
            for row in reader
        ]


@dataclass(frozen=True)
class LinkerSummary:
    count: int
    temp_min: int
    temp_max: int
    time_min: int
    time_max: int


def dataset_summary(records: Iterable[ScreeningRecord]) -> dict[str, LinkerSummary]:
    """Group counts and parameter ranges per linker; exp ids must be
    unique (repeated conditions under new ids are legal)."""
    seen: set[int] = set()
    groups: dict[str, list[ScreeningRecord]] = {}
    for r in records:
        if r.exp_id in seen:
            raise DuplicateExpId(f"exp id {r.exp_id} appears twice")
        seen.add(r.exp_id)
        groups.setdefault(r.linker, []).append(r)
    return {
        linker: LinkerSummary(
            count=len(rows),
            temp_min=min(r.temp_c for r in rows),
            temp_max=max(r.temp_c for r in rows),
            time_min=min(r.time_h for r in rows),
            time_max=max(r.time_h for r in rows),
        )
        for linker, rows in groups.items()
    }


_PARAMS = ("modulator", "lm_ratio", "temp", "time")


@dataclass(frozen=True)
class ParamDiff:
    linker: str
    from_exp: int
    to_exp: int
    changed: tuple[str, ...]

    @property
    def multi_param_change(self) -> bool:
        return len(self.changed) > 1


def _param_values(r: ScreeningRecord) -> dict[str, object]:
    return {
        "modulator": r.modulators,
        "lm_ratio": r.lm_ratio,
        "temp": r.temp_c,
        "time": r.time_h,
    }


def parameter_diff_report(records: Sequence[ScreeningRecord]) -> list[ParamDiff]:
    """For each consecutive pair (by exp id) within a linker group, list
    which parameters changed. More than one change is flagged, not
    rejected; the corpus contains such rows."""
    groups: dict[str, list[ScreeningRecord]] = {}
    for r in records:
        groups.setdefault(r.linker, []).append(r)
    diffs: list[ParamDiff] = []
    for linker, rows in groups.items():
        rows = sorted(rows, key=lambda r: r.exp_id)
        for a, b in zip(rows, rows[1:]):
            va, vb = _param_values(a), _param_values(b)
            changed = tuple(p for p in _PARAMS if va[p] != vb[p])
            diffs.append(
                ParamDiff(linker=linker, from_exp=a.exp_id, to_exp=b.exp_id, changed=changed)
            )
    return diffs


@dataclass(frozen=True)
class IterationStats:
    """Per-stage iteration counts of one campaign: count = max iteration
    reached in the stage; total = sum over stages."""

    per_stage: tuple[tuple[int, int], ...]

    @property
    def total(self) -> int:
        return sum(count for _, count in self.per_stage)

    def as_dict(self) -> dict:
        return {
            "per_stage": {str(stage): count for stage, count in self.per_stage},
            "total": self.total,
        }


def iteration_stats(cursors: Sequence[StageCursor]) -> IterationStats:
    """Fold a cursor trajectory into per-stage counts. The trajectory must
    start at 1-1 and each step must either increment the iteration or open
    the next stage at iteration 1."""
    if not cursors:
        return IterationStats(per_stage=())
    if cursors[0] != StageCursor(1, 1):
        raise NonMonotonicTrajectory(f"trajectory starts at {cursors[0]}, expected 1-1")
    for a, b in zip(cursors, cursors[1:]):
        if not (
            (b.stage == a.stage and b.iteration == a.iteration + 1)
            or (b.stage == a.stage + 1 and b.iteration == 1)
        ):
            raise NonMonotonicTrajectory(f"illegal step {a} -> {b}")
    per_stage: dict[int, int] = {}
    for c in cursors:
        per_stage[c.stage] = max(per_stage.get(c.stage, 0), c.iteration)
    return IterationStats(per_stage=tuple(sorted(per_stage.items())))


def campaign_iteration_table(
    trajectories: Mapping[str, Sequence[StageCursor]],
) -> dict[str, IterationStats]:
    """Cross-campaign comparison of per-stage iteration counts."""
    return {cid: iteration_stats(cursors) for cid, cursors in trajectories.items()}


def iteration_table_json(table: Mapping[str, IterationStats]) -> str:
    """Chart-friendly export: one bar group per campaign, one bar per stage."""
    return json.dumps(
        {cid: stats.as_dict() for cid, stats in table.items()},
        indent=2,
        sort_keys=True,
    )


def trajectory_from_state(state) -> list[StageCursor]:
    """Cursor trajectory of a stored campaign (authoritative cursors)."""
    return [t.cursor for t in state.turns]


def summary_table(summaries: Mapping[str, LinkerSummary]) -> str:
    rows = [("Linker", "Rows", "Temp (°C)", "Time (h)")]
    for linker in sorted(summaries):
        s = summaries[linker]
        rows.append(
            (
                linker,
                str(s.count),
                f"{s.temp_min}-{s.temp_max}",
                f"{s.time_min}-{s.time_max}",
            )
        )
    widths = [max(len(r[i]) for r in rows) for i in range(4)]
    return (
        "\n".join(
            "  ".join(cell.ljust(widths[i]) for i, cell in enumerate(row)).rstrip()
            for row in rows
        )
        + "\n"
    )


def export_summary_json(summaries: Mapping[str, LinkerSummary]) -> str:
    return json.dumps(
        {
            linker: {
                "count": s.count,
                "temp_min": s.temp_min,
                "temp_max": s.temp_max,
                "time_min": s.time_min,
                "time_max": s.time_max,
            }
            for linker, s in sorted(summaries.items())
        },
        indent=2,
    )


def bundled_screening_path(name: str = "table_full.csv") -> Path:
    from .templates import data_path

    with_path = data_path("corpus", "screening", name)
    return Path(str(with_path))
