"""Interactive prompt refinement: a writer agent drafts a phase prompt, a
fresh probe agent is tested against expected output patterns, and human
verdicts drive revision cycles until acceptance.

The tool never judges quality itself: expected outputs are plain-text
"must contain" patterns (substring or exact-line) and the only fitness
function is the recorded human verdict. Writer and probe may share one
provider configuration but are logically distinct call streams with no
shared context.
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

from .errors import NoProbeYet, SessionClosed, StorageFailure


@dataclass(frozen=True)
class ExpectedPattern:
    """What the probe output must contain to count as a pass."""

    text: str
    mode: str = "substring"  # "substring" | "exact_line"

    def __post_init__(self) -> None:
        if self.mode not in ("substring", "exact_line"):
            raise ValueError(f"unknown match mode {self.mode!r}")

    def matches(self, output: str) -> bool:
        if self.mode == "substring":
            return self.text in output
        target = self.text.strip()
        return any(line.strip() == target for line in output.splitlines())


@dataclass(frozen=True)
class Verdict:
    kind: str  # "accept" | "revise"
    note: str = ""

    def __post_init__(self) -> None:
        if self.kind not in ("accept", "revise"):
            raise ValueError(f"unknown verdict kind {self.kind!r}")


ACCEPT = Verdict("accept")


def revise(note: str) -> Verdict:
    return Verdict("revise", note)


@dataclass
class RefinementRound:
    candidate_prompt: str
    probe_input: Optional[str] = None
    probe_output: Optional[str] = None
    expected: Optional[ExpectedPattern] = None
    verdict: Optional[Verdict] = None

    @property
    def passed(self) -> Optional[bool]:
        if self.probe_output is None or self.expected is None:
            return None
        return self.expected.matches(self.probe_output)


@dataclass
class RefinementSession:
    """Append-only record of one refinement effort. ``log_path`` makes
    every mutation durable as a JSONL event; replaying the file reproduces
    the session."""

    goal_statement: str
    name: str = "template"
    rounds: list[RefinementRound] = field(default_factory=list)
    status: str = "open"  # "open" | "accepted"
    log_path: Optional[Path] = None

    def __post_init__(self) -> None:
        if self.log_path is not None:
            self.log_path = Path(self.log_path)
            if not self.log_path.exists():
                self._log("SessionOpened", {"goal": self.goal_statement, "name": self.name})

    def _log(self, kind: str, payload: dict) -> None:
        if self.log_path is None:
            return
        try:
            with open(self.log_path, "a", encoding="utf-8") as f:
                f.write(json.dumps({"kind": kind, "payload": payload}, ensure_ascii=False) + "\n")
        except OSError as exc:
            raise StorageFailure(f"cannot write session log: {exc}") from exc

    @property
    def revision_notes(self) -> list[str]:
        return [r.verdict.note for r in self.rounds if r.verdict and r.verdict.kind == "revise"]

    @property
    def current_candidate(self) -> Optional[str]:
        return self.rounds[-1].candidate_prompt if self.rounds else None

    @classmethod
    def replay(cls, log_path: str | Path) -> "RefinementSession":
        session: Optional[RefinementSession] = None
        for line in Path(log_path).read_text(encoding="utf-8").splitlines():
            if not line.strip():
                continue
            event = json.loads(line)
            kind, payload = event["kind"], event["payload"]
            if kind == "SessionOpened":
                session = cls(goal_statement=payload["goal"], name=payload["name"])
            elif session is None:
                raise StorageFailure("session log does not start with SessionOpened")
            elif kind == "CandidateComposed":
                session.rounds.append(RefinementRound(candidate_prompt=payload["text"]))
            elif kind == "ProbeRecorded":
                rnd = session.rounds[-1]
                rnd.probe_input = payload["input"]
                rnd.probe_output = payload["output"]
                rnd.expected = ExpectedPattern(**payload["expected"])
            elif kind == "VerdictRecorded":
                rnd = session.rounds[-1]
                rnd.verdict = Verdict(payload["kind"], payload.get("note", ""))
                if rnd.verdict.kind == "accept":
                    session.status = "accepted"
        if session is None:
            raise StorageFailure("empty session log")
        return session


def compose_candidate(session: RefinementSession, writer_provider) -> str:
    """One fresh writer call carrying the goal statement plus every prior
    revision note; the draft becomes the session's new round."""
    if session.status != "open":
        raise SessionClosed("session already accepted")
    if not session.goal_statement.strip():
        raise ValueError("goal statement must be non-empty")
    parts = [session.goal_statement]
    parts.extend(session.revision_notes)
    candidate = writer_provider.chat("\n\n".join(parts))
    session.rounds.append(RefinementRound(candidate_prompt=candidate))
    session._log("CandidateComposed", {"text": candidate})
    return candidate


def probe_candidate(candidate: str, probe_input: str, probe_provider) -> str:
    """Test a candidate on a fresh agent with no prior conversational
    context: one call with candidate and input concatenated."""
    if not candidate.strip():
        raise ValueError("candidate prompt must be non-empty")
    return probe_provider.chat(candidate + "\n\n" + probe_input)


def probe_round(
    session: RefinementSession,
    probe_input: str,
    expected: ExpectedPattern,
    probe_provider,
) -> str:
    """Probe the session's current candidate and record the result. A
    provider failure aborts the round and leaves the session unchanged."""
    if session.status != "open":
        raise SessionClosed("session already accepted")
    candidate = session.current_candidate
    if candidate is None:
        raise NoProbeYet("no candidate composed yet")
    output = probe_candidate(candidate, probe_input, probe_provider)
    rnd = session.rounds[-1]
    rnd.probe_input = probe_input
    rnd.probe_output = output
    rnd.expected = expected
    session._log(
        "ProbeRecorded",
        {
            "input": probe_input,
            "output": output,
            "expected": {"text": expected.text, "mode": expected.mode},
        },
    )
    return output


def record_verdict(session: RefinementSession, verdict: Verdict) -> RefinementSession:
    """Append the human verdict. Accept closes the session; the accepted
    candidate can then be exported as a named template."""
    if session.status != "open":
        raise SessionClosed("session already accepted")
    if not session.rounds or session.rounds[-1].probe_output is None:
        raise NoProbeYet("cannot judge a round that was never probed")
    session.rounds[-1].verdict = verdict
    session._log("VerdictRecorded", {"kind": verdict.kind, "note": verdict.note})
    if verdict.kind == "accept":
        session.status = "accepted"
    return session


_VERSION_RE = re.compile(r"_v(\d+)\.txt$")


def export_template(session: RefinementSession, directory: str | Path) -> Path:
    """Write the accepted candidate into the prompt-template directory with
    a version suffix; returns the new file's path."""
    if session.status != "accepted":
        raise SessionClosed("only accepted sessions export templates")
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    existing = [
        int(m.group(1))
        for p in directory.glob(f"{session.name}_v*.txt")
        if (m := _VERSION_RE.search(p.name))
    ]
    version = max(existing, default=0) + 1
    path = directory / f"{session.name}_v{version}.txt"
    path.write_text(session.current_candidate or "", encoding="utf-8")
    return path
