"""Exception hierarchy for the whole package.

Every error raised by a stagecoach module derives from StagecoachError so
the CLI and gateway can map failures to exit codes / HTTP statuses in one
place.
"""

from __future__ import annotations


class StagecoachError(Exception):
    """Base class for all package errors."""


# --- cursor / core model ------------------------------------------------


class MalformedCursor(StagecoachError):
    """Cursor text is not a '<stage>-<iteration>' pair of positive integers."""


# --- scoping ---------------------------------------------------------------


class EmptyGroundingText(StagecoachError):
    """The scope request carries no practice text to ground the plan."""


class MissingStageHeader(StagecoachError):
    pass


class MissingObjective(StagecoachError):
    pass


class MissingCompletionIndicator(StagecoachError):
    pass


class NonContiguousStages(StagecoachError):
    pass


# --- navigator -------------------------------------------------------------


class MissingBlueprint(StagecoachError):
    """Navigator prompt requested before the campaign has a blueprint."""


class MissingSection(StagecoachError):
    def __init__(self, name: str):
        super().__init__(f"missing section: {name}")
        self.name = name


class DuplicateSection(StagecoachError):
    def __init__(self, name: str):
        super().__init__(f"duplicate section: {name}")
        self.name = name


# --- executor ---------------------------------------------------------------


class InvalidChoiceIndex(StagecoachError):
    pass


class MissingStepsSection(StagecoachError):
    pass


class MissingTemplateSection(StagecoachError):
    pass


class UnknownSlotName(StagecoachError):
    def __init__(self, name: str):
        super().__init__(f"template has no slot named {name!r}")
        self.name = name


# --- provider ---------------------------------------------------------------


class ProviderError(StagecoachError):
    pass


class Timeout(ProviderError):
    pass


class AuthFailure(ProviderError):
    pass


class TransportFailure(ProviderError):
    pass


class NonSuccessStatus(ProviderError):
    def __init__(self, status_code: int, detail: str = ""):
        super().__init__(f"provider returned status {status_code}: {detail}".rstrip(": "))
        self.status_code = status_code


# --- refinery ---------------------------------------------------------------


class NoProbeYet(StagecoachError):
    """Verdict recorded before the current round was probed."""


class SessionClosed(StagecoachError):
    pass


# --- rubric -----------------------------------------------------------------


class UnknownTask(StagecoachError):
    pass


class DuplicateScore(StagecoachError):
    pass


class ZeroTasks(StagecoachError):
    pass


# --- lab data ----------------------------------------------------------------


class BadRatio(StagecoachError):
    pass


class UnknownModulatorCode(StagecoachError):
    pass


class NonIntegerField(StagecoachError):
    pass


class DuplicateExpId(StagecoachError):
    pass


class NonMonotonicTrajectory(StagecoachError):
    pass


# --- event store -------------------------------------------------------------


class IllegalTransition(StagecoachError):
    pass


class StorageFailure(StagecoachError):
    pass


class CorruptLog(StagecoachError):
    def __init__(self, seq: int, detail: str = ""):
        super().__init__(f"corrupt log at seq {seq}: {detail}".rstrip(": "))
        self.seq = seq


class NoSuchCampaign(StagecoachError):
    pass
