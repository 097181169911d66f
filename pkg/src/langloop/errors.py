"""Exception types shared across the package."""

from __future__ import annotations


class LangloopError(Exception):
    """Base class for all package errors."""


# --- configuration loading ---

class MissingFile(LangloopError):
    pass


class SchemaViolation(LangloopError):
    """A config file failed validation; the message names the offending field."""


class DuplicateActionName(SchemaViolation):
    pass


class UnknownAction(LangloopError):
    """An action name not present in the loaded interface."""

    def __init__(self, name: str, admissible: tuple[str, ...]):
        self.name = name
        self.admissible = admissible
        super().__init__(f"unknown action {name!r}; admissible: {', '.join(admissible)}")


# --- chat backends ---

class BackendUnavailable(LangloopError):
    pass


class ReplayMiss(LangloopError):
    """No recorded response for this request digest."""


class NoRuleMatched(LangloopError):
    pass


class IoFailure(LangloopError):
    pass


# --- controller parsing ---

class QueryParseFailure(LangloopError):
    pass


class ActionParseFailure(LangloopError):
    pass


# --- perception ---

class InvalidTarget(LangloopError):
    """Requested raster size is smaller than the source."""


# --- simulation / search ---

class Unreachable(LangloopError):
    """No success state is reachable from the initial state."""


# --- blackjack ---

class ActionOnFinishedEpisode(LangloopError):
    pass


class InconsistentOutcome(LangloopError):
    """Belief bounds crossed; the environment or its bookkeeping is corrupt."""


# --- episode loop ---

class StepError(LangloopError):
    """Unrecoverable failure inside one loop step; terminates the episode."""
