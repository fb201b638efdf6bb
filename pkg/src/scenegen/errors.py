"""Exception types shared across the pipeline."""

from __future__ import annotations


class SceneGenError(Exception):
    """Base class for all errors raised by this package."""


class ParseError(SceneGenError):
    """Malformed OpenDRIVE input; carries (line, column) when known."""

    def __init__(self, message: str, line: int | None = None, column: int | None = None):
        if line is not None:
            message = f"{message} (line {line}, column {column})"
        super().__init__(message)
        self.line = line
        self.column = column


class GraphConsistencyError(SceneGenError):
    """A link or lane reference points at a road/lane that does not exist."""

    def __init__(self, message: str, road_id: str | None = None):
        super().__init__(message)
        self.road_id = road_id


class NotFoundError(SceneGenError):
    """Lookup by id failed."""


class SerializationError(SceneGenError):
    """Persisted payload has the wrong version or is corrupt."""


class EmptyPromptError(SceneGenError):
    """A blank scene description was submitted."""


class RepairExhaustedError(SceneGenError):
    """The validation/repair loop ran out of retries.

    Carries the final ValidationReport and the number of attempts made.
    """

    def __init__(self, report, attempts: int):
        super().__init__(
            f"backend output still invalid after {attempts} attempts: "
            + "; ".join(d.path + " " + d.message for d in report.diagnostics)
        )
        self.report = report
        self.attempts = attempts


class BackendError(SceneGenError):
    """A planner backend failed to produce a response."""


class ReplayError(SceneGenError):
    """Transcript replay ran dry or diverged from the recorded stages."""


class NoCandidateError(SceneGenError):
    """No road on the map satisfies the retrieval conditions."""

    def __init__(self, conditions):
        super().__init__(f"no road satisfies the retrieval conditions: {conditions}")
        self.conditions = conditions


class SpawnError(SceneGenError):
    """An agent cannot be placed on the selected road."""

    def __init__(self, message: str, agent_index: int | None = None):
        if agent_index is not None:
            message = f"agent {agent_index}: {message}"
        super().__init__(message)
        self.agent_index = agent_index


class RangeError(SceneGenError):
    """A tick index is outside the rendered frame range."""


class ParentNotDoneError(SceneGenError):
    """Continuation was requested on a run that has not finished."""
