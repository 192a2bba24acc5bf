"""Exception types raised across the pipeline."""

from __future__ import annotations


class PotbiError(Exception):
    """Root of every error the pipeline raises on purpose."""


class ConfigError(PotbiError, ValueError):
    """Configuration file missing, unreadable or invalid."""


class UndecodableImage(PotbiError, ValueError):
    """Image bytes are not a supported raster format."""


class InvalidLabel(PotbiError, ValueError):
    """A label is not a member of the active taxonomy."""


class UnknownLabel(PotbiError, ValueError):
    """Free text does not resolve to a taxonomy label."""


class ParseError(PotbiError, ValueError):
    """A file does not parse as the expected format."""


class DuplicateCaseId(PotbiError, ValueError):
    """Two manifest entries share a case_id."""


class MissingImage(PotbiError, ValueError):
    """A manifest entry points at an image that does not exist."""


class EmptyAssistantContent(PotbiError, ValueError):
    """An entry has neither annotations nor a label for the assistant turn."""


class UnknownPlaceholder(PotbiError, ValueError):
    """A prompt template uses a placeholder that is not supported."""


class UnknownTemplate(PotbiError, KeyError):
    """A template id is not present in the template store."""


class Unparseable(PotbiError, ValueError):
    """Model text carries neither a JSON label nor a lexicon match."""


class UnknownJsonLabel(Unparseable):
    """A JSON object names a label outside the taxonomy."""

    def __init__(self, label: str):
        super().__init__(f"JSON label {label!r} is not in the taxonomy")
        self.label = label


class InvalidConfidence(PotbiError, ValueError):
    """A JSON confidence is not a number in [0, 1]."""


class FailedUpstream(PotbiError, ValueError):
    """A raw response did not complete successfully."""


class UnknownModelId(PotbiError, ValueError):
    """A prediction references a model that is not in the endpoint list."""


class NoValidPredictions(PotbiError):
    """No consortium member produced a usable prediction."""


class InvalidTrueLabel(PotbiError, ValueError):
    """An evaluation pair has a true label outside the taxonomy."""


class MissingGroundTruth(PotbiError, ValueError):
    """A case result has no labeled manifest entry."""


class StrategyNameConflict(PotbiError, ValueError):
    """A member id collides with another strategy name in the report."""


class PortInUse(PotbiError, OSError):
    """The mock server port is already bound."""


class UnknownCase(PotbiError, KeyError):
    """The mock server cannot resolve a case from a request."""


class TooLarge(PotbiError, ValueError):
    """The oracle enumeration exceeds its tractable bound."""


class AuditError(PotbiError):
    """The audit log cannot be opened or appended consistently."""
