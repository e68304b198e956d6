"""Exception taxonomy shared across the toolkit.

Every error raised on bad data (as opposed to a programming bug) derives
from AbdscopeError so the CLI can map it to a data-error exit code.
"""


class AbdscopeError(Exception):
    """Base class for all toolkit errors."""


class CaptureError(AbdscopeError):
    """Problems with capture files or capture values."""


class CaptureFormatError(CaptureError):
    """Malformed capture file (schema violation). Carries a 1-based line number."""

    def __init__(self, message: str, line_no: int | None = None):
        self.line_no = line_no
        if line_no is not None:
            message = f"line {line_no}: {message}"
        super().__init__(message)


class CaptureInvariantError(CaptureError):
    """Structurally valid capture that violates a semantic invariant."""


class SiteMismatchError(CaptureError):
    """Captures combined into a triple name different sites."""


class VariantMismatchError(CaptureError):
    """Captures combined into a triple carry the wrong variants."""


class LabelingConflictError(AbdscopeError):
    """The same site appears with both labels in one dataset."""


class SchemaMismatchError(AbdscopeError):
    """Model and feature vector disagree on the feature schema."""


class ModelKindError(AbdscopeError):
    """An operation received a model of the wrong kind."""


class UndefinedEntropyError(AbdscopeError):
    """Entropy requested for an empty (all-zero) class distribution."""


class UndefinedRelativeGainError(AbdscopeError):
    """Relative information gain requested when class entropy is zero."""


class StratificationError(AbdscopeError):
    """A class has too few rows for the requested number of folds."""


class RuleCompileError(AbdscopeError):
    """A signature rule's pattern does not compile. Carries the rule id."""

    def __init__(self, rule_id: str, message: str):
        self.rule_id = rule_id
        super().__init__(f"rule {rule_id!r}: {message}")


class JsParseError(AbdscopeError):
    """Script text is not parseable. Carries the source position."""

    def __init__(self, message: str, line: int, col: int):
        self.line = line
        self.col = col
        super().__init__(f"{message} at line {line}, column {col}")


class RegistryMissError(AbdscopeError):
    """Strict mode met an AST node type absent from the registry."""


class InsufficientDataError(AbdscopeError):
    """Too few vectors for the requested decomposition."""


class InsufficientVarianceError(AbdscopeError):
    """All vectors identical: covariance is zero, ratios undefined."""


class MissingArtifactError(AbdscopeError):
    """A pipeline stage needs an output that an earlier stage never wrote."""
