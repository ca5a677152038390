"""Exception types raised by the engine.

Row-level data problems never raise: loaders log them to a reject sidecar
and keep going. The exceptions below signal structural problems (bad file
shape, bad config, broken preconditions) that a caller must handle.
"""


class PipelineError(Exception):
    """Base class for all engine errors."""


class ConfigError(PipelineError):
    """Configuration file missing, unreadable, or inconsistent."""


class DependencyError(PipelineError):
    """A stage was requested before the artifacts it consumes exist."""


class MalformedIssn(PipelineError, ValueError):
    """ISSN has the wrong length or contains invalid characters."""


class ChecksumFailure(PipelineError, ValueError):
    """ISSN is well-formed but its check digit does not verify."""


class MissingColumn(PipelineError):
    """A tabular input lacks a required header column."""


class SchemaViolation(PipelineError):
    """An interchange line does not conform to the documented schema."""

    def __init__(self, code: str, detail: str = ""):
        super().__init__(f"{code}: {detail}" if detail else code)
        self.code = code
        self.detail = detail


class NoDate(PipelineError):
    """Publication-year assignment was asked of a record with no date."""


class SampleTooLarge(PipelineError):
    """Audit sample size exceeds the crosswalk size."""


class InsufficientPairs(PipelineError):
    """Fewer than two paired observations remain after filtering."""


class UnknownDoi(PipelineError):
    """The DOI is not present in any ingested corpus."""
