"""Exception hierarchy.

Every error carries the process exit code the command line maps it to:
1 for usage errors, 2 for data/validation errors, 3 for external-metric
and protocol errors.
"""

from __future__ import annotations

from typing import Optional


class SumScoreError(Exception):
    exit_code = 2


class UsageError(SumScoreError, ValueError):
    exit_code = 1


class SchemaError(SumScoreError, ValueError):
    """A MetricsDict (or a list of them) has an invalid shape."""


class ValidationError(SumScoreError, ValueError):
    """Input data violates an invariant of the data model.

    ``line`` is the 1-based line number when the data came from a file.
    """

    def __init__(self, message: str, *, line: Optional[int] = None, field: Optional[str] = None):
        self.message = message
        self.line = line
        self.field = field
        super().__init__(self._render())

    def _render(self) -> str:
        parts = []
        if self.line is not None:
            parts.append(f"line {self.line}")
        if self.field is not None:
            parts.append(f"field {self.field!r}")
        prefix = ", ".join(parts)
        return f"{prefix}: {self.message}" if prefix else self.message


class ParseError(ValidationError):
    """A line of a record file is not a JSON object."""


class DataError(SumScoreError):
    """The data is well formed but cannot be processed as requested."""


class JackknifeNotPossible(DataError):
    pass


class RegistryError(SumScoreError):
    exit_code = 1


class ScoringError(SumScoreError):
    def __init__(self, message: str, *, instance_id: Optional[str] = None):
        self.instance_id = instance_id
        if instance_id is not None:
            message = f"instance {instance_id!r}: {message}"
        super().__init__(message)


class ExternalMetricError(SumScoreError):
    exit_code = 3


class ProtocolError(ExternalMetricError):
    pass


class ExternalMetricTimeout(ExternalMetricError):
    pass


class UndefinedCorrelation(ArithmeticError):
    """A correlation coefficient is undefined (e.g. a constant input vector)."""
