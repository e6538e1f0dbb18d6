"""Exception types shared across the toolkit.

Every exception carries a stable ``code`` token so the CLI and the HTTP
service can map failures onto diagnostics without matching message text.
"""

from __future__ import annotations


class FamvarError(Exception):
    """Base class for all toolkit errors."""

    code = "ERROR"

    def __init__(self, message: str, *, subject: str | None = None):
        super().__init__(message)
        self.subject = subject

    @property
    def message(self) -> str:
        return self.args[0]


class XmlSyntaxError(FamvarError):
    """Input is not well-formed XML."""

    code = "SYNTAX"


class SchemaError(FamvarError):
    """Well-formed XML that does not follow the interchange schema."""

    code = "SCHEMA"


class UnknownIdError(FamvarError):
    """A variant or value reference does not exist in the model."""

    code = "UNKNOWN_ID"


class UnknownAreaError(FamvarError):
    """An area token is not declared by the family model."""

    code = "UNKNOWN_AREA"


class InvalidModelError(FamvarError):
    """The model violates structural rules; carries the full diagnostic list."""

    code = "INVALID_MODEL"

    def __init__(self, diagnostics, message: str | None = None):
        self.diagnostics = list(diagnostics)
        if message is None:
            if self.diagnostics:
                first = self.diagnostics[0]
                message = f"invalid model: {first.code} at {first.subject}"
                if len(self.diagnostics) > 1:
                    message += f" (+{len(self.diagnostics) - 1} more)"
            else:
                message = "invalid model"
        super().__init__(message)


class PinConflictError(FamvarError):
    """A pinned value demands a variant that the customization removed."""

    code = "PIN_CONFLICT"


class AlternativeConflictError(FamvarError):
    """Two distinct values are demanded on an Alternative variant."""

    code = "ALTERNATIVE_CONFLICT"


class MismatchedModelError(FamvarError):
    """A decision table does not cover the variants of the given model."""

    code = "MISMATCHED_MODEL"


class SpaceTooLargeError(FamvarError):
    """Enumeration refused: the raw state space exceeds the configured cap."""

    code = "SPACE_TOO_LARGE"


class DanglingTraceError(FamvarError):
    """A model document carries trace tags that fail check_traces."""

    code = "DANGLING_TRACE"

    def __init__(self, diagnostics, message: str | None = None):
        self.diagnostics = list(diagnostics)
        if message is None and self.diagnostics:
            first = self.diagnostics[0]
            message = f"{first.code} at {first.subject}: {first.message}"
        super().__init__(message or "document traces are not clean")


class IncompleteConfigurationError(FamvarError):
    """A configuration leaves variants undecided where a total one is required."""

    code = "INCOMPLETE_CONFIGURATION"
