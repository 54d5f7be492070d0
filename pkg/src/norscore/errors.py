"""Exception types shared across the package."""


class NorScoreError(Exception):
    """Base class for all errors raised by norscore."""


class ParseError(NorScoreError):
    """Malformed input text: bad JSON/CSV syntax, missing or mistyped fields."""

    def __init__(self, message, line=None, field=None):
        self.line = line
        self.field = field
        where = []
        if line is not None:
            where.append(f"line {line}")
        if field is not None:
            where.append(f"field {field!r}")
        if where:
            message = f"{message} ({', '.join(where)})"
        super().__init__(message)


class ValidationError(NorScoreError, ValueError):
    """Well-formed input that breaks a domain invariant."""
