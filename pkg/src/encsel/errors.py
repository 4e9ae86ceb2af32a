"""Exception types shared across the package."""


class EncselError(Exception):
    """Base class for all errors raised by this package."""


class FactParseError(EncselError):
    """Malformed ASP fact text; carries the 1-based line and column."""

    def __init__(self, message: str, line: int, column: int):
        super().__init__(f"{message} (line {line}, column {column})")
        self.line = line
        self.column = column


class ValidationError(EncselError):
    """A value violates a structural invariant (self-loop, duplicate arc, ...)."""


class SpecError(EncselError):
    """A generator spec violates one of its constraints."""


class PreconditionError(EncselError):
    """An operation was called on input outside its contract."""


class DataError(EncselError):
    """A data set is incomplete or inconsistent (e.g. missing matrix cells)."""


class SchemaError(EncselError):
    """A persisted file or feature vector does not match the expected schema."""


class FitError(EncselError):
    """A model cannot be fitted with the requested hyperparameters."""
