"""Exception types shared across the package."""


class InputError(ValueError):
    """Malformed user input: unknown letters, bad alphabet files, invalid arguments."""


class FormulaParseError(InputError):
    """Raised when formula or path text cannot be parsed."""

    def __init__(self, message: str, position: int | None = None):
        self.position = position
        if position is not None:
            message = f"{message} (at offset {position})"
        super().__init__(message)


class ResourceLimitError(RuntimeError):
    """Raised when a construction would exceed a configured size or enumeration budget."""
