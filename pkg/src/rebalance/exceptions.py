class RebalanceError(Exception):
    """Base class for errors raised by this package."""


class ValidationError(RebalanceError, ValueError):
    """Bad input values or parameters."""


class TextDecodeError(ValidationError):
    def __init__(self, offset: int, reason: str = "invalid utf-8"):
        self.offset = offset
        super().__init__(f"invalid UTF-8 byte sequence at byte offset {offset}: {reason}")


class ParseError(ValidationError):
    """A file line or row could not be parsed."""

    def __init__(self, message: str, line: int | None = None, path=None):
        self.line = line
        self.path = path
        where = ""
        if path is not None:
            where += f"{path}"
        if line is not None:
            where += f"{':' if where else 'line '}{line}"
        super().__init__(f"{where}: {message}" if where else message)


class PlanError(ValidationError):
    """An augmentation plan is inconsistent with the corpus it targets."""


class TrainingError(RebalanceError, ValueError):
    """Training could not proceed (single class, diverging loss)."""
