"""Exception hierarchy shared by every subsystem.

Validation-type errors derive from :class:`ValidationError` so the CLI can map
them to exit code 1; anything else that escapes a command is a runtime error.
"""


class VqdqnError(Exception):
    """Base class for all package errors."""


class ValidationError(VqdqnError, ValueError):
    """Invalid user-supplied input (configs, files, arguments)."""


class ConfigError(ValidationError):
    pass


class EncodingError(ValidationError):
    pass


class ParseError(ValidationError):
    def __init__(self, message: str, line: int | None = None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


class MappingError(ValidationError):
    pass


class CompatibilityError(ValidationError):
    pass


class UsageError(VqdqnError, RuntimeError):
    """An operation was invoked in a state that does not allow it."""


class TrainingError(VqdqnError, RuntimeError):
    def __init__(self, message: str, step: int | None = None):
        self.step = step
        if step is not None:
            message = f"step {step}: {message}"
        super().__init__(message)
