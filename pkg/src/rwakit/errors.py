"""Exception types shared across the toolkit."""


class RwaError(Exception):
    """Base class for all toolkit errors."""


class ParseError(RwaError):
    """A topology or traffic file could not be parsed.

    Carries the 1-based line number of the offending line when known.
    """

    def __init__(self, message, line=None):
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
        self.line = line


class ValidationError(RwaError):
    """Input data violates a structural invariant (not a solver failure)."""


class ModelError(RwaError):
    """A model cannot be built or evaluated from the given inputs."""


class InstanceTooLargeError(RwaError):
    """The brute-force oracle refuses instances beyond its size guard."""
