"""Exception hierarchy shared by the pipeline stages."""


class EDTWKError(Exception):
    """Base class for every error raised by this package."""


class ShapeError(EDTWKError, ValueError):
    pass


class ValidationError(EDTWKError, ValueError):
    pass


class ParseError(ValidationError):
    def __init__(self, message, line=None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


class ConfigError(ValidationError):
    pass


class SingularityError(EDTWKError, ArithmeticError):
    """Graph Laplacian has a repeated zero eigenvalue (disconnected graph)."""

    def __init__(self, message, components=None):
        self.components = components
        super().__init__(message)


class DegenerateStateError(EDTWKError, ArithmeticError):
    pass


class CapacityError(EDTWKError, ValueError):
    pass


class PrerequisiteError(EDTWKError, FileNotFoundError):
    pass
