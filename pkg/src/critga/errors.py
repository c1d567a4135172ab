"""Exception hierarchy shared by every module."""


class CritGAError(Exception):
    """Base class for all package errors."""


class ConfigurationError(CritGAError, ValueError):
    """Invalid parameters or configuration.

    ``field`` names the offending configuration entry when known, using a
    dotted path such as ``"landscape.sigma"``.
    """

    def __init__(self, message: str, field: str | None = None):
        self.field = field
        if field:
            message = f"{field}: {message}"
        super().__init__(message)


class UnsupportedQueryError(CritGAError):
    """The landscape cannot answer the query (e.g. master of a custom table)."""


class ConvergenceError(CritGAError, RuntimeError):
    """Iterative solver did not converge; carries the last residual."""

    def __init__(self, message: str, residual: float, iterations: int):
        self.residual = residual
        self.iterations = iterations
        super().__init__(f"{message} (residual={residual:.3e} after {iterations} iterations)")


class DetectionError(CritGAError, RuntimeError):
    """No error-threshold crossing found in the searched mutation range."""
