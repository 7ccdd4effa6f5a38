"""Exception types shared across the package."""


class MuskatError(Exception):
    """Base class for all package errors."""


class AdmissibilityError(MuskatError):
    """Interface state touches the strip boundary or violates the safety margin."""


class ConfigError(MuskatError):
    """Malformed or inconsistent run configuration."""


class IllPosedRegimeError(MuskatError):
    """Parameters put the evolution in the ill-posed regime without opt-in."""


class SolverConvergenceError(MuskatError):
    """An iterative solve exhausted its iteration budget."""

    def __init__(self, message, residual=None):
        super().__init__(message)
        self.residual = residual


class FitError(MuskatError):
    """A rate fit was requested on unusable data."""
