"""Exception types; each maps to a CLI exit code."""


class BurgersError(Exception):
    exit_code = 1


class ConfigError(BurgersError, ValueError):
    exit_code = 2


class NonConvergenceError(BurgersError):
    """Newton iteration failed to reach the update tolerance."""

    exit_code = 3

    def __init__(self, message, time=None):
        super().__init__(message)
        self.time = time


class SingularMatrixError(NonConvergenceError):
    pass


class OracleToleranceError(BurgersError):
    """Adaptive quadrature in the analytic solution hit its depth limit."""

    exit_code = 4


class NotReachedError(BurgersError):
    """The run ended before the asymptotic regime was detected."""
