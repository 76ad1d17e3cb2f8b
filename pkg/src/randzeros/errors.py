"""Exception types raised across the package."""


class RandZerosError(Exception):
    """Base class for all package errors."""


class ValidationError(RandZerosError, ValueError):
    """Invalid parameters or inconsistent inputs."""


class CapabilityError(RandZerosError, NotImplementedError):
    """The requested combination is not supported."""


class RankError(RandZerosError, ArithmeticError):
    """Orthogonalization broke down (node set too small for the degree)."""


class IterationLimitError(RandZerosError, RuntimeError):
    """An iterative method stopped before meeting its tolerance.

    Attributes
    ----------
    best : object
        Best iterate available when the limit was hit.
    residual : float
        Residual of ``best`` in the method's own measure.
    """

    def __init__(self, message, best=None, residual=float("nan")):
        super().__init__(message)
        self.best = best
        self.residual = residual


class PartialResultError(IterationLimitError):
    """Root iteration did not converge for every root."""


class UndefinedStatisticError(RandZerosError, ValueError):
    """A statistic is undefined for the given data (e.g. all zeros)."""


class ConfigError(RandZerosError, ValueError):
    """Experiment configuration is invalid or cannot be calibrated."""
