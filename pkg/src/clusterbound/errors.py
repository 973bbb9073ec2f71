"""Exception types raised across the package."""


class ClusterBoundError(Exception):
    """Base class for all package errors."""


class RankDeficiencyError(ClusterBoundError, ValueError):
    """A matrix that must have full column rank does not."""

    def __init__(self, message, ratio=None):
        super().__init__(message)
        self.ratio = ratio


class ConvergenceError(ClusterBoundError, ArithmeticError):
    """A Jacobi sweep limit was exceeded."""


class NotHermitianError(ClusterBoundError, ValueError):
    pass


class DimensionError(ClusterBoundError, ValueError):
    pass


class GapError(ClusterBoundError, ValueError):
    """Target and unwanted eigenvalues are not separated."""


class RightAngleError(RankDeficiencyError):
    """A principal angle equals pi/2, so tangents are infinite."""


class FilterError(ClusterBoundError, ValueError):
    pass


class ConfigError(ClusterBoundError, ValueError):
    pass
