"""Exception types raised across the package."""


class DriftFilterError(ValueError):
    """Base class for all errors raised by driftfilter."""


class AllZeroError(DriftFilterError):
    """Raw weights sum to zero, so they cannot be normalized."""


class NonFiniteError(DriftFilterError):
    """A NaN or Inf appeared in an input or was produced by an operation."""


class DimensionMismatchError(DriftFilterError):
    pass


class DegenerateSumError(DriftFilterError):
    """Every adjusted weight was clamped to zero."""


class TooFewParticlesError(DriftFilterError):
    pass


class SingularInnovationError(DriftFilterError):
    """The innovation covariance H P H^T + R is numerically singular."""


class BadEdgesError(DriftFilterError):
    pass


class ConfigError(DriftFilterError):
    pass
