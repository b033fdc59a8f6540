"""Exception types shared across the package."""


class BlindCommError(Exception):
    """Base class for all package errors."""


class InvalidProbabilityError(BlindCommError, ValueError):
    """An edge probability fell outside [0, 1]."""


class AssumptionViolatedError(BlindCommError, ValueError):
    """The constants do not satisfy c3 > c1 > c2 >= 0, or a required gap is not positive."""


class DegenerateDataError(BlindCommError, ValueError):
    """Input data cannot support the requested computation (empty clusters, zero variance, ...)."""


class ConfigError(BlindCommError, ValueError):
    """An experiment or CLI configuration is malformed."""
