"""Exception types shared across the package."""


class BridgeboundError(Exception):
    """Base class for all package errors."""


class MissingColumn(BridgeboundError):
    pass


class NonBinaryTreatment(BridgeboundError):
    pass


class NonFiniteValue(BridgeboundError):
    pass


class EmptyArm(BridgeboundError):
    pass


class InvalidSpec(BridgeboundError):
    pass


class DimensionMismatch(BridgeboundError):
    pass


class InvalidPrior(BridgeboundError):
    pass


class NonPositiveVariance(BridgeboundError):
    pass


class NumericalFailure(BridgeboundError):
    """Raised when a factorization or solve fails; never masked with pinv."""


class InvalidSensitivityParam(BridgeboundError):
    pass


class EmptyCollection(BridgeboundError):
    pass


class NoBenchmark(BridgeboundError):
    pass


class ZeroMassStratum(BridgeboundError):
    pass


class ConfigError(BridgeboundError):
    """Bad or inconsistent run configuration (CLI exit code 2)."""


class VerificationFailure(BridgeboundError):
    """An oracle check failed (CLI exit code 4)."""


class DegenerateBenchmark(UserWarning):
    """Benchmark variable is constant within an arm; calibration collapses to zero."""
