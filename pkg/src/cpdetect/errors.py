"""Exception types raised by the package."""


class CPDetectError(ValueError):
    """Base class for all package errors."""


class InputError(CPDetectError):
    """Invalid series, parameter or configuration."""


class DegenerateVarianceError(CPDetectError):
    """The scale estimate is zero, so the statistic cannot be studentized."""
