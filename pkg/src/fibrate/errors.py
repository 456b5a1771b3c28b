"""Exception hierarchy."""


class FibrateError(Exception):
    """Base class for all errors raised by fibrate."""


class BadSpec(FibrateError):
    pass


class BadParams(FibrateError):
    pass


class BadDegrees(FibrateError):
    pass


class GridMismatch(FibrateError):
    pass


class NotRadial(FibrateError):
    pass


class ZeroDenominator(FibrateError):
    pass


class NotInD(FibrateError):
    """The fibering map of the field has no interior critical point."""


class DegenerateFiber(FibrateError):
    pass


class DegenerateNehari(FibrateError):
    pass


class ConvergenceFailure(FibrateError):
    pass


class LeftD(FibrateError):
    pass


class MaxIters(FibrateError):
    """Optimizer ran out of iterations; the last record is attached."""

    def __init__(self, message, record=None):
        super().__init__(message)
        self.record = record


class BadLevel(FibrateError):
    pass


class SamplerOutOfD(FibrateError):
    pass


class MonotonicityViolation(FibrateError):
    pass


class FormatError(FibrateError):
    pass


class ConfigError(FibrateError):
    pass
