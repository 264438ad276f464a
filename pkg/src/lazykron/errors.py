"""Exception types raised by lazykron."""


class LazyKronError(ValueError):
    """Base class for all lazykron errors."""


class DimensionMismatch(LazyKronError):
    pass


class ShapeMismatch(DimensionMismatch):
    pass


class ModeOutOfRange(LazyKronError):
    pass


class IndexOutOfRange(LazyKronError):
    pass


class InvalidSplit(LazyKronError):
    pass


class CapacityExceeded(LazyKronError):
    pass
