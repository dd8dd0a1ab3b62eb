"""Exception types shared across the package."""


class SlopeCIError(Exception):
    """Base class for all errors raised by slopeci."""


class InvalidParameter(SlopeCIError, ValueError):
    pass


class InvalidDataset(SlopeCIError, ValueError):
    pass


class TooLarge(SlopeCIError, ValueError):
    """An exact computation was requested above its size threshold."""


class UnachievableLevel(SlopeCIError):
    """The requested confidence level cannot be reached for this sample size.

    ``max_level`` carries the best level the method can deliver (an exact
    fraction for Theil, ``None`` when no interval exists at all).
    """

    def __init__(self, message, *, method, n, level, max_level=None):
        super().__init__(message)
        self.method = method
        self.n = n
        self.level = level
        self.max_level = max_level
