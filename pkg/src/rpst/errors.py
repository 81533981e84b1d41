"""Exception types raised by the rpst package."""


class RPSTError(Exception):
    """Base class for all package errors."""


class TiesWithoutJitter(RPSTError, ValueError):
    """Tied observations were found and no tie-breaking jitter was configured."""


class JitterTooLarge(RPSTError, ValueError):
    """The jitter scale could reorder distinct observations."""


class ZeroDifference(RPSTError, ValueError):
    """A pair has y == x, so its sign is undefined."""


class InvalidTransform(RPSTError, ValueError):
    """A rank transformation violates psi(0) = 0, monotonicity or non-negativity."""


class DegenerateSequence(RPSTError, ValueError):
    """A sequence has zero variance where a positive one is required."""


class DegenerateVariance(RPSTError, ValueError):
    """The null variance of a statistic is zero."""


class QTooLarge(RPSTError, ValueError):
    """Too many ranks were zeroed for the requested quantity to be defined."""


class AlphaOutOfRange(RPSTError, ValueError):
    """The significance level lies outside the window where the critical value is valid."""


class TooLarge(RPSTError, ValueError):
    """An exhaustive enumeration would exceed its size cap."""
