"""Exception types raised by hyperlab."""


class HyperlabError(Exception):
    """Base class for all hyperlab errors."""


class InputError(HyperlabError, ValueError):
    """Malformed or out-of-contract input (bad JSON, wrong axis, ...)."""


class ReflexivityError(InputError):
    """Raised when a weak-topology surrogate is requested on l^1."""


class ProductOverflowError(HyperlabError, OverflowError):
    """A weight product left the double-precision range.

    ``index`` names the coordinate whose product could not be represented.
    """

    def __init__(self, message, index=None):
        super().__init__(message)
        self.index = index


class PoleError(HyperlabError, ZeroDivisionError):
    def __init__(self, pole):
        super().__init__(f"point is the pole of the map: z = {pole!r}")
        self.pole = pole


class ConditioningError(HyperlabError, ArithmeticError):
    """Series composition residual too large; retry with a larger degree cap."""
