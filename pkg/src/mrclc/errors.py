"""Exception types raised across the package."""


class MRCLCError(Exception):
    """Base class for all package errors."""


class DimensionMismatch(MRCLCError, ValueError):
    pass


class NotHurwitz(MRCLCError, ValueError):
    pass


class NotSymmetric(MRCLCError, ValueError):
    pass


class Infeasible(MRCLCError, ValueError):
    """Feedforward gain condition has no solution for the given matrices."""


class NonFiniteOutput(MRCLCError, ArithmeticError):
    pass


class Diverged(MRCLCError):
    """Raised when the plant state leaves the divergence guard.

    The partially filled record is kept on ``record`` for diagnostics.
    """

    def __init__(self, message, record=None):
        super().__init__(message)
        self.record = record


class _LookupError(MRCLCError, KeyError):
    def __str__(self):
        return str(self.args[0]) if self.args else ""


class UnknownScenario(_LookupError):
    pass


class UnknownKey(_LookupError):
    pass


class ParseError(MRCLCError, ValueError):
    pass
