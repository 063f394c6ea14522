"""Exception types shared across the package.

Every domain error carries a ``code`` equal to its class name; the command
line tool reports that code in JSON mode and exits with status 3.
"""


class LeibnizError(Exception):
    """Base class for all domain errors."""

    @property
    def code(self) -> str:
        return type(self).__name__


class DegenerateExpression(LeibnizError, ZeroDivisionError):
    """An expression divides by the exact constant 0."""


class UnsupportedNode(LeibnizError):
    """The differential operator has no rule for this node (e.g. abs)."""


class NonPositiveBase(LeibnizError):
    """The generalized power rule fired on a base not known to be positive."""


class NotLinearInDifferentials(LeibnizError):
    pass


class TargetAbsent(LeibnizError):
    pass


class UnderdeterminedSystem(LeibnizError):
    pass


class HeldTargetConflict(LeibnizError):
    pass


class NotExact(LeibnizError):
    pass


class Unmatched(LeibnizError):
    """The form is exact but no reverse rule produces a potential."""


class UnboundSymbol(LeibnizError, KeyError):
    def __str__(self) -> str:
        return Exception.__str__(self)


class NoConvergence(LeibnizError):
    pass


class SingularIntegrand(LeibnizError):
    pass


class DomainEdge(LeibnizError):
    """A function was asked for a value its series cannot represent."""


class SeriesZeroDivision(LeibnizError, ZeroDivisionError):
    """Division by the exact zero series."""

    @property
    def code(self) -> str:
        return "ZeroDivision"


class OrderExhausted(LeibnizError):
    """All coefficients inside the truncation window cancelled."""
