"""Exception hierarchy shared by the model, utility and solver modules."""

from __future__ import annotations


class QnumError(Exception):
    """Base class for every error raised by this package."""


class DomainError(QnumError, ValueError):
    """An argument lies outside the mathematical domain of a function."""


class ConsistencyError(QnumError, KeyError):
    """A solution vector does not cover the links or routes it is used with."""

    def __str__(self) -> str:
        # KeyError quotes its message; keep it readable.
        return str(self.args[0]) if self.args else ""


class ValidationError(QnumError, ValueError):
    """A network description is malformed.

    ``where`` names the offending field (``"routes[1].links"``) when known.
    """

    def __init__(self, message: str, where: str | None = None):
        self.where = where
        super().__init__(f"{where}: {message}" if where else message)


class InfeasibleStartError(QnumError):
    """No strictly feasible starting point exists for the requested problem."""


class UtilityDomainError(DomainError):
    """A route's utility is undefined at the requested point.

    Carries the route id (if any) and the :class:`~qnum.utility.DomainMargin`
    so callers can tell which margin went non-positive.
    """

    def __init__(self, message: str, margin=None, route: str | None = None):
        self.margin = margin
        self.route = route
        prefix = f"route {route!r}: " if route is not None else ""
        super().__init__(prefix + message)
