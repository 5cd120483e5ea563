"""Exception hierarchy shared by the scheduling modules."""


class RpsError(Exception):
    """Base class for all errors raised by rpssps."""


class DomainError(RpsError, ValueError):
    """An argument lies outside the domain of an operation."""


class StabilityViolation(DomainError):
    """Traffic period shorter than one slot; the grid cannot keep up."""


class IncompleteFactors(RpsError):
    """A factor tuple is evaluated before every initial position is set."""


class DerivationFailure(RpsError):
    """Initial-position search could not produce a valid tuple."""
