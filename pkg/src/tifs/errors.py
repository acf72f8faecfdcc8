"""Exception hierarchy shared by every module of the package."""


class TifsError(Exception):
    """Base class for all package errors."""


class DomainError(TifsError, ValueError):
    """An argument lies outside the domain of an operation."""


class InvalidNodeError(DomainError):
    """A path is not a node of the tree, or has no children at that depth."""


class PrunedViolationError(TifsError, ValueError):
    """A tree source produced a node without children."""


class CapacityError(TifsError):
    """The instance is too large for the requested materialization."""


class UnsupportedError(TifsError):
    """The requested combination of inputs is not supported."""


class NotInAStarError(DomainError):
    """A node is not reachable by a chain of optimal antichains."""


class OscViolationError(DomainError):
    """The open set condition fails, so an operation requiring it refuses."""
