"""
Error types - every failure the explorer reports deliberately
"""

from typing import Optional


class ExplorerError(Exception):
    """Base class for all explorer errors"""


class DomainError(ExplorerError):
    """A point lies outside the region where a function may be evaluated"""


class ParameterError(ExplorerError):
    """An argument is outside its admissible set"""


class InversionError(ExplorerError):
    """Newton inversion of a gradient map did not converge"""


class CapacityError(ExplorerError):
    """An enumeration would exceed the configured capacity"""


class UnsupportedError(ExplorerError):
    """The requested operation needs a representation that is not available"""


class RangeError(ExplorerError):
    """An exponent argument lies outside the interval where its map is defined"""


class DataError(ExplorerError):
    """Not enough usable data for a fit"""


class UnspecifiedBranch(ExplorerError):
    """No error-factor branch is defined for this (n, R)"""


class InvariantError(ExplorerError):
    """An exact identity that must always hold was violated"""


class QuadratureError(ExplorerError):
    """Quadrature refinement hit the node cap before converging"""

    def __init__(self, message: str, previous: Optional[complex] = None,
                 last: Optional[complex] = None):
        super().__init__(message)
        self.previous = previous
        self.last = last
