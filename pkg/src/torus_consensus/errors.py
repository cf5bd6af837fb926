"""Exception definitions for Torus Consensus"""

from __future__ import annotations

from typing import TYPE_CHECKING

if TYPE_CHECKING:
    from .tradeoff import TradeoffResult


class ConsensusException(Exception):
    """Base exception for all Torus Consensus errors.

    All custom exceptions in the package inherit from this class. Use this as
    a catch-all when you don't need to handle specific exception types.
    """

    pass


class ConfigException(ConsensusException):
    """Raised when settings loading or validation fails.

    Use this exception when:
    - The settings file cannot be found
    - The TOML syntax is invalid
    - Settings validation fails (out-of-range tolerances, unknown formats)
    """

    pass


class InvalidSpecError(ConsensusException):
    """Raised when a topology cannot describe an r-nearest-neighbor network.

    Use this exception when:
    - A size or the radius is nonpositive
    - Some axis is shorter than 2r + 1, so offsets would collide under wrap
    - A closed form is requested for a neighborhood it does not cover
    """

    pass


class DisconnectedError(ConsensusException):
    """Raised when a nonzero eigen-index carries a zero Laplacian eigenvalue."""

    pass


class UnsupportedParityError(ConsensusException):
    """Raised when closed forms are requested for mixed even/odd axis sizes.

    The closed forms only cover all-even or all-odd dimensions; callers fall
    back to the enumeration oracle.
    """

    pass


class OutOfRangeError(ConsensusException):
    """Raised when a scalar argument lies outside its admissible interval."""

    pass


class NoConvergenceError(ConsensusException):
    """Raised when the consensus iteration does not reach its error target.

    ``iterations`` is the number of steps taken before giving up and
    ``last_error`` the error norm at that point.
    """

    def __init__(self, message: str, *, iterations: int, last_error: float) -> None:
        super().__init__(message)
        self.iterations = iterations
        self.last_error = last_error


class InfeasibleError(ConsensusException):
    """Raised when no radius satisfies a trade-off program's constraints.

    ``result`` holds the scanned frontier with ``feasible`` set to false.
    """

    def __init__(self, message: str, *, result: TradeoffResult) -> None:
        super().__init__(message)
        self.result = result
