"""Exception types raised by the solvers."""


class DomainError(ValueError):
    """An argument lies outside the domain of the operation."""


class InfeasibleError(RuntimeError):
    """A beamforming stage cannot meet its rate or SINR targets."""


class ConvergenceError(RuntimeError):
    """An iterative stage did not reach its tolerance."""


class SearchSpaceError(ValueError):
    """An exhaustive search would exceed the enumeration budget."""
