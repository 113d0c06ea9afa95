"""Exception hierarchy shared by all modules."""


class BiastolError(Exception):
    """Base class for computation errors (CLI exit code 1)."""


class DomainError(BiastolError, ValueError):
    """An argument lies outside the domain of the function."""


class UnboundedQuantileError(DomainError):
    """Quantile requested at probability 1 of an unbounded distribution."""


class InfeasibleError(BiastolError):
    """The design cannot be satisfied at the given inputs (e.g. n too small)."""


class NoSolutionError(BiastolError):
    """A sample-size search hit its cap without reaching the target."""


class ConvergenceError(BiastolError):
    """An iterative routine did not converge within its iteration budget."""


class InsufficientDrawsError(BiastolError, ValueError):
    """Monte Carlo draw count too small for the requested resolution."""
