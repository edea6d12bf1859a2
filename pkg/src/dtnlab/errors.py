"""Exception hierarchy shared by all dtnlab modules."""


class DtnLabError(Exception):
    """Base class for all dtnlab errors."""


class ContractViolationError(DtnLabError):
    """An argument violates a documented precondition (shapes, membership)."""


class ConfigError(DtnLabError):
    """Invalid configuration, coefficient specification or schedule.

    Carries a list of ``(path, message)`` pairs in :attr:`issues` when the
    error aggregates several findings.
    """

    def __init__(self, message, issues=None):
        super().__init__(message)
        self.issues = list(issues) if issues else []


class ExpressionError(ConfigError):
    """Syntax error in the coefficient expression mini-language.

    :attr:`column` is the 1-based position of the offending token.
    """

    def __init__(self, message, column):
        super().__init__(f"{message} (column {column})")
        self.column = column


class DegenerateSubspaceError(DtnLabError):
    """A basis is numerically rank deficient in the requested inner product."""


class NumericalFailureError(DtnLabError):
    """A computation produced results outside its certified tolerance."""


class NearSingularError(DtnLabError):
    """A linear system is singular at the working rank tolerance.

    The smallest/largest singular value estimates are attached so callers
    (in particular the graph machinery) can route around the failure.
    """

    def __init__(self, message, smallest_sv=None, largest_sv=None):
        super().__init__(message)
        self.smallest_sv = smallest_sv
        self.largest_sv = largest_sv


class KernelNotTrivialError(DtnLabError):
    """A non-coercive experiment hit a nontrivial interior kernel.

    The resolvent experiments require ``ker(m - D a G_int) = {0}``; when the
    kernel is nontrivial the Dirichlet-to-Neumann relation is multi-valued
    and the graph machinery (``dtnlab.graphs``) must be used instead.
    """


class GraphNotOperatorError(DtnLabError):
    """A resolvent was requested for a multi-valued linear graph."""
