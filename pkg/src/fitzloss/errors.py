"""Exception hierarchy shared across the package."""


class FitzlossError(Exception):
    """Base class for every error raised by this package."""


class DomainError(FitzlossError, ValueError):
    """An input lies outside the mathematical domain of an operation."""


class DimensionError(DomainError):
    """Paired vectors or matrices have incompatible shapes."""


class InfeasibleTargetError(DomainError):
    """A target vector lies outside the domain of the loss generator.

    The mathematical convention assigns such points the value +inf; the
    library raises instead so that callers never see non-finite values.
    """


class UnsupportedDimensionError(DomainError):
    """A brute-force oracle was asked for a dimension it cannot afford."""


class NoRootError(FitzlossError):
    """A bracketing search never straddled a sign change."""


class ConvergenceError(FitzlossError):
    """An iterative solver ran out of iterations.

    ``best`` carries the best iterate seen so far.
    """

    def __init__(self, message, best=None):
        super().__init__(message)
        self.best = best


class LineSearchError(ConvergenceError):
    """The Wolfe line search could not find an acceptable step."""


class SolverError(FitzlossError):
    """An internal solve violated a proved guarantee; treat as a bug."""


class EvaluationError(FitzlossError):
    """A user-supplied callable produced a non-finite value."""


class ParseError(FitzlossError):
    """A dataset file could not be parsed; ``line_no`` is 1-based."""

    def __init__(self, message, line_no=None):
        if line_no is not None:
            message = f"line {line_no}: {message}"
        super().__init__(message)
        self.line_no = line_no


class SchemaError(FitzlossError):
    """Parsed data is inconsistent with the declared dimensions or splits."""
