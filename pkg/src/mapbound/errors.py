"""Exception hierarchy shared across the package.

The CLI maps these onto exit codes: ParameterError/DomainError -> 2 (usage),
every NumericalError subclass -> 3.
"""


class MapboundError(Exception):
    pass


class DomainError(MapboundError, ValueError):
    """Argument outside the mathematical domain of a function."""


class ParameterError(MapboundError, ValueError):
    """Invalid model/experiment parameters (sizes, lengths, empty sets)."""


class BudgetError(ParameterError):
    """Exhaustive search requested beyond its enumeration budget."""


class NumericalError(MapboundError, ArithmeticError):
    pass


class EvaluationError(NumericalError):
    """An integrand or objective returned a non-finite value."""


class InfeasibleParametersError(NumericalError):
    """A root that should exist was not bracketed by the scan."""


class DegenerateTangencyError(NumericalError):
    """Even number of sign changes: a double root sits on the scan grid."""


class ConvergenceError(NumericalError):
    """Iterative solver hit its cap or diverged.

    ``state`` carries the last iterate so callers can inspect it.
    """

    def __init__(self, message, state=None, iterations=None):
        super().__init__(message)
        self.state = state
        self.iterations = iterations
