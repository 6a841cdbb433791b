"""Exception hierarchy shared by every module of the package."""


class SimlayerError(Exception):
    """Base class for all errors raised by simlayer."""


class InvalidParameter(SimlayerError, ValueError):
    """A parameter violates a documented precondition."""


class DomainError(SimlayerError, ValueError):
    """A predicate was asked about data outside its theorem's hypotheses."""


class ParseError(SimlayerError, ValueError):
    """Syntax error in a g-expression; ``position`` is a 0-based offset."""

    def __init__(self, position: int, message: str):
        self.position = position
        self.message = message
        super().__init__(f"at position {position}: {message}")


class EvaluationError(SimlayerError, ArithmeticError):
    """g could not be evaluated (division by zero in an expression)."""


class StepUnderflow(SimlayerError, RuntimeError):
    """The step-size controller asked for a step below ``h_min``."""

    def __init__(self, message: str, trajectory=None):
        super().__init__(message)
        self.trajectory = trajectory


class SolveError(SimlayerError, RuntimeError):
    """Base class for shooting failures; carries optional diagnostics."""

    def __init__(self, message: str, **diagnostics):
        super().__init__(message)
        self.diagnostics = diagnostics


class HypothesisError(SolveError):
    """The problem does not satisfy the existence theorem's hypotheses."""


class BracketFailure(SolveError):
    """No (TypeA, TypeB) pair of shots could be established."""


class ConvergenceFailure(SolveError):
    """Bisection ran out of iterations."""


class StripExitAtMidpoint(SolveError):
    """The final midpoint shot left the strip instead of staying in it."""
