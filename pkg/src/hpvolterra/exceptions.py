"""Exception hierarchy for the solver package."""


class VolterraError(Exception):
    """Base class for all package errors."""


class ParseError(VolterraError, ValueError):
    """Malformed decimal text."""

    def __init__(self, text, position, reason="unexpected character"):
        self.text = text
        self.position = position
        super().__init__(f"cannot parse {text!r}: {reason} at position {position}")


class ConfigurationError(VolterraError, ValueError):
    pass


class ShapeError(VolterraError, ValueError):
    pass


class ExtrapolationError(VolterraError, ValueError):
    pass


class PrecisionOverflowError(VolterraError, OverflowError):
    pass


class AccuracyError(VolterraError, ArithmeticError):
    """Quadrature failed to reach its target; carries the best estimate."""

    def __init__(self, message, estimate=None, error_estimate=None):
        super().__init__(message)
        self.estimate = estimate
        self.error_estimate = error_estimate
        # set by the solver when the failure happens mid-iteration
        self.trace = None


class SingularMatrixError(VolterraError, ArithmeticError):
    def __init__(self, message, column=None, iteration=None):
        super().__init__(message)
        self.column = column
        self.iteration = iteration
        self.trace = None


class DiagnosticsError(VolterraError, ValueError):
    pass
