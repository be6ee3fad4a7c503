"""Exception hierarchy shared by the engines and the command line."""


class SqueezeError(Exception):
    """Base class for all package errors."""


class ParameterError(SqueezeError, ValueError):
    """Invalid physical or numerical input. ``field`` names the offending input."""

    def __init__(self, message, field=None):
        super().__init__(message)
        self.field = field


class CapacityError(SqueezeError, ValueError):
    pass


class DegeneratePolarizationError(SqueezeError, ValueError):
    pass


class IntegrationError(SqueezeError, RuntimeError):
    """An ODE integration or propagator failed to meet its error target."""

    def __init__(self, message, error_estimate=None):
        super().__init__(message)
        self.error_estimate = error_estimate


class FitError(SqueezeError, RuntimeError):
    pass


class ConvergenceError(SqueezeError, RuntimeError):
    pass
