"""Exception types shared across modules."""


class NumericalError(RuntimeError):
    """A computation failed numerically (maps to CLI exit status 2)."""


class IntegrationError(NumericalError):
    pass


class SolverError(NumericalError):
    pass


class QuadratureError(NumericalError):
    def __init__(self, message, error_estimate=None):
        super().__init__(message)
        self.error_estimate = error_estimate
