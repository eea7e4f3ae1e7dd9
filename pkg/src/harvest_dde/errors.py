"""Exception hierarchy shared by the simulation, analysis and CLI layers."""


class HarvestDDEError(Exception):
    """Base class for all package errors."""


class InvalidDelay(HarvestDDEError):
    """theta(t) < 0, i.e. the lag map g(t) = t - theta(t) points into the future."""


class InvalidState(HarvestDDEError):
    """A negative population value was passed to the right-hand side."""


class NoPositiveEquilibrium(HarvestDDEError):
    pass


class PositivityLoss(HarvestDDEError):
    def __init__(self, t, value=None):
        self.t = float(t)
        self.value = None if value is None else float(value)
        msg = f"solution lost positivity at t={self.t:.17g}"
        if value is not None:
            msg += f" (N={self.value:.6g})"
        super().__init__(msg)


class OutOfRange(HarvestDDEError):
    pass


class PremiseViolation(HarvestDDEError):
    def __init__(self, message, failed=()):
        self.failed = list(failed)
        super().__init__(message)


class NotConverged(HarvestDDEError):
    def __init__(self, residual, iterations, trace=()):
        self.residual = float(residual)
        self.iterations = int(iterations)
        self.trace = list(trace)
        super().__init__(
            f"Picard iteration did not converge: residual={self.residual:.3e} "
            f"after {self.iterations} iterations"
        )


class ConfigError(HarvestDDEError):
    def __init__(self, message, path=""):
        self.path = path
        super().__init__(f"{path}: {message}" if path else message)
