"""Exception types shared across the simulator."""


class ScenarioError(ValueError):
    """A scenario file is malformed, has unknown keys, or violates an invariant."""


class EigenConvergenceError(RuntimeError):
    """The dominant-eigenpair iteration did not reach its residual tolerance."""

    def __init__(self, message: str, residual: float):
        super().__init__(message)
        self.residual = residual


class CapacityError(ValueError):
    """An exhaustive enumeration would be too large to run."""


class UndefinedRatioError(ValueError):
    """A ratio metric was requested with a zero denominator."""


class FeasibilityError(ValueError):
    """A beam allocation violates a power or selection constraint."""
