"""Exception types shared across the package.

Everything derives from NelsonLabError so callers can catch broadly; the
subclasses mirror the failure modes named in the module contracts (bad shell
geometry, budget overruns, solver non-convergence, ...).
"""


class NelsonLabError(Exception):
    pass


class ConfigError(NelsonLabError, ValueError):
    """Malformed or inconsistent configuration input."""


class InvalidShellError(ConfigError):
    """Momentum shell bounds violate 0 < sigma < kappa."""


class BudgetError(ConfigError):
    """Requested basis dimension exceeds the allowed budget."""


class WindowError(ConfigError):
    """Interaction window does not fit inside the grid shell."""


class VelocityDomainError(ConfigError):
    """A velocity argument leaves the open unit ball."""


class GeometryError(ConfigError):
    """Indicator geometry degenerate (ramp at least as wide as the support)."""


class SamplingError(ConfigError):
    """Too few or ill-arranged sample points for the requested stencil."""


class ContractError(NelsonLabError, TypeError):
    """An operator argument does not satisfy a required structural flag."""


class DegeneracyError(NelsonLabError, RuntimeError):
    """Quantity undefined on a degenerate ground level."""


class IterationError(NelsonLabError, RuntimeError):
    """Iterative solver exhausted its budget before reaching tolerance."""

    def __init__(self, message, best=None):
        super().__init__(message)
        self.best = best


class ConditioningError(NelsonLabError, RuntimeError):
    """Linear solve too ill-conditioned to certify the requested residual."""


class DivergenceError(NelsonLabError, RuntimeError):
    """Series terms stopped decreasing; expansion is outside its domain."""


class TruncationError(NelsonLabError, RuntimeError):
    """Occupation truncation visibly corrupted a series evaluation."""


class PhaseUndefinedError(NelsonLabError, RuntimeError):
    """Vacuum overlap too small to define a canonical phase."""


class AccuracyError(NelsonLabError, RuntimeError):
    """Adaptive quadrature could not certify the requested accuracy."""

    def __init__(self, message, achieved=None):
        super().__init__(message)
        self.achieved = achieved
