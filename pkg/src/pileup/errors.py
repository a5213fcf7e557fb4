"""Exception types raised by the pile-up solvers."""


class PileupError(Exception):
    """Base class for all errors raised by this package."""


class SingularArgumentError(PileupError, ValueError):
    """A kernel was evaluated at zero separation."""


class KernelDomainError(PileupError, ValueError):
    """An effective-sum kernel was evaluated at a non-positive spacing."""


class SingularConfigurationError(PileupError, ValueError):
    """Two walls coincide or the ordering 0 < x_1 < ... < x_n is broken."""


class ContractError(PileupError, ValueError):
    """Arguments are individually valid but inconsistent with each other."""


class InadmissibleParametersError(PileupError, ValueError):
    """Parameters give a non-positive supercritical length scale."""


class NoClosedFormError(PileupError):
    """The regime has no explicit pile-up length; solve numerically instead."""


class UnsupportedRegimeError(PileupError, ValueError):
    """No internal-stress closure exists for the requested regime."""


class DensityDomainError(PileupError, ValueError):
    """A density field violates the positivity a closure needs."""


class ConvergenceError(PileupError):
    """An iterative solver stopped before reaching its tolerance.

    Attributes
    ----------
    best : object
        Best iterate found (a WallConfiguration for the discrete solvers).
    residual_norm : float
        Max-norm of the residual at ``best``.
    iterations : int
    stage : str
        Which solver produced the failure.
    """

    def __init__(self, message, best=None, residual_norm=float("nan"),
                 iterations=0, stage=""):
        super().__init__(message)
        self.best = best
        self.residual_norm = residual_norm
        self.iterations = iterations
        self.stage = stage


class SolverFailure(PileupError):
    """A continuum solver could not produce an admissible density."""

    def __init__(self, message, stage=""):
        super().__init__(message)
        self.stage = stage
