"""Exception hierarchy shared by all modules."""


class MeixnerError(Exception):
    """Base class for every error raised by this package."""


class DomainError(MeixnerError, ValueError):
    """An argument lies outside the domain of the operation."""


class PoleError(DomainError):
    """Evaluation at a pole of the gamma function."""


class BranchError(DomainError):
    """A continuation argument leaves the strip where the principal branch is valid."""


class IncompatibleParams(DomainError):
    """Two parameter sets cannot be combined."""


class InfeasibleMoments(DomainError):
    """Moments that no Meixner law can reproduce."""


class MomentExplosion(DomainError):
    """The exponential moment needed by the martingale restriction is infinite."""


class SingularCombination(DomainError):
    """A combined Levy-measure integrand is not integrable at the origin."""


class NumericalError(MeixnerError, ArithmeticError):
    """Base class for failures of a numerical procedure."""


class NonFiniteIntegrand(NumericalError):
    """An integrand returned NaN or an infinity at an interior node."""


class ConvergenceFailure(NumericalError):
    """A numerical procedure did not reach its tolerance."""


class DivergenceDetected(NumericalError):
    """Partial sums of an integral grow without bound."""
