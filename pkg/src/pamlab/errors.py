"""Exception types shared across the package."""


class PamlabError(Exception):
    """Base class for all package errors."""


class DistributionalKernel(PamlabError):
    """The kernel is a distribution (white noise) and has no pointwise value."""


class SingularPoint(PamlabError):
    """Kernel or transform evaluated at a point where it is singular."""


class QuadratureFailure(PamlabError):
    """Adaptive quadrature did not reach the requested relative tolerance."""


class NonPositiveSpectrum(PamlabError):
    """Discretized spectral density went negative (kernel bug)."""


class DomainTooSmall(PamlabError):
    """The dilated lattice does not fit inside the sampled box."""


class UnclassifiableSequence(PamlabError):
    """Sequence limits match none of the regime assumptions."""


class NoConvergence(PamlabError):
    """Iterative solver hit its iteration cap before reaching tolerance."""

    def __init__(self, iterations, residual):
        self.iterations = iterations
        self.residual = residual
        super().__init__(f"no convergence after {iterations} iterations (residual {residual:.3e})")


class NegativeObjectiveStall(PamlabError):
    """Mollified subcritical optimum came out nonpositive; box too small for the maximizer."""


class NegativeInput(PamlabError):
    """Rearrangement requires a nonnegative field."""


class NonPSD(PamlabError):
    """Finite-difference Hessian is not positive semidefinite."""


class EigensolveFailure(PamlabError):
    """Sparse symmetric eigensolver failed to converge."""


class TruncationDominates(PamlabError):
    """Spectral truncation bound exceeds 1% of the result norm."""


class StabilityViolation(PamlabError):
    """Explicit time step exceeds the stability bound."""


class SingularQuadratureDisabled(PamlabError):
    """c=0 interaction requested with singular grid quadrature disabled."""


class InsufficientBudget(PamlabError):
    """Monte-Carlo error too large to resolve the scanned gaps."""


class ConfigError(PamlabError):
    """Invalid experiment configuration; message names the offending field."""
