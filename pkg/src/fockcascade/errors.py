"""Exception types raised by fockcascade."""


class FockCascadeError(Exception):
    """Base class for all package errors."""


class AmplitudeTooLargeForCutoff(FockCascadeError, ValueError):
    """A coherent amplitude leaks more probability past the cutoff than allowed."""


class TooManyZerosForCutoff(FockCascadeError, ValueError):
    pass


class ZeroState(FockCascadeError, ValueError):
    pass


class VacuumOnly(FockCascadeError, ValueError):
    """The state is proportional to the vacuum and has no Q-function zeros."""


class NotAState(FockCascadeError, ValueError):
    """Matrix is not a density operator (Hermitian, positive, unit trace)."""


class InconsistentProbability(FockCascadeError, ValueError):
    """A measured joint probability exceeds the scheme efficiency."""


class DegeneratePhase(FockCascadeError, ValueError):
    pass


class NoConvergence(FockCascadeError, RuntimeError):
    """Root iteration hit its cap without meeting the residual bound.

    ``residuals`` holds the scaled residual of every root estimate.
    """

    def __init__(self, message, roots=None, residuals=None):
        super().__init__(message)
        self.roots = roots
        self.residuals = residuals


class DesignVerificationFailed(FockCascadeError, RuntimeError):
    def __init__(self, message, fidelity=None):
        super().__init__(message)
        self.fidelity = fidelity
