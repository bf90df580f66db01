"""Exception and warning types shared across the package."""


class KGPinError(Exception):
    """Base class for all domain errors raised by kgpin."""


class SingularPointError(KGPinError):
    """Evaluation point lies on (or within guard distance of) a singular orbit."""


class NotCertifiedError(KGPinError):
    """A truncation tail certificate was requested outside its validity regime,
    or the adaptive summation could not reach the requested tolerance."""


class OverflowGuardError(KGPinError):
    """Result would overflow double precision (K_nu at tiny argument, large nu)."""


class IllConditionedWarning(UserWarning):
    """Regularized collocation system left a residual above the trust threshold."""


class QuadratureConvergenceWarning(UserWarning):
    """Panel doubling did not settle the boundary integral to the expected level."""


class RankDeficientWarning(UserWarning):
    """Least-squares fit matrix is rank deficient; coefficients not unique."""


class NonIntegerOrderWarning(UserWarning):
    """Fitted singularity-order slope is far from an integer (log singularity,
    n = 2, or an essential singularity)."""
