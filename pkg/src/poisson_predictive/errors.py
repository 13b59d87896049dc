"""Exception hierarchy shared by every layer of the package."""


class DomainError(ValueError):
    """An argument lies outside the mathematical domain of an operation."""


class ProprietyError(DomainError):
    """The prior would give an improper posterior (``beta_sum - alpha <= 0``)."""


class EvaluationError(ArithmeticError):
    """A summand or integrand produced a non-finite value."""

    def __init__(self, message, *, index=None):
        super().__init__(message)
        self.index = index


class IntegrationError(ArithmeticError):
    """Adaptive quadrature could not reach the requested tolerance.

    The best available estimate and its error estimate are kept so that
    callers can decide whether the partial result is still usable.
    """

    def __init__(self, message, *, estimate, error):
        super().__init__(f"{message} (estimate={estimate!r}, error={error!r})")
        self.estimate = estimate
        self.error = error


class GuardError(RuntimeError):
    """A computation was refused because it would exceed a resource guard."""
