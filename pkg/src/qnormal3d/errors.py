"""Exception types shared across the package."""


class QNormalError(Exception):
    """Base class for all library-specific errors."""


class NonConvergence(QNormalError):
    """A truncated series, product or adaptive quadrature hit its cap
    before reaching the requested tolerance."""


class DomainError(QNormalError):
    """A point lies outside the support interval, or a parameter map is
    evaluated where it is undefined."""


class DegenerateRecurrence(QNormalError):
    """A three-term recurrence coefficient is singular for the given
    parameters."""


class DegenerateConditioning(QNormalError):
    """A conditional density denominator fell below the representable
    floor, so the conditional is numerically undefined."""


class InsufficientSamples(QNormalError):
    """Too few draws to form the requested Monte Carlo estimate."""
