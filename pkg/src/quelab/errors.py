"""Exception types shared across the package."""


class QuelabError(Exception):
    """Base class for all package errors."""


class UnsupportedField(QuelabError):
    pass


class DimensionMismatch(QuelabError):
    pass


class RegionTooLarge(QuelabError):
    pass


class DomainError(QuelabError):
    pass


class DivergentIntegral(QuelabError):
    pass


class Underflow(QuelabError):
    pass


class NotConvergent(QuelabError):
    pass


class PoleAtS1(QuelabError):
    pass


class PoleOnPath(QuelabError):
    pass


class SupportTooWide(QuelabError):
    pass


class AbscissaViolation(QuelabError):
    pass


class InsufficientPrecision(QuelabError):
    pass


class TailNotBounded(QuelabError):
    pass


class QuadratureBudgetExceeded(QuelabError):
    pass


class ZeroOnContour(QuelabError):
    pass


class HZero(QuelabError):
    pass


class NotCoprime(QuelabError):
    pass


class ConfigInvalid(QuelabError):
    pass


class PrecisionLossWarning(UserWarning):
    """Emitted when a Bessel evaluation leaves the validated envelope."""
