"""Exception hierarchy shared by the numerical modules."""


class KorovkinError(Exception):
    """Base class for all package errors."""


class DomainError(KorovkinError, ValueError):
    """Argument outside the domain of an operation (negative or non-finite)."""


class NumericalError(KorovkinError, ArithmeticError):
    """A numerical procedure could not meet its accuracy contract."""


class TruncationError(NumericalError):
    """A series could not be truncated within ``max_terms``."""


class QuadratureError(NumericalError):
    """Adaptive quadrature failed to reach the requested tolerance."""


class ConfigError(KorovkinError, ValueError):
    """Malformed or inconsistent run configuration."""
