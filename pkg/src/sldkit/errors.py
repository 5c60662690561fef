"""Exception hierarchy.

Two families matter to callers: :class:`ValidationError` for malformed or
out-of-range arguments, and :class:`NumericalDomainError` for inputs that are
well formed but sit outside the mathematical domain of a formula (rank
deficient states, pure modes in the generator form, divergent series).
The command-line front end maps them to exit codes 2 and 3.
"""


class SldError(Exception):
    """Base class for all errors raised by this package."""


class ValidationError(SldError, ValueError):
    """Malformed input or an argument outside its documented range."""


class NumericalDomainError(SldError, ValueError):
    """Input lies outside the domain where the requested quantity is finite."""


class ConvergenceError(NumericalDomainError):
    pass


class NotFullRankError(NumericalDomainError):
    pass


class SeriesDivergentError(NumericalDomainError):
    pass


class UnphysicalCovarianceError(NumericalDomainError):
    pass


class PureModeError(NumericalDomainError):
    pass


class PurityBreakingError(NumericalDomainError):
    pass


class TruncationError(NumericalDomainError):
    pass


class BoundUndefinedError(NumericalDomainError):
    pass
