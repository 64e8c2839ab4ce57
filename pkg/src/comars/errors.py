"""Exception hierarchy shared by all comars modules.

Every failure mode of the library maps to one of these classes so that the
service layer and the CLI can translate them into HTTP errors and exit codes
by name alone.
"""


class ComarsError(Exception):
    """Base class for all errors raised by this package."""


class ValidationError(ComarsError):
    """A design or argument violates a structural requirement."""


class NonOrthogonalColumns(ValidationError):
    """Two columns of a conference design have a nonzero inner product."""


class BadZeroPattern(ValidationError):
    """Wrong number of zeros in a column, or more than one zero in a row."""


class OddRunCount(ValidationError):
    """Conference designs need an even number of runs."""


class TooFewFactors(ValidationError):
    """Fewer than five factors; the aliasing formulas assume at least five."""


class NotPrime(ValidationError):
    """The Paley construction needs an odd prime."""


class NoneFound(ComarsError):
    """Exhaustive search finished without finding any design."""


class ParseError(ComarsError):
    """A CSV file contains tokens that are not -1/0/1 integers, or ragged rows."""


class DimensionMismatch(ValidationError):
    """Operands have incompatible shapes."""


class FactorMismatch(ValidationError):
    """Two designs being compared have different factor counts."""


class ZeroVariance(ValidationError):
    """A model-matrix column is constant, so its correlations are undefined."""


class UnexpectedCorrelationValue(ComarsError):
    """An observed correlation is outside the theoretical value set.

    For a properly constructed concatenated design this signals a
    construction bug, not bad input.
    """


class SingularInformation(ComarsError):
    """The information matrix of the quadratic model is singular."""
