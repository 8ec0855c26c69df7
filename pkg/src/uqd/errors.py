"""Exception hierarchy shared by all uqd modules.

Two branches matter to callers: :class:`ValidationError` for inputs that
violate a documented precondition (CLI exit code 2) and
:class:`NumericalError` for computations that fail on admissible inputs
(CLI exit code 3).
"""


class UqdError(Exception):
    """Base class for all errors raised by this package."""

    exit_code = 1


class ValidationError(UqdError):
    """An input violates a documented precondition."""

    exit_code = 2


class NumericalError(UqdError):
    """A computation failed on inputs that passed validation."""

    exit_code = 3


class NotSymmetric(ValidationError):
    """Matrix expected to be symmetric is not, beyond tolerance."""


class DimensionMismatch(ValidationError):
    """Operand shapes do not conform."""


class OutOfRange(ValidationError):
    """Scalar argument outside its admissible interval."""


class InvalidParameter(ValidationError):
    """Parameter vector outside the family's valid region."""


class InvalidSample(ValidationError):
    """Observation set violates the family's data constraints."""


class InvalidDistribution(ValidationError):
    """Probability vector is not normalizable within tolerance."""


class SchemaMismatch(ValidationError):
    """Input file does not match the expected column schema."""


class NonFiniteValue(ValidationError):
    """Input file contains a NaN or infinite value."""


class NotPositiveDefinite(NumericalError):
    """Factorization failed even after the jitter schedule."""


class NonFiniteEvaluation(NumericalError):
    """A function evaluation returned NaN or infinity where a finite
    value is required."""


class DegenerateData(NumericalError):
    """The maximum-likelihood estimate lies on the parameter boundary."""


class SingularInformation(NumericalError):
    """Information matrix is not invertible; no confidence region."""


class DegenerateGrid(NumericalError):
    """All predictive mass fell into a single outcome cell."""


class SamplerDiverged(NumericalError):
    """MCMC acceptance rate collapsed below the viability floor."""


class DegenerateResample(NumericalError):
    """Bootstrap resampling repeatedly produced unusable draws."""
