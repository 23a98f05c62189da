"""Custom exceptions for the alphamatch package."""

from collections.abc import Mapping
from fractions import Fraction


class AlphaMatchError(Exception):
    """Base class for all exceptions raised by the alphamatch package."""


# -------------------------------------------------------------------------------------
#   Parameters
# -------------------------------------------------------------------------------------


class ValidationError(AlphaMatchError):
    """Raised when a parameter fails validation.

    Typically indicates that the parameter has the wrong type or violates a constraint.
    """


class ConfigurationError(AlphaMatchError):
    """Raised when an instance is misconfigured.

    For example, an interval constraint with a lower bound greater than the upper bound,
    or an unknown parameter name passed to a `ParameterSet`.
    """


class ImplicitConversionError(TypeError, AlphaMatchError):
    """Raised when an exact number is used where a truth value is expected.

    For example, `if x:` on a `QuadSurd` instead of `if x != 0:`.
    """

    def __init__(self) -> None:
        super().__init__(
            "Implicit truth testing not permitted. Compare against 0 explicitly.",
        )


# -------------------------------------------------------------------------------------
#   Exact arithmetic
# -------------------------------------------------------------------------------------


class MixedRadicandError(AlphaMatchError):
    """Raised when a field operation combines surds from different quadratic fields."""


class DivisionByZeroError(ZeroDivisionError, AlphaMatchError):
    """Raised when inverting the zero surd."""

    def __init__(self) -> None:
        super().__init__("Division by zero surd")


class PoleAtInputError(AlphaMatchError):
    """Raised when a Möbius map is evaluated at its pole."""


class NegativeDiscriminantError(AlphaMatchError):
    """Raised when a quadratic has no real roots."""


class DegenerateLinearError(AlphaMatchError):
    """Raised when the leading coefficient of a quadratic vanishes.

    Attributes:
        root: The single rational root of the remaining linear equation, or `None` if
            the equation is constant.
    """

    def __init__(self, msg: str, root: Fraction | None) -> None:
        super().__init__(msg)
        self.root = root


class SurdFormatError(ValueError, AlphaMatchError):
    """Raised when a string cannot be parsed as a quadratic surd."""


# -------------------------------------------------------------------------------------
#   Continued fractions and dynamics
# -------------------------------------------------------------------------------------


class InvalidStringError(AlphaMatchError):
    """Raised when a string of partial quotients is malformed."""


class EmptyIntervalError(AlphaMatchError):
    """Raised when an interval has its lower end above its upper end."""


class PointIntervalError(AlphaMatchError):
    """Raised when an open interval is required but both ends coincide."""


class OutOfDomainError(AlphaMatchError):
    """Raised when a point lies outside the domain `[alpha - 1, alpha]` of the map."""


class OrbitHitZeroError(AlphaMatchError):
    """Raised when an exact orbit reaches 0 before the requested step."""


# -------------------------------------------------------------------------------------
#   Matching
# -------------------------------------------------------------------------------------


class EmptyCylinderError(AlphaMatchError):
    """Raised when no parameter realises a prescribed coding."""


class QuotientBelowTwoError(AlphaMatchError):
    """Raised when the star transform receives a partial quotient smaller than 2."""


class VerificationFailedError(AlphaMatchError):
    """Raised when exact verification of a matching interval fails.

    Attributes:
        certificate: Data sufficient to reproduce the failure.
    """

    def __init__(
        self,
        msg: str,
        certificate: Mapping[str, object] | None = None,
    ) -> None:
        super().__init__(msg)
        self.certificate: dict[str, object] = dict(certificate or {})


class ConjectureCounterexampleError(VerificationFailedError):
    """Raised when the interval of a gap's pseudocenter is not a matching interval."""


# -------------------------------------------------------------------------------------
#   Entropy
# -------------------------------------------------------------------------------------


class IllConditionedError(AlphaMatchError):
    """Raised when a density fit is unreliable, e.g. the window spans a jump."""


class OutsideMatchingIntervalError(AlphaMatchError):
    """Raised when an extrapolation is requested outside its matching interval."""
