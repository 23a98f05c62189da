"""Constraints on run parameters.

This module defines the `Constraint` interface and its subclasses, which validate the
numeric and categorical parameters of the experiments (depths, iteration counts,
cutoffs, windows, output formats), together with `ParameterSet`, a mapping that
validates every assignment against a per-name schema.

Overview:
    Parameters arrive from the command line, from configuration objects, or from
    library callers. They are never coerced: an iteration count must be an `int`, a
    cutoff must be a real number, and `True` is not an integer here. A constraint
    checks the type first and then any semantic restriction (bounds, membership).

Validation:
    `validate()` returns the value unchanged if it satisfies the constraint and raises
    `ValidationError` otherwise. A constraint that cannot be built (for example bounds
    in the wrong order) raises `ConfigurationError`.

Intervals:
    `IntervalConstraint` accepts open or closed ends, so that conditions such as
    `epsilon > 0` or `0 < alpha <= 1` are expressed directly.

Implication:
    `implies(a, b)` decides whether every value satisfying `a` also satisfies `b`. The
    command line uses it to check that a requested window lies inside the parameter
    range `(0, 1]` before any work starts.
"""

import math
from abc import ABC, abstractmethod
from collections.abc import Iterator, Mapping, MutableMapping, Sequence
from typing import cast

from .exceptions import ConfigurationError, ValidationError

# -------------------------------------------------------------------------------------
#   Constraint
# -------------------------------------------------------------------------------------

type Number = int | float


def ensure_type[T](value: object, cls: type[T] | tuple[type, ...], expected: str) -> T:
    # bool is a subclass of int but never a valid count or bound
    if isinstance(value, bool) or not isinstance(value, cls):
        msg = f"Invalid value: expected {expected}, got {value!r}"
        raise ValidationError(msg)
    return cast("T", value)


class Constraint(ABC):
    """Represents a constraint that may be imposed on a parameter."""

    _is_parametrised = False

    @abstractmethod
    def validate(self, value: object) -> object:
        """Validate the given `value`, or raise a `ValidationError`.

        Args:
            value: The parameter to be validated.

        Returns:
            The original `value`, narrowed to the constraint's type.

        Raises:
            ValidationError: If the value violates the constraint.
        """

    def __str__(self) -> str:
        """Return a string representation of the constraint."""
        return self.__class__.__name__

    def __repr__(self) -> str:
        return str(self)


class NumericConstraint(Constraint):
    """Constrains a value to be a finite real number (an integer or float)."""

    def validate(self, value: object) -> Number:
        number: Number = ensure_type(value, (int, float), "a number")
        if isinstance(number, float) and not math.isfinite(number):
            msg = f"Invalid value: {number} is not finite"
            raise ValidationError(msg)
        return number


class IntConstraint(NumericConstraint):
    """Constrains a value to be an integer."""

    def validate(self, value: object) -> int:
        return ensure_type(value, int, "an integer")


class FloatConstraint(NumericConstraint):
    """Constrains a value to be a finite float."""

    def validate(self, value: object) -> float:
        number = ensure_type(value, float, "a float")
        return float(super().validate(number))


class IntervalConstraint(NumericConstraint):
    """Constrains a numeric value to lie in an interval.

    Either end may be open. With both ends closed this is the usual `[lower, upper]`.
    """

    _is_parametrised = True

    def __init__(
        self,
        lower: float,
        upper: float,
        *,
        lower_open: bool = False,
        upper_open: bool = False,
    ) -> None:
        try:
            self._lower = float(lower)
            self._upper = float(upper)
        except (TypeError, ValueError) as e:
            msg = f"Invalid bounds: expected float, got {lower!r}, {upper!r}"
            raise ConfigurationError(msg) from e
        if self._lower > self._upper:
            msg = f"Invalid bounds: {self._lower} > {self._upper}"
            raise ConfigurationError(msg)
        if self._lower == self._upper and (lower_open or upper_open):
            msg = f"Invalid bounds: empty interval at {self._lower}"
            raise ConfigurationError(msg)
        self._lower_open = lower_open
        self._upper_open = upper_open

    def __str__(self) -> str:
        left = "(" if self.lower_open else "["
        right = ")" if self.upper_open else "]"
        return f"{self.__class__.__name__}{left}{self.lower}, {self.upper}{right}"

    def contains(self, x: float) -> bool:
        above = self.lower < x if self.lower_open else self.lower <= x
        below = x < self.upper if self.upper_open else x <= self.upper
        return above and below

    def validate(self, value: object) -> Number:
        number = super().validate(value)
        if not self.contains(float(number)):
            msg = f"Invalid value: {number} lies outside {self.interval_text}"
            raise ValidationError(msg)
        return number

    @property
    def interval_text(self) -> str:
        left = "(" if self.lower_open else "["
        right = ")" if self.upper_open else "]"
        return f"{left}{self.lower}, {self.upper}{right}"

    @property
    def lower(self) -> float:
        return self._lower

    @property
    def upper(self) -> float:
        return self._upper

    @property
    def lower_open(self) -> bool:
        return self._lower_open

    @property
    def upper_open(self) -> bool:
        return self._upper_open


class BoundedIntConstraint(IntervalConstraint, IntConstraint):
    """Constrains a value to be an integer in a closed numeric interval.

    This combines the checks of `IntConstraint` and `IntervalConstraint`.
    """

    def validate(self, value: object) -> int:
        int_value = IntConstraint.validate(self, value)
        IntervalConstraint.validate(self, int_value)
        return int_value


class BoundedFloatConstraint(IntervalConstraint, FloatConstraint):
    """Constrains a value to be a float in a numeric interval."""

    def validate(self, value: object) -> float:
        float_value = FloatConstraint.validate(self, value)
        IntervalConstraint.validate(self, float_value)
        return float_value


class LiteralStrConstraint(Constraint):
    """Constrains a string to lie within a chosen set of possibilities."""

    _is_parametrised = True

    def __init__(self, literals: Sequence[str]) -> None:
        if not all(g and type(g) is str and g == g.strip() for g in literals):
            msg = f"Invalid literals: expected strings, got {literals!r}"
            raise ConfigurationError(msg)
        if len(literals) == 0:
            msg = "Invalid literals: cannot be empty"
            raise ConfigurationError(msg)
        self._literals = frozenset(literals)

    def __str__(self) -> str:
        return f"LiteralStrConstraint({self.literals_as_repr_string})"

    def validate(self, value: object) -> str:
        text: str = ensure_type(value, str, "a string")
        if text not in self.literals:
            msg = f"Invalid literal: {text} not in {{{self.literals_as_repr_string}}}"
            raise ValidationError(msg)
        return text

    @property
    def literals(self) -> frozenset[str]:
        return self._literals

    @property
    def literals_as_repr_string(self) -> str:
        return ", ".join([repr(s) for s in sorted(self.literals)])


class WindowConstraint(Constraint):
    """Constrains a pair `(a, b)` of reals to an ordered window inside a range."""

    _is_parametrised = True

    def __init__(self, admissible: IntervalConstraint) -> None:
        self._admissible = admissible

    def __str__(self) -> str:
        return f"WindowConstraint({self._admissible.interval_text})"

    def validate(self, value: object) -> tuple[float, float]:
        pair: tuple[object, ...] = ensure_type(value, tuple, "a pair of numbers")
        if len(pair) != 2:
            msg = f"Invalid window: expected two ends, got {pair!r}"
            raise ValidationError(msg)
        lo, hi = (float(NumericConstraint().validate(v)) for v in pair)
        if lo >= hi:
            msg = f"Invalid window: {lo} >= {hi}"
            raise ValidationError(msg)
        if not implies(IntervalConstraint(lo, hi), self._admissible):
            msg = (
                f"Invalid window: [{lo}, {hi}] not inside "
                f"{self._admissible.interval_text}"
            )
            raise ValidationError(msg)
        return (lo, hi)


# -------------------------------------------------------------------------------------
#   Constraint implication logic
# -------------------------------------------------------------------------------------


def _implies_for_intervals(a: IntervalConstraint, b: IntervalConstraint) -> bool:
    # An integer constraint implies a real one, never the reverse
    if isinstance(b, IntConstraint) and not isinstance(a, IntConstraint):
        return False
    if a.lower < b.lower or (a.lower == b.lower and b.lower_open and not a.lower_open):
        return False
    return not (
        a.upper > b.upper or (a.upper == b.upper and b.upper_open and not a.upper_open)
    )


def implies(a: Constraint, b: Constraint) -> bool:
    """Returns True if `a` implies `b`.

    If constraint `a` implies constraint `b` then every value satisfying `a` is
    guaranteed to also satisfy `b`. Unparametrised constraints are compared by class.
    """
    if not b._is_parametrised:  # noqa: SLF001
        return isinstance(a, type(b))
    if isinstance(a, IntervalConstraint) and isinstance(b, IntervalConstraint):
        return _implies_for_intervals(a, b)
    if isinstance(a, LiteralStrConstraint) and isinstance(b, LiteralStrConstraint):
        return a.literals <= b.literals
    return False


# -------------------------------------------------------------------------------------
#   Parameter Set
# -------------------------------------------------------------------------------------


class ParameterSet(MutableMapping[str, object]):
    """A dictionary of named parameters, each validated by its own constraint.

    Arguments:
        schema: Mapping from parameter name to the constraint it must satisfy.
        data: Optional initial values; each is validated on insertion.

    Raises:
        ConfigurationError: If the schema is malformed or a name is unknown.
        ValidationError: If a value fails validation.
    """

    def __init__(
        self,
        schema: Mapping[str, Constraint],
        data: Mapping[str, object] | None = None,
    ) -> None:
        for name, constraint in schema.items():
            if not isinstance(constraint, Constraint):
                msg = (
                    f"Invalid constraint for {name!r}: expected instance of "
                    f"Constraint, got {type(constraint)}"
                )
                raise ConfigurationError(msg)
        self._schema = dict(schema)
        self._data: dict[str, object] = {}
        if data is not None:
            self.update(data)

    def __setitem__(self, key: str, value: object) -> None:
        """Assign a value to the given name after validation.

        Raises:
            ConfigurationError: If `key` is not in the schema.
            ValidationError: If the value fails constraint validation.
        """
        if key not in self._schema:
            msg = f"Unknown parameter: {key!r}"
            raise ConfigurationError(msg)
        try:
            self._data[key] = self._schema[key].validate(value)
        except ValidationError as e:
            msg = f"Parameter {key!r}: {e}"
            raise ValidationError(msg) from e

    def __getitem__(self, key: str) -> object:
        return self._data[key]

    def __delitem__(self, key: str) -> None:
        del self._data[key]

    def __iter__(self) -> Iterator[str]:
        return iter(self._data)

    def __len__(self) -> int:
        return len(self._data)

    def __repr__(self) -> str:
        return f"{self.__class__.__name__}(data={self._data!r})"

    @property
    def schema(self) -> dict[str, Constraint]:
        return dict(self._schema)

    def manifest(self) -> str:
        """Return `name=value` pairs in schema order, for CSV manifest lines."""
        return " ".join(
            f"{name}={self._data[name]}" for name in self._schema if name in self._data
        )
