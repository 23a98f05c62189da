"""Regular continued fractions of rationals and quadratic surds.

This module converts between exact numbers in `[0, 1)` and their regular continued
fraction expansions `[0; a1, a2, ...]`, and builds the objects the matching tree is
made of: strings of partial quotients, their conjugates, the interval `I_r` attached
to a rational `r`, and pseudocenters of intervals.

Expansions:
    A `PeriodicCF` is an optional preperiod followed by a period repeated forever. A
    rational has a finite expansion, stored as a preperiod with an empty period. By
    Lagrange's theorem every quadratic surd has an eventually periodic expansion;
    `cf_expand` detects the period exactly, by the first repetition of the remainder.

Labels:
    A `CFString` is a nonempty finite string of partial quotients. A rational in
    `(0, 1)` has two of them, `{a1, ..., am, 1}` and `{a1, ..., am + 1}`, which are
    conjugate to each other. The two purely periodic numbers `[0; period S]` and
    `[0; period S']` are the endpoints of `I_r`. Labels are kept as written, even when
    the period they spell is not minimal (`{1, 1}` and `{1}` have the same periodic
    value); canonical forms are only taken for comparisons.

Ordering:
    Two expansions are compared by the alternating rule: at the first position where
    the quotients differ, a larger quotient at an odd position gives a smaller value
    and at an even position a larger one. The number 0 is treated as the expansion
    whose first quotient is infinite.

Text formats:
    Labels print as `2,1,1`; periodic expansions print as `[0;3,(1)^inf]`.
"""

import math
from collections.abc import Iterator, Sequence
from dataclasses import dataclass
from fractions import Fraction

import mpmath

from .exactnum import (
    IntMatrix2,
    QuadSurd,
    mobius_apply,
    quadratic_roots,
    rational_between,
    to_surd,
)
from .exceptions import (
    EmptyIntervalError,
    InvalidStringError,
    PointIntervalError,
    ValidationError,
)

type Exact = QuadSurd | Fraction | int

INFINITY = math.inf

# -------------------------------------------------------------------------------------
#   Strings of partial quotients
# -------------------------------------------------------------------------------------


@dataclass(frozen=True, slots=True)
class CFString:
    """A nonempty finite string of positive partial quotients."""

    quotients: tuple[int, ...]

    def __post_init__(self) -> None:
        if len(self.quotients) == 0:
            msg = "Invalid string: cannot be empty"
            raise InvalidStringError(msg)
        for a in self.quotients:
            if type(a) is not int or a < 1:
                msg = f"Invalid string: quotient {a!r} in {self.quotients!r}"
                raise InvalidStringError(msg)

    @classmethod
    def of(cls, *quotients: int) -> "CFString":
        return cls(tuple(quotients))

    @classmethod
    def parse(cls, text: str) -> "CFString":
        try:
            quotients = tuple(int(part) for part in text.replace(" ", "").split(","))
        except ValueError as e:
            msg = f"Invalid string: {text!r}"
            raise InvalidStringError(msg) from e
        return cls(quotients)

    def __len__(self) -> int:
        return len(self.quotients)

    def __iter__(self) -> Iterator[int]:
        return iter(self.quotients)

    def __getitem__(self, index: int) -> int:
        return self.quotients[index]

    def __add__(self, other: "CFString") -> "CFString":
        return CFString(self.quotients + other.quotients)

    def __str__(self) -> str:
        return ",".join(str(a) for a in self.quotients)

    @property
    def value(self) -> Fraction:
        """The rational `[0; a1, ..., am]`."""
        return finite_value(self.quotients)

    @property
    def periodic(self) -> "PeriodicCF":
        """The purely periodic expansion `[0; period a1, ..., am]`."""
        return PeriodicCF((), self.quotients)


def finite_value(quotients: Sequence[int]) -> Fraction:
    """Return `[0; a1, ..., am]`, or 0 for the empty string."""
    value = Fraction(0)
    for a in reversed(quotients):
        value = 1 / (a + value)
    return value


def conjugate_string(s: CFString) -> CFString:
    """Return the other expansion of the rational `[0; s]`.

    `{a1, ..., am, 1}` and `{a1, ..., am + 1}` are exchanged.

    Raises:
        InvalidStringError: For `{1}`, whose value 1 has no second expansion in this
            form.
    """
    quotients = s.quotients
    if quotients[-1] == 1:
        if len(quotients) == 1:
            msg = "Invalid string: {1} has no conjugate"
            raise InvalidStringError(msg)
        return CFString((*quotients[:-2], quotients[-2] + 1))
    return CFString((*quotients[:-1], quotients[-1] - 1, 1))


def standard_expansion(r: Fraction) -> CFString:
    """Return the expansion of `0 < r < 1` whose last quotient is at least 2."""
    if not 0 < r < 1:
        msg = f"Invalid rational: {r} not in (0, 1)"
        raise ValidationError(msg)
    quotients: list[int] = []
    x = r
    while x != 0:
        inverse = 1 / x
        a = math.floor(inverse)
        quotients.append(a)
        x = inverse - a
    return CFString(tuple(quotients))


# -------------------------------------------------------------------------------------
#   Periodic expansions
# -------------------------------------------------------------------------------------


def _minimal_period(period: tuple[int, ...]) -> tuple[int, ...]:
    n = len(period)
    for length in range(1, n + 1):
        if n % length == 0 and period[:length] * (n // length) == period:
            return period[:length]
    return period


@dataclass(frozen=True, slots=True)
class PeriodicCF:
    """The expansion `[0; preperiod, period, period, ...]`.

    An empty period denotes the finite expansion `[0; preperiod]`.
    """

    preperiod: tuple[int, ...]
    period: tuple[int, ...]

    def __post_init__(self) -> None:
        for a in (*self.preperiod, *self.period):
            if type(a) is not int or a < 1:
                msg = f"Invalid expansion: quotient {a!r}"
                raise InvalidStringError(msg)

    @property
    def is_finite(self) -> bool:
        return len(self.period) == 0

    def canonical(self) -> "PeriodicCF":
        """Return the expansion with minimal period and shortest preperiod."""
        pre = list(self.preperiod)
        if self.is_finite:
            if len(pre) >= 2 and pre[-1] == 1:
                pre = [*pre[:-2], pre[-2] + 1]
            return PeriodicCF(tuple(pre), ())
        period = _minimal_period(self.period)
        while pre and pre[-1] == period[-1]:
            period = (pre.pop(), *period[:-1])
        return PeriodicCF(tuple(pre), period)

    def quotients(self) -> Iterator[int]:
        """Yield the partial quotients `a1, a2, ...` (finitely many if finite)."""
        yield from self.preperiod
        while self.period:
            yield from self.period

    def prefix(self, n: int) -> tuple[int, ...]:
        stream = self.quotients()
        return tuple(a for _, a in zip(range(n), stream, strict=False))

    def __str__(self) -> str:
        parts = [str(a) for a in self.preperiod]
        if self.period:
            parts.append("(" + ",".join(str(a) for a in self.period) + ")^inf")
        return "[0;" + ",".join(parts) + "]"


def _quotient_at(stream: Iterator[int]) -> float:
    # an exhausted expansion continues with an infinite quotient
    return next(stream, INFINITY)


def compare_expansions(x: PeriodicCF | None, y: PeriodicCF | None) -> int:
    """Compare two expansions by value; `None` stands for the number 0.

    Returns:
        -1, 0 or 1 as `x` is below, equal to or above `y`.
    """
    if x is not None:
        x = x.canonical()
    if y is not None:
        y = y.canonical()
    xs = x.quotients() if x is not None else iter(())
    ys = y.quotients() if y is not None else iter(())
    # distinct eventually periodic sequences differ within this many terms
    bound = 2
    for e in (x, y):
        if e is not None:
            bound += len(e.preperiod) + len(e.period)
    for position in range(1, 2 * bound + 1):
        a, b = _quotient_at(xs), _quotient_at(ys)
        if a == b == INFINITY:
            return 0
        if a != b:
            larger_first = 1 if a > b else -1
            return -larger_first if position % 2 == 1 else larger_first
    return 0


def pseudocenter_of_expansions(lo: PeriodicCF | None, hi: PeriodicCF) -> Fraction:
    """Return the rational of least denominator between two expansions.

    With `S` the common prefix and `a` the smaller of the first differing quotients,
    the result is `[0; S, a + 1]`. `lo = None` stands for 0.

    Raises:
        EmptyIntervalError: If `lo` lies above `hi`.
        PointIntervalError: If both denote the same number.
    """
    order = compare_expansions(lo, hi)
    if order > 0:
        msg = f"Empty interval: {lo} > {hi}"
        raise EmptyIntervalError(msg)
    if order == 0:
        msg = f"Point interval: {lo} == {hi}"
        raise PointIntervalError(msg)
    xs = lo.canonical().quotients() if lo is not None else iter(())
    ys = hi.canonical().quotients()
    prefix: list[int] = []
    while True:
        a, b = _quotient_at(xs), _quotient_at(ys)
        if a != b:
            return finite_value([*prefix, int(min(a, b)) + 1])
        prefix.append(int(a))


# -------------------------------------------------------------------------------------
#   Expansion and evaluation
# -------------------------------------------------------------------------------------


def _period_matrix(quotients: Sequence[int]) -> IntMatrix2:
    m = IntMatrix2.identity()
    for a in quotients:
        m = m @ IntMatrix2(0, 1, 1, a)
    return m


def cf_value(c: PeriodicCF) -> QuadSurd:
    """Return the exact value of an expansion."""
    if c.is_finite:
        return QuadSurd.from_rational(finite_value(c.preperiod))
    m = _period_matrix(c.period)
    # y = m(y) <=> c*y^2 + (d - a)*y - b = 0, with exactly one positive root
    tail = quadratic_roots(m.c, m.d - m.a, -m.b)[1]
    return mobius_apply(_period_matrix(c.preperiod), tail)


def cf_expand(x: Exact) -> PeriodicCF:
    """Return the expansion of `0 <= x < 1`, with exact period detection."""
    y: QuadSurd | Fraction
    y = Fraction(x) if isinstance(x, int | Fraction) else x
    if isinstance(y, QuadSurd) and y.is_rational:
        y = y.as_fraction
    if not 0 <= y < 1:
        msg = f"Invalid value: {y} not in [0, 1)"
        raise ValidationError(msg)
    seen: dict[QuadSurd | Fraction, int] = {}
    quotients: list[int] = []
    while y != 0:
        if y in seen:
            start = seen[y]
            return PeriodicCF(tuple(quotients[:start]), tuple(quotients[start:]))
        seen[y] = len(quotients)
        inverse = 1 / y
        a = math.floor(inverse)
        quotients.append(a)
        y = inverse - a
    return PeriodicCF(tuple(quotients), ())


# -------------------------------------------------------------------------------------
#   Intervals
# -------------------------------------------------------------------------------------


@dataclass(frozen=True, slots=True)
class Interval:
    """An interval with exact endpoints; ends are open unless flagged closed."""

    lo: QuadSurd
    hi: QuadSurd
    lo_closed: bool = False
    hi_closed: bool = False

    def __post_init__(self) -> None:
        if self.lo > self.hi:
            msg = f"Empty interval: {self.lo} > {self.hi}"
            raise EmptyIntervalError(msg)

    @classmethod
    def of(
        cls,
        lo: Exact,
        hi: Exact,
        *,
        lo_closed: bool = False,
        hi_closed: bool = False,
    ) -> "Interval":
        return cls(to_surd(lo), to_surd(hi), lo_closed, hi_closed)

    @property
    def is_point(self) -> bool:
        return self.lo == self.hi

    def contains(self, x: Exact) -> bool:
        above = self.lo <= x if self.lo_closed else self.lo < x
        below = x <= self.hi if self.hi_closed else x < self.hi
        return above and below

    def contains_interval(self, other: "Interval") -> bool:
        return self.lo <= other.lo and other.hi <= self.hi

    def intersect(self, other: "Interval") -> "Interval | None":
        lo, lo_closed = self.lo, self.lo_closed
        if other.lo > lo or (other.lo == lo and not other.lo_closed):
            lo, lo_closed = other.lo, other.lo_closed
        hi, hi_closed = self.hi, self.hi_closed
        if other.hi < hi or (other.hi == hi and not other.hi_closed):
            hi, hi_closed = other.hi, other.hi_closed
        if lo > hi or (lo == hi and not (lo_closed and hi_closed)):
            return None
        return Interval(lo, hi, lo_closed, hi_closed)

    def length_bounds(self, bits: int) -> tuple[Fraction, Fraction]:
        """Rational bounds on the length, from enclosures of both ends."""
        lo_lo, lo_hi = self.lo.enclosure(bits)
        hi_lo, hi_hi = self.hi.enclosure(bits)
        return (max(hi_lo - lo_hi, Fraction(0)), hi_hi - lo_lo)

    def length_mpf(self, digits: int = 20) -> mpmath.mpf:
        """The length as an `mpmath` number with `digits` correct significant digits."""
        if self.is_point:
            return mpmath.mpf(0)
        bits = 128
        while True:
            lower, upper = self.length_bounds(bits)
            if lower > 0 and (upper - lower) * 10**digits <= lower:
                with mpmath.workdps(digits + 10):
                    return mpmath.mpf(lower.numerator) / lower.denominator
            bits *= 2

    @property
    def midpoint_float(self) -> float:
        return (self.lo.to_float + self.hi.to_float) / 2

    def interior_rational(self, min_bits: int = 0) -> Fraction:
        """Return a rational strictly inside the interval."""
        if self.is_point:
            msg = f"Point interval: {self.lo}"
            raise PointIntervalError(msg)
        return rational_between(self.lo, self.hi, min_bits)

    def __str__(self) -> str:
        left = "[" if self.lo_closed else "("
        right = "]" if self.hi_closed else ")"
        return f"{left}{self.lo}, {self.hi}{right}"


def pseudocenter(j: Interval) -> Fraction:
    """Return the rational of least denominator inside the open interval `j`.

    Works on exact endpoints by the descent `x -> 1/(x - floor(x))`; for endpoints
    given by expansions this agrees with `pseudocenter_of_expansions`.

    Raises:
        EmptyIntervalError: If `j.lo > j.hi`.
        PointIntervalError: If `j.lo == j.hi`.
    """
    lo: QuadSurd = j.lo
    hi: QuadSurd = j.hi
    if lo > hi:
        msg = f"Empty interval: {j}"
        raise EmptyIntervalError(msg)
    if lo == hi:
        msg = f"Point interval: {j}"
        raise PointIntervalError(msg)
    quotients: list[int] = []
    while True:
        fl = math.floor(lo)
        if hi > fl + 1:
            quotients.append(fl + 1)
            break
        quotients.append(fl)
        if lo == fl:
            quotients.append(math.floor(1 / (hi - fl)) + 1)
            break
        lo, hi = 1 / (hi - fl), 1 / (lo - fl)
    value = Fraction(quotients[-1])
    for a in reversed(quotients[:-1]):
        value = a + 1 / value
    return value


def interval_for_rational(r: Fraction) -> tuple[Interval, CFString, CFString]:
    """Return `I_r` and the labels of its lower and upper endpoints.

    The endpoints are `[0; period S]` and `[0; period S']` where `S` and `S'` are the
    two expansions of `r`.
    """
    s = standard_expansion(r)
    t = conjugate_string(s)
    if compare_expansions(s.periodic, t.periodic) > 0:
        s, t = t, s
    return (Interval(cf_value(s.periodic), cf_value(t.periodic)), s, t)
