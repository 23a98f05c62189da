"""Exact arithmetic: rationals, quadratic surds and integer 2x2 matrices.

This module provides the number types on which every exact computation of the package
rests.

Overview:
    `BigRational` is the standard library's `fractions.Fraction`. `QuadSurd` stores a
    real number `(p + q*sqrt(d))/r` with integer coefficients and acts as an element
    of the field `Q(sqrt(d))`. `IntMatrix2` is an integer 2x2 matrix acting on both by
    Möbius transformations `x -> (a*x + b)/(c*x + d)`.

Normalisation:
    A surd is stored with `r > 0`, `gcd(p, q, r) = 1` and `d` free of square factors.
    Rationals are embedded with `q = 0, d = 0`. Square factors of `d` are removed by
    `sympy.factorint`: completely when `d` is small, and by trial division otherwise.
    A large `d` may therefore keep a square factor above the trial bound, in which case
    two representations of one field differ by a square. Binary operations detect this
    (the product of the radicands is then a perfect square) and rewrite one operand
    into the other's radicand, so equality is exact in every case.

Ordering:
    Comparisons are decided with integer arithmetic only. Within one field the sign of
    `p + q*sqrt(d)` follows from the signs of `p`, `q` and a comparison of `p**2` with
    `q**2 * d`. Surds from different fields are separated by rational enclosures
    obtained from `math.isqrt`, refined until disjoint; two irrationals from different
    fields are never equal, so the refinement terminates.

Truth values:
    `bool(x)` raises `ImplicitConversionError`; write `x != 0` instead.

Text format:
    `format_surd` writes `(p+q*sqrt(d))/r` for irrationals and `p/r` for rationals;
    `QuadSurd.parse` reads both back losslessly.
"""

import math
import re
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import overload

import mpmath
from sympy import factorint

from .exceptions import (
    DegenerateLinearError,
    DivisionByZeroError,
    ImplicitConversionError,
    MixedRadicandError,
    NegativeDiscriminantError,
    PoleAtInputError,
    SurdFormatError,
    ValidationError,
)

BigRational = Fraction

type Rational = int | Fraction

# Radicands up to this many bits are factorised completely
FULL_FACTOR_BITS = 64
# Larger radicands only lose square factors of primes below this bound
TRIAL_DIVISION_LIMIT = 10**5
# Enclosure refinement stops here; reaching it means an equality went undetected
MAX_ENCLOSURE_BITS = 1 << 22

# -------------------------------------------------------------------------------------
#   Square-free part
# -------------------------------------------------------------------------------------


@lru_cache(maxsize=4096)
def square_split(d: int) -> tuple[int, int]:
    """Return `(s, core)` with `d == s**2 * core` and `core` free of small squares.

    `core` is square-free when `d` has at most `FULL_FACTOR_BITS` bits; above that, only
    squares of primes below `TRIAL_DIVISION_LIMIT` and a perfect-square cofactor are
    removed.
    """
    if d < 0:
        msg = f"Invalid radicand: {d} < 0"
        raise NegativeDiscriminantError(msg)
    if d in (0, 1):
        return (1, d)
    if d.bit_length() <= FULL_FACTOR_BITS:
        factors = factorint(d)
    else:
        factors = factorint(d, limit=TRIAL_DIVISION_LIMIT)
    s, core = 1, 1
    for key, multiplicity in factors.items():
        f, e = int(key), int(multiplicity)
        s *= f ** (e // 2)
        if e % 2 == 1:
            # a composite cofactor left by trial division may still be a square
            root = math.isqrt(f)
            if root * root == f:
                s *= root
            else:
                core *= f
    return (s, core)


def _sign(p: int, q: int, d: int) -> int:
    """Return the sign of `p + q*sqrt(d)` for non-square `d` (or `q == 0`)."""
    if q == 0 or d == 0:
        return (p > 0) - (p < 0)
    if p == 0:
        return (q > 0) - (q < 0)
    if p > 0 and q > 0:
        return 1
    if p < 0 and q < 0:
        return -1
    pp, qq = p * p, q * q * d
    # opposite signs; pp == qq is impossible for non-square d
    if p > 0:
        return 1 if pp > qq else -1
    return 1 if qq > pp else -1


# -------------------------------------------------------------------------------------
#   Quadratic surd
# -------------------------------------------------------------------------------------

_SURD_PATTERN = re.compile(
    r"^\(\s*(?P<p>[+-]?\d+)\s*(?P<sign>[+-])\s*(?P<q>\d+)"
    r"\s*\*\s*sqrt\(\s*(?P<d>\d+)\s*\)\s*\)\s*/\s*(?P<r>\d+)$",
)
_RATIONAL_PATTERN = re.compile(r"^(?P<p>[+-]?\d+)(?:\s*/\s*(?P<r>\d+))?$")


class QuadSurd:
    """An exact real number `(p + q*sqrt(d))/r`.

    Args:
        p: Rational part numerator.
        q: Coefficient of the square root.
        d: Radicand, a nonnegative integer.
        r: Common denominator, nonzero.

    Raises:
        ValidationError: If a coefficient is not an integer.
        DivisionByZeroError: If `r == 0`.
        NegativeDiscriminantError: If `d < 0`.
    """

    __slots__ = ("_d", "_p", "_q", "_r")

    def __init__(self, p: int, q: int = 0, d: int = 0, r: int = 1) -> None:
        for name, coefficient in (("p", p), ("q", q), ("d", d), ("r", r)):
            if type(coefficient) is not int:
                msg = f"Invalid surd: expected integer {name}, got {coefficient!r}"
                raise ValidationError(msg)
        if r == 0:
            raise DivisionByZeroError
        if q != 0 and d > 1:
            s, d = square_split(d)
            q *= s
        elif d < 0:
            msg = f"Invalid radicand: {d} < 0"
            raise NegativeDiscriminantError(msg)
        self._set(p, q, d, r)

    def _set(self, p: int, q: int, d: int, r: int) -> None:
        if q == 0 or d == 0:
            q, d = 0, 0
        elif d == 1:
            p, q, d = p + q, 0, 0
        if r < 0:
            p, q, r = -p, -q, -r
        g = math.gcd(p, q, r)
        if g > 1:
            p, q, r = p // g, q // g, r // g
        self._p, self._q, self._d, self._r = p, q, d, r

    @classmethod
    def _raw(cls, p: int, q: int, d: int, r: int) -> "QuadSurd":
        # d is already reduced; only sign and gcd are normalised
        if r == 0:
            raise DivisionByZeroError
        surd = cls.__new__(cls)
        surd._set(p, q, d, r)
        return surd

    @classmethod
    def from_rational(cls, x: Rational) -> "QuadSurd":
        if isinstance(x, bool) or not isinstance(x, int | Fraction):
            msg = f"Invalid rational: {x!r}"
            raise ValidationError(msg)
        f = Fraction(x)
        return cls._raw(f.numerator, 0, 0, f.denominator)

    @classmethod
    def parse(cls, text: str) -> "QuadSurd":
        """Parse the text produced by `format_surd`."""
        stripped = text.strip()
        if m := _SURD_PATTERN.match(stripped):
            q = int(m["q"]) if m["sign"] == "+" else -int(m["q"])
            return cls(int(m["p"]), q, int(m["d"]), int(m["r"]))
        if m := _RATIONAL_PATTERN.match(stripped):
            return cls(int(m["p"]), r=int(m["r"] or 1))
        msg = f"Invalid surd text: {text!r}"
        raise SurdFormatError(msg)

    # ---------------------------------------------------------------------------------
    #   Accessors
    # ---------------------------------------------------------------------------------

    @property
    def p(self) -> int:
        return self._p

    @property
    def q(self) -> int:
        return self._q

    @property
    def d(self) -> int:
        return self._d

    @property
    def r(self) -> int:
        return self._r

    @property
    def is_rational(self) -> bool:
        return self._q == 0

    @property
    def as_fraction(self) -> Fraction:
        if not self.is_rational:
            msg = f"Invalid conversion: {self} is irrational"
            raise ValidationError(msg)
        return Fraction(self._p, self._r)

    @property
    def conjugate(self) -> "QuadSurd":
        return QuadSurd._raw(self._p, -self._q, self._d, self._r)

    @property
    def to_float(self) -> float:
        lo, hi = self.enclosure(64)
        return float((lo + hi) / 2)

    def to_mpf(self, dps: int = 30) -> mpmath.mpf:
        """Evaluate with `mpmath` at `dps` significant digits (after cancellation)."""
        magnitude = max(abs(self._p), abs(self._q) * math.isqrt(self._d) + 1, 1)
        with mpmath.workdps(dps + len(str(magnitude)) + 10):
            value = (
                mpmath.mpf(self._p) + mpmath.mpf(self._q) * mpmath.sqrt(self._d)
            ) / self._r
        with mpmath.workdps(dps):
            return +value

    def to_decimal(self, digits: int = 30) -> str:
        with mpmath.workdps(digits + 5):
            return str(mpmath.nstr(self.to_mpf(digits + 5), digits))

    def enclosure(self, bits: int) -> tuple[Fraction, Fraction]:
        """Return rationals `lo <= self <= hi` with `hi - lo <= 2**-bits * |q|/r`."""
        if self.is_rational:
            x = Fraction(self._p, self._r)
            return (x, x)
        scale = 1 << bits
        s = math.isqrt(self._q * self._q * self._d * scale * scale)
        lo_root, hi_root = (s, s + 1) if self._q > 0 else (-s - 1, -s)
        denominator = self._r * scale
        return (
            Fraction(self._p * scale + lo_root, denominator),
            Fraction(self._p * scale + hi_root, denominator),
        )

    # ---------------------------------------------------------------------------------
    #   Field operations
    # ---------------------------------------------------------------------------------

    def _align(
        self,
        other: "QuadSurd",
    ) -> tuple[int, tuple[int, int, int], tuple[int, int, int]]:
        """Return a common radicand and both operands as `(p, q, r)` over it."""
        x, y = self, other
        if y.is_rational or x._d == y._d:
            return (x._d, (x._p, x._q, x._r), (y._p, y._q, y._r))
        if x.is_rational:
            return (y._d, (x._p, 0, x._r), (y._p, y._q, y._r))
        product = x._d * y._d
        s = math.isqrt(product)
        if s * s != product:
            msg = f"Mixed radicands: sqrt({x._d}) and sqrt({y._d})"
            raise MixedRadicandError(msg)
        # sqrt(y.d) == (s / x.d) * sqrt(x.d)
        return (
            x._d,
            (x._p, x._q, x._r),
            (y._p * x._d, y._q * s, y._r * x._d),
        )

    def __add__(self, other: "QuadSurd | Rational") -> "QuadSurd":
        y = _coerce(other)
        if y is None:
            return NotImplemented
        d, (p1, q1, r1), (p2, q2, r2) = self._align(y)
        return QuadSurd._raw(p1 * r2 + p2 * r1, q1 * r2 + q2 * r1, d, r1 * r2)

    def __radd__(self, other: Rational) -> "QuadSurd":
        return self.__add__(other)

    def __neg__(self) -> "QuadSurd":
        return QuadSurd._raw(-self._p, -self._q, self._d, self._r)

    def __pos__(self) -> "QuadSurd":
        return self

    def __abs__(self) -> "QuadSurd":
        return -self if self.sign < 0 else self

    def __sub__(self, other: "QuadSurd | Rational") -> "QuadSurd":
        y = _coerce(other)
        if y is None:
            return NotImplemented
        return self + (-y)

    def __rsub__(self, other: Rational) -> "QuadSurd":
        return (-self).__add__(other)

    def __mul__(self, other: "QuadSurd | Rational") -> "QuadSurd":
        y = _coerce(other)
        if y is None:
            return NotImplemented
        d, (p1, q1, r1), (p2, q2, r2) = self._align(y)
        return QuadSurd._raw(p1 * p2 + q1 * q2 * d, p1 * q2 + p2 * q1, d, r1 * r2)

    def __rmul__(self, other: Rational) -> "QuadSurd":
        return self.__mul__(other)

    def inverse(self) -> "QuadSurd":
        norm = self._p * self._p - self._q * self._q * self._d
        if norm == 0:
            raise DivisionByZeroError
        return QuadSurd._raw(self._r * self._p, -self._r * self._q, self._d, norm)

    def __truediv__(self, other: "QuadSurd | Rational") -> "QuadSurd":
        y = _coerce(other)
        if y is None:
            return NotImplemented
        return self * y.inverse()

    def __rtruediv__(self, other: Rational) -> "QuadSurd":
        return self.inverse().__mul__(other)

    # ---------------------------------------------------------------------------------
    #   Order
    # ---------------------------------------------------------------------------------

    @property
    def sign(self) -> int:
        return _sign(self._p, self._q, self._d)

    def compare(self, other: "QuadSurd | Rational") -> int:
        """Return -1, 0 or 1 as `self` is below, equal to or above `other`."""
        y = _coerce(other)
        if y is None:
            msg = f"Invalid comparison with {other!r}"
            raise ValidationError(msg)
        try:
            return (self - y).sign
        except MixedRadicandError:
            pass
        bits = 64
        while bits <= MAX_ENCLOSURE_BITS:
            a_lo, a_hi = self.enclosure(bits)
            b_lo, b_hi = y.enclosure(bits)
            if a_hi < b_lo:
                return -1
            if b_hi < a_lo:
                return 1
            bits *= 2
        msg = f"Unresolved comparison between {self} and {y}"
        raise MixedRadicandError(msg)

    def __lt__(self, other: "QuadSurd | Rational") -> bool:
        return self.compare(other) < 0

    def __le__(self, other: "QuadSurd | Rational") -> bool:
        return self.compare(other) <= 0

    def __gt__(self, other: "QuadSurd | Rational") -> bool:
        return self.compare(other) > 0

    def __ge__(self, other: "QuadSurd | Rational") -> bool:
        return self.compare(other) >= 0

    def __eq__(self, other: object) -> bool:
        if isinstance(other, bool):
            return NotImplemented
        y = _coerce(other)
        if y is None:
            return NotImplemented
        try:
            return (self - y).sign == 0
        except MixedRadicandError:
            # irrationals from different fields
            return False

    def __hash__(self) -> int:
        if self.is_rational:
            return hash(Fraction(self._p, self._r))
        # both parts are invariant under rewriting the radicand by a square
        square = Fraction(self._q * self._q * self._d, self._r * self._r)
        return hash((Fraction(self._p, self._r), square if self._q > 0 else -square))

    def __floor__(self) -> int:
        if self.is_rational:
            return self._p // self._r
        s = math.isqrt(self._q * self._q * self._d)
        if self._q > 0:
            return (self._p + s) // self._r
        return (self._p - s - 1) // self._r

    def __bool__(self) -> bool:
        raise ImplicitConversionError

    # ---------------------------------------------------------------------------------
    #   Text
    # ---------------------------------------------------------------------------------

    def __str__(self) -> str:
        return format_surd(self)

    def __repr__(self) -> str:
        return f"QuadSurd(p={self._p}, q={self._q}, d={self._d}, r={self._r})"


def _coerce(x: object) -> QuadSurd | None:
    if isinstance(x, QuadSurd):
        return x
    if isinstance(x, int | Fraction) and not isinstance(x, bool):
        return QuadSurd.from_rational(x)
    return None


def to_surd(x: "QuadSurd | Rational") -> QuadSurd:
    """Embed an exact number into `QuadSurd`."""
    surd = _coerce(x)
    if surd is None:
        msg = f"Invalid exact number: {x!r}"
        raise ValidationError(msg)
    return surd


def format_surd(x: QuadSurd) -> str:
    if x.is_rational:
        return f"{x.p}/{x.r}"
    sign = "+" if x.q > 0 else "-"
    return f"({x.p}{sign}{abs(x.q)}*sqrt({x.d}))/{x.r}"


def surd_cmp(x: "QuadSurd | Rational", y: "QuadSurd | Rational") -> int:
    return to_surd(x).compare(y)


def surd_floor(x: "QuadSurd | Rational") -> int:
    return math.floor(to_surd(x))


def rational_between(
    x: "QuadSurd | Rational",
    y: "QuadSurd | Rational",
    min_bits: int = 0,
) -> Fraction:
    """Return a rational strictly between `x < y`.

    With `min_bits > 0` the result is taken from enclosures of at least that precision,
    which gives it a large denominator.
    """
    a, b = to_surd(x), to_surd(y)
    if a >= b:
        msg = f"Invalid bounds: {a} >= {b}"
        raise ValidationError(msg)
    bits = max(min_bits, 16)
    while True:
        a_hi = a.enclosure(bits)[1]
        b_lo = b.enclosure(bits)[0]
        if a_hi < b_lo:
            if min_bits == 0:
                return (a_hi + b_lo) / 2
            # snap to the dyadic grid of the requested precision
            scale = 1 << bits
            mid = (a_hi + b_lo) / 2
            candidate = Fraction(math.floor(mid * scale) * 2 + 1, 2 * scale)
            if a < candidate < b:
                return candidate
            return mid
        bits *= 2


# -------------------------------------------------------------------------------------
#   Quadratic equations
# -------------------------------------------------------------------------------------


def quadratic_roots(a: int, b: int, c: int) -> tuple[QuadSurd, QuadSurd]:
    """Return the two real roots of `a*x**2 + b*x + c`, smaller first.

    Raises:
        DegenerateLinearError: If `a == 0`; the exception carries the root of the
            linear equation when `b != 0`.
        NegativeDiscriminantError: If the roots are not real.
    """
    if a == 0:
        if b != 0:
            msg = f"Degenerate quadratic: {b}*x + {c} is linear"
            raise DegenerateLinearError(msg, Fraction(-c, b))
        msg = f"Degenerate quadratic: constant {c}"
        raise DegenerateLinearError(msg, None)
    discriminant = b * b - 4 * a * c
    if discriminant < 0:
        msg = f"Negative discriminant: {discriminant}"
        raise NegativeDiscriminantError(msg)
    first = QuadSurd(-b, 1, discriminant, 2 * a)
    second = QuadSurd(-b, -1, discriminant, 2 * a)
    return (first, second) if first <= second else (second, first)


# -------------------------------------------------------------------------------------
#   Integer matrices
# -------------------------------------------------------------------------------------


@dataclass(frozen=True, slots=True)
class IntMatrix2:
    """A 2x2 integer matrix `[[a, b], [c, d]]`, acting by Möbius transformations."""

    a: int
    b: int
    c: int
    d: int

    @classmethod
    def identity(cls) -> "IntMatrix2":
        return cls(1, 0, 0, 1)

    def __matmul__(self, other: "IntMatrix2") -> "IntMatrix2":
        return IntMatrix2(
            self.a * other.a + self.b * other.c,
            self.a * other.b + self.b * other.d,
            self.c * other.a + self.d * other.c,
            self.c * other.b + self.d * other.d,
        )

    def __neg__(self) -> "IntMatrix2":
        return IntMatrix2(-self.a, -self.b, -self.c, -self.d)

    @property
    def det(self) -> int:
        return self.a * self.d - self.b * self.c

    def inverse(self) -> "IntMatrix2":
        """Return the integer inverse of a matrix with determinant +1 or -1."""
        det = self.det
        if det not in (1, -1):
            msg = f"Invalid inverse: determinant {det} is not a unit"
            raise ValidationError(msg)
        return IntMatrix2(self.d * det, -self.b * det, -self.c * det, self.a * det)

    def power(self, n: int) -> "IntMatrix2":
        base = self if n >= 0 else self.inverse()
        result = IntMatrix2.identity()
        for _ in range(abs(n)):
            result = result @ base
        return result

    def equal_up_to_sign(self, other: "IntMatrix2") -> bool:
        return self in (other, -other)

    def canonical(self) -> "IntMatrix2":
        """Return the sign representative whose first nonzero entry is positive."""
        for entry in (self.c, self.d, self.a, self.b):
            if entry != 0:
                return self if entry > 0 else -self
        return self

    def __str__(self) -> str:
        return f"[[{self.a}, {self.b}], [{self.c}, {self.d}]]"


@overload
def mobius_apply(m: IntMatrix2, x: QuadSurd) -> QuadSurd: ...
@overload
def mobius_apply(m: IntMatrix2, x: Rational) -> Fraction: ...


def mobius_apply(m: IntMatrix2, x: QuadSurd | Rational) -> QuadSurd | Fraction:
    """Return `(a*x + b)/(c*x + d)` exactly.

    Raises:
        PoleAtInputError: If `c*x + d == 0`.
    """
    if isinstance(x, QuadSurd):
        denominator_surd = x * m.c + m.d
        if denominator_surd == 0:
            msg = f"Pole at input: {x} for {m}"
            raise PoleAtInputError(msg)
        return (x * m.a + m.b) / denominator_surd
    f = Fraction(x)
    denominator = m.c * f + m.d
    if denominator == 0:
        msg = f"Pole at input: {f} for {m}"
        raise PoleAtInputError(msg)
    return (m.a * f + m.b) / denominator
