"""The alpha-continued fraction maps.

For a parameter `0 < alpha <= 1` the map `T_alpha` acts on `[alpha - 1, alpha]` by

    T_alpha(x) = 1/|x| - floor(1/|x| + 1 - alpha),    T_alpha(0) = 0.

Each step emits a `Digit` `(a, eps)` with `a = floor(1/|x| + 1 - alpha)` and
`eps = sign(x)`, so that `x = eps / (a + T_alpha(x))`. For `alpha = 1` this is the
Gauss map of regular continued fractions.

Orbit engines:
    `t_alpha_step` and `expand` run in exact arithmetic (`Fraction` or `QuadSurd`);
    they feed every decision about matching. `float_step` and `float_orbit` run in
    double precision on numpy arrays; they feed the Monte-Carlo estimators and the
    candidate scan. Both use the same digit rule. The float engine treats
    `|x| <= ZERO_CUTOFF` as zero.

Ties:
    When `1/|x| + 1 - alpha` is an integer the floor is taken, so that every orbit
    point lies in the half-open interval `[alpha - 1, alpha)`.

Matrices:
    The digit `(a, eps)` acts by the matrix `[[0, eps], [1, a]]`. The orbit matrix of
    `n` digits is their product; its inverse maps `x` to `T_alpha^n(x)`, and its
    columns hold consecutive convergents `(p_{n-1}, q_{n-1})` and `(p_n, q_n)`.

Text format:
    Codings print as `(3,+)(4,-)^2(2,-)`: one group per digit, runs of equal digits
    collapsed with `^count`.
"""

import logging
import math
import re
from collections.abc import Sequence
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np
import numpy.typing as npt

from .exactnum import IntMatrix2, QuadSurd, mobius_apply, to_surd
from .exceptions import InvalidStringError, OutOfDomainError, ValidationError

logger = logging.getLogger(__name__)

type Exact = QuadSurd | Fraction

# Floats at or below this magnitude are treated as the fixed point 0
ZERO_CUTOFF = 1e-16

# -------------------------------------------------------------------------------------
#   Parameter and digits
# -------------------------------------------------------------------------------------


@dataclass(frozen=True, slots=True)
class AlphaParam:
    """The parameter `alpha`, held exactly, with a cached float approximation."""

    value: QuadSurd
    approx: float = field(init=False, compare=False)

    def __post_init__(self) -> None:
        if not 0 < self.value <= 1:
            msg = f"Invalid alpha: {self.value} not in (0, 1]"
            raise ValidationError(msg)
        object.__setattr__(self, "approx", self.value.to_float)

    @classmethod
    def of(cls, x: "QuadSurd | Fraction | int | str") -> "AlphaParam":
        """Build from an exact number or from text such as `0.41` or `41/100`."""
        if isinstance(x, str):
            try:
                return cls(to_surd(Fraction(x)))
            except ValueError:
                return cls(QuadSurd.parse(x))
        return cls(to_surd(x))

    @property
    def exact(self) -> Exact:
        """The value as a `Fraction` when rational, else as a `QuadSurd`."""
        return self.value.as_fraction if self.value.is_rational else self.value

    @property
    def minus_one(self) -> Exact:
        return self.exact - 1

    def contains(self, x: Exact) -> bool:
        return self.exact - 1 <= x <= self.exact

    def __str__(self) -> str:
        return str(self.value)


@dataclass(frozen=True, slots=True)
class Digit:
    """One step `(a, eps)` of an expansion; `(0, 0)` marks the fixed point 0."""

    a: int
    eps: int

    def __post_init__(self) -> None:
        if (self.a, self.eps) == (0, 0):
            return
        if type(self.a) is not int or self.a < 1 or self.eps not in (1, -1):
            msg = f"Invalid digit: ({self.a!r}, {self.eps!r})"
            raise ValidationError(msg)

    @property
    def is_zero(self) -> bool:
        return self.eps == 0

    @property
    def matrix(self) -> IntMatrix2:
        return IntMatrix2(0, self.eps, 1, self.a)

    def __str__(self) -> str:
        if self.is_zero:
            return "(0,0)"
        return f"({self.a},{'+' if self.eps > 0 else '-'})"


ZERO_DIGIT = Digit(0, 0)

type Coding = tuple[Digit, ...]


@dataclass(frozen=True, slots=True)
class OrbitRecord:
    """The points `x_0, ..., x_n` of an orbit and the digits `d_1, ..., d_n`."""

    points: tuple[Exact, ...]
    digits: Coding

    @property
    def hit_zero(self) -> bool:
        return self.points[-1] == 0

    def __len__(self) -> int:
        return len(self.digits)


# -------------------------------------------------------------------------------------
#   Exact orbits
# -------------------------------------------------------------------------------------


def t_alpha_step(alpha: AlphaParam, x: Exact) -> tuple[Exact, Digit]:
    """Apply `T_alpha` once, exactly.

    Raises:
        OutOfDomainError: If `x` is outside `[alpha - 1, alpha]`.
    """
    if not alpha.contains(x):
        msg = f"Out of domain: {x} not in [{alpha} - 1, {alpha}]"
        raise OutOfDomainError(msg)
    if x == 0:
        return (x, ZERO_DIGIT)
    eps = 1 if x > 0 else -1
    inverse = 1 / x if eps > 0 else -1 / x
    a = math.floor(inverse + 1 - alpha.exact)
    return (inverse - a, Digit(a, eps))


def expand(alpha: AlphaParam, x: Exact, n: int) -> OrbitRecord:
    """Return `n` steps of the orbit of `x`, or fewer if it reaches 0."""
    points: list[Exact] = [x]
    digits: list[Digit] = []
    for _ in range(n):
        if points[-1] == 0:
            logger.debug("Orbit of %s reaches 0 after %d steps", x, len(digits))
            break
        y, digit = t_alpha_step(alpha, points[-1])
        points.append(y)
        digits.append(digit)
    return OrbitRecord(tuple(points), tuple(digits))


def expand_alpha(alpha: AlphaParam, n: int) -> OrbitRecord:
    """The orbit of `alpha` itself."""
    return expand(alpha, alpha.exact, n)


def expand_alpha_minus_one(alpha: AlphaParam, n: int) -> OrbitRecord:
    """The orbit of `alpha - 1`."""
    return expand(alpha, alpha.minus_one, n)


def convergent_pairs(digits: Sequence[Digit]) -> list[tuple[int, int]]:
    """Return `(p_n, q_n)` for `n = 0, ..., len(digits)`."""
    p_prev, p = 1, 0
    q_prev, q = 0, 1
    pairs = [(p, q)]
    for digit in digits:
        p_prev, p = p, digit.a * p + digit.eps * p_prev
        q_prev, q = q, digit.a * q + digit.eps * q_prev
        pairs.append((p, q))
    return pairs


def convergents(digits: Sequence[Digit]) -> list[Fraction]:
    """Return the convergents `p_n/q_n`, starting with `p_0/q_0 = 0`."""
    return [Fraction(p, q) for p, q in convergent_pairs(digits)]


def orbit_matrix(digits: Sequence[Digit]) -> IntMatrix2:
    """Return the product of the digit matrices `[[0, eps], [1, a]]`."""
    m = IntMatrix2.identity()
    for digit in digits:
        m = m @ digit.matrix
    return m


def apply_inverse(digits: Sequence[Digit], x: Exact) -> Exact:
    """Return `T_alpha^n(x)` from the orbit matrix of its first `n` digits."""
    result: Exact = mobius_apply(orbit_matrix(digits).inverse(), x)
    return result


# -------------------------------------------------------------------------------------
#   Float orbits
# -------------------------------------------------------------------------------------


def float_step(
    alpha: float,
    x: npt.NDArray[np.float64],
) -> tuple[npt.NDArray[np.float64], npt.NDArray[np.int64], npt.NDArray[np.int64]]:
    """Apply `T_alpha` to an array of points.

    Returns:
        The images, the quotients `a` and the signs `eps`; points with
        `|x| <= ZERO_CUTOFF` map to 0 with digit `(0, 0)`.
    """
    magnitude = np.abs(x)
    zero = magnitude <= ZERO_CUTOFF
    inverse = 1.0 / np.where(zero, 1.0, magnitude)
    a = np.floor(inverse + 1.0 - alpha)
    image = np.where(zero, 0.0, inverse - a)
    return (
        image,
        np.where(zero, 0, a).astype(np.int64),
        np.where(zero, 0, np.sign(x)).astype(np.int64),
    )


def float_orbit(alpha: float, x: float, n: int) -> npt.NDArray[np.float64]:
    """Return the `n + 1` points `x_0, ..., x_n` of a double-precision orbit."""
    points = np.empty(n + 1, dtype=np.float64)
    current = np.array([x], dtype=np.float64)
    points[0] = x
    for i in range(1, n + 1):
        current = float_step(alpha, current)[0]
        points[i] = current[0]
    return points


def float_digits(alpha: float, x: float, n: int) -> Coding:
    """The first `n` digits of `x` from the float engine."""
    current = np.array([x], dtype=np.float64)
    digits: list[Digit] = []
    for _ in range(n):
        current, a, eps = float_step(alpha, current)
        if eps[0] == 0:
            break
        digits.append(Digit(int(a[0]), int(eps[0])))
    return tuple(digits)


# -------------------------------------------------------------------------------------
#   Coding text
# -------------------------------------------------------------------------------------

_GROUP_PATTERN = re.compile(r"\((\d+),([+-])\)(?:\^(\d+))?")


def format_coding(digits: Sequence[Digit]) -> str:
    """Write a coding with runs collapsed, e.g. `(3,+)(4,-)^2(2,-)`."""
    parts: list[str] = []
    i = 0
    while i < len(digits):
        j = i
        while j < len(digits) and digits[j] == digits[i]:
            j += 1
        run = j - i
        parts.append(str(digits[i]) + (f"^{run}" if run > 1 else ""))
        i = j
    return "".join(parts)


def parse_coding(text: str) -> Coding:
    """Read the text produced by `format_coding`."""
    stripped = text.replace(" ", "")
    digits: list[Digit] = []
    position = 0
    for m in _GROUP_PATTERN.finditer(stripped):
        if m.start() != position:
            break
        digit = Digit(int(m[1]), 1 if m[2] == "+" else -1)
        digits.extend([digit] * int(m[3] or 1))
        position = m.end()
    if position != len(stripped):
        msg = f"Invalid coding text: {text!r}"
        raise InvalidStringError(msg)
    return tuple(digits)
