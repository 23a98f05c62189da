"""Matching intervals of the alpha-continued fraction family.

The orbits of `alpha` and `alpha - 1` under `T_alpha` *match* with exponents
`(k1, k2)` when, writing `M_A` for the orbit matrix of the first `k1 - 1` digits of
`alpha` and `M_B` for that of the first `k2 - 1` digits of `alpha - 1`,

    (I)    the points alpha, ..., T^(k1-1)(alpha) and alpha-1, ..., T^(k2-1)(alpha-1)
           are pairwise distinct, and
    (II')  M_A = +-T @ M_B @ [[1, 0], [-1, -1]]  with T = [[1, 1], [0, 1]].

Condition (II') implies `1/T^(k1-1)(alpha) + 1/T^(k2-1)(alpha-1) = -1`, and then
`T^k1(alpha) = T^k2(alpha-1)`. Both conditions depend only on the two codings, so they
hold on the whole set of parameters realising those codings: the intersection of two
cylinders in parameter space. `solve_matching` computes that intersection exactly.

Cylinders:
    Along a fixed coding the orbit points are Möbius images `x_j = P_j(alpha)` with
    integer `P_j`. The coding can only change where some `x_j` reaches `alpha` or
    `alpha - 1`, or where a point before the last reaches 0. These boundary equations
    are quadratic (or linear) in `alpha`; their roots in `[0, 1]` cut the parameter
    line into cells, and a cell belongs to the cylinder iff a rational test point in
    it realises the coding. Test points have large dyadic denominators so that their
    orbits stay away from 0.

Monotonicity:
    On a matching interval the entropy of `T_alpha` is increasing if `k1 < k2`,
    constant if `k1 == k2` and decreasing if `k1 > k2`. The classification is stored
    on each `MatchingInterval`.

Group words:
    `GroupWord` holds words in `S`, `T^n` and `V` which generate `PGL(2, Z)`;
    `word_normal_form` reduces a word to a canonical form, so that two words denote
    the same element iff their normal forms coincide.
"""

import logging
from collections.abc import Iterable, Sequence
from dataclasses import dataclass, field
from enum import Enum
from fractions import Fraction
from typing import Literal

import mpmath
import numpy as np

from .alphamap import (
    AlphaParam,
    Coding,
    Digit,
    Exact,
    expand,
    expand_alpha,
    expand_alpha_minus_one,
    float_orbit,
    format_coding,
    orbit_matrix,
    t_alpha_step,
)
from .cfrac import (
    CFString,
    Interval,
    cf_expand,
    finite_value,
    interval_for_rational,
)
from .exactnum import IntMatrix2, QuadSurd, quadratic_roots, to_surd
from .exceptions import (
    DegenerateLinearError,
    EmptyCylinderError,
    NegativeDiscriminantError,
    OrbitHitZeroError,
    QuotientBelowTwoError,
    ValidationError,
    VerificationFailedError,
)

logger = logging.getLogger(__name__)

DEFAULT_KMAX = 40
DEFAULT_TOLERANCE = 1e-10
MAX_SCAN_K = 64

ENVELOPE_C0 = 8.4423
ENVELOPE_C1 = 0.9624
ENVELOPE_SLACK = 0.95

# -------------------------------------------------------------------------------------
#   Types
# -------------------------------------------------------------------------------------


class Side(Enum):
    """Which of the two critical orbits a coding belongs to."""

    ALPHA = "alpha"
    ALPHA_MINUS_ONE = "alpha-1"

    @property
    def shift(self) -> int:
        return 0 if self is Side.ALPHA else -1


class EndpointSide(Enum):
    LEFT = "left"
    RIGHT = "right"


class Monotonicity(Enum):
    """Behaviour of the entropy on a matching interval."""

    INCREASING = "increasing"
    CONSTANT = "constant"
    DECREASING = "decreasing"

    @classmethod
    def from_exponents(cls, k1: int, k2: int) -> "Monotonicity":
        if k1 < k2:
            return cls.INCREASING
        if k1 == k2:
            return cls.CONSTANT
        return cls.DECREASING


def _check_exponents(k1: int, k2: int) -> None:
    for name, k in (("k1", k1), ("k2", k2)):
        if type(k) is not int or k < 1:
            msg = f"Invalid exponent: {name} = {k!r}, expected a positive integer"
            raise ValidationError(msg)


@dataclass(frozen=True, slots=True)
class MatchingCandidate:
    """A seed parameter with conjectured exponents, awaiting exact verification."""

    seed: Fraction
    k1: int
    k2: int

    def __post_init__(self) -> None:
        _check_exponents(self.k1, self.k2)


@dataclass(frozen=True, slots=True)
class MatchingInterval:
    """A verified matching interval with its exponents and codings.

    `coding_alpha` holds the first `k1 - 1` digits of `alpha` and `coding_alpham1` the
    first `k2 - 1` digits of `alpha - 1`; both are constant on the interval.
    """

    interval: Interval
    k1: int
    k2: int
    coding_alpha: Coding
    coding_alpham1: Coding
    monotonicity: Monotonicity
    labels: tuple[CFString, CFString] | None = field(default=None, compare=False)

    def __post_init__(self) -> None:
        _check_exponents(self.k1, self.k2)
        if self.monotonicity is not Monotonicity.from_exponents(self.k1, self.k2):
            msg = (
                f"Invalid monotonicity: {self.monotonicity.value} for exponents "
                f"({self.k1}, {self.k2})"
            )
            raise ValidationError(msg)

    @property
    def lo(self) -> QuadSurd:
        return self.interval.lo

    @property
    def hi(self) -> QuadSurd:
        return self.interval.hi

    @property
    def is_root(self) -> bool:
        """True for the rightmost interval, whose right end is `alpha = 1`."""
        return self.interval.hi == 1

    def size(self, digits: int = 20) -> mpmath.mpf:
        return self.interval.length_mpf(digits)

    def label_texts(self) -> tuple[str, str]:
        if self.labels is not None:
            return (str(self.labels[0]), str(self.labels[1]))
        return (endpoint_text(self.lo), endpoint_text(self.hi))

    def to_row(self) -> dict[str, object]:
        label_lo, label_hi = self.label_texts()
        return {
            "k1": self.k1,
            "k2": self.k2,
            "size": mpmath.nstr(self.size(), 6),
            "lo": str(self.lo),
            "hi": str(self.hi),
            "label_lo": label_lo,
            "label_hi": label_hi,
            "monotonicity": self.monotonicity.value,
        }


def endpoint_text(x: QuadSurd) -> str:
    """The label of a purely periodic endpoint, else its expansion."""
    if not 0 <= x < 1:
        return str(x)
    expansion = cf_expand(x).canonical()
    if not expansion.preperiod and expansion.period:
        return str(CFString(expansion.period))
    return str(expansion)


# -------------------------------------------------------------------------------------
#   Conditions (I) and (II')
# -------------------------------------------------------------------------------------

_T = IntMatrix2(1, 1, 0, 1)
_W = IntMatrix2(1, 0, -1, -1)


@dataclass(frozen=True, slots=True)
class ConditionReport:
    """The outcome of `check_conditions` at one parameter."""

    alpha: Exact
    k1: int
    k2: int
    coding_alpha: Coding
    coding_alpham1: Coding
    orbits_disjoint: bool
    matrix_ok: bool
    meets: bool
    sign_product: int

    @property
    def holds(self) -> bool:
        return self.orbits_disjoint and self.matrix_ok

    def certificate(self) -> dict[str, object]:
        return {
            "alpha": str(self.alpha),
            "k1": self.k1,
            "k2": self.k2,
            "coding_alpha": format_coding(self.coding_alpha),
            "coding_alpham1": format_coding(self.coding_alpham1),
            "orbits_disjoint": self.orbits_disjoint,
            "matrix_ok": self.matrix_ok,
        }


def _as_param(alpha: "AlphaParam | Exact | int") -> AlphaParam:
    return alpha if isinstance(alpha, AlphaParam) else AlphaParam.of(alpha)


def check_conditions(
    alpha: "AlphaParam | Exact | int",
    k1: int,
    k2: int,
) -> ConditionReport:
    """Check conditions (I) and (II') exactly at one parameter.

    Raises:
        OrbitHitZeroError: If either orbit reaches 0 before the last point needed.
        VerificationFailedError: If (II') holds but its consequence on the last
            orbit points does not, which indicates an arithmetic fault.
    """
    _check_exponents(k1, k2)
    param = _as_param(alpha)
    orbit_a = expand_alpha(param, k1 - 1)
    orbit_b = expand_alpha_minus_one(param, k2 - 1)
    for orbit, k, name in ((orbit_a, k1, "alpha"), (orbit_b, k2, "alpha - 1")):
        if len(orbit.points) < k or any(x == 0 for x in orbit.points):
            msg = f"Orbit of {name} hits 0 before step {k - 1} at alpha = {param}"
            raise OrbitHitZeroError(msg)
    m_a = orbit_matrix(orbit_a.digits)
    m_b = orbit_matrix(orbit_b.digits)
    matrix_ok = m_a.equal_up_to_sign(_T @ m_b @ _W)
    disjoint = all(x != y for x in orbit_a.points for y in orbit_b.points)
    last_a, last_b = orbit_a.points[-1], orbit_b.points[-1]
    report = ConditionReport(
        alpha=param.exact,
        k1=k1,
        k2=k2,
        coding_alpha=orbit_a.digits,
        coding_alpham1=orbit_b.digits,
        orbits_disjoint=disjoint,
        matrix_ok=matrix_ok,
        meets=t_alpha_step(param, last_a)[0] == t_alpha_step(param, last_b)[0],
        sign_product=(1 if last_a > 0 else -1) * (1 if last_b > 0 else -1),
    )
    if matrix_ok and 1 / last_a + 1 / last_b != -1:
        msg = f"Matrix identity holds without its consequence at alpha = {param}"
        raise VerificationFailedError(msg, report.certificate())
    return report


def sign_structure_findings(report: ConditionReport) -> list[str]:
    """List departures from the sign pattern observed in verified matchings.

    The pattern is `eps_1 = +1`, `eps_i = -1` for `2 <= i <= k1 - 1`, all signs of the
    `alpha - 1` coding negative, and `eps_k1 * eta_k2 = -1`. Findings are logged at
    WARNING; they are research observations, not errors.
    """
    findings: list[str] = []
    for i, digit in enumerate(report.coding_alpha, start=1):
        expected = 1 if i == 1 else -1
        if digit.eps != expected:
            findings.append(f"eps_{i} = {digit.eps:+d} in the coding of alpha")
    for i, digit in enumerate(report.coding_alpham1, start=1):
        if digit.eps != -1:
            findings.append(f"eta_{i} = {digit.eps:+d} in the coding of alpha - 1")
    if report.sign_product != -1:
        findings.append(f"eps_k1 * eta_k2 = {report.sign_product:+d}")
    for finding in findings:
        logger.warning(
            "Sign structure at alpha = %s, (%d, %d): %s",
            report.alpha,
            report.k1,
            report.k2,
            finding,
        )
    return findings


# -------------------------------------------------------------------------------------
#   Cylinders
# -------------------------------------------------------------------------------------


def probe_bits(length: int) -> int:
    """Precision of rational test points for codings of the given length."""
    return 4 * length + 128


def realises(coding: Sequence[Digit], side: Side, alpha: Fraction) -> bool:
    """True if the orbit of `alpha` (or `alpha - 1`) starts with `coding`."""
    param = AlphaParam.of(alpha)
    orbit = expand(param, param.exact + side.shift, len(coding))
    return orbit.digits == tuple(coding)


def _boundary_roots(coding: Coding, side: Side) -> list[QuadSurd]:
    shift = IntMatrix2(1, side.shift, 0, 1)
    roots: set[QuadSurd] = {to_surd(0), to_surd(1)}
    m = IntMatrix2.identity()
    for j in range(len(coding) + 1):
        # x_j = p(alpha) along the branch of the coding
        p = m.inverse() @ shift
        if j < len(coding) and p.a != 0:
            roots.add(to_surd(Fraction(-p.b, p.a)))
        if j >= 1:
            for t in (0, -1):
                try:
                    coefficients = (p.c, p.d + p.c * t - p.a, t * p.d - p.b)
                    roots.update(quadratic_roots(*coefficients))
                except DegenerateLinearError as e:
                    if e.root is not None:
                        roots.add(to_surd(e.root))
                except NegativeDiscriminantError:
                    continue
        if j < len(coding):
            m = m @ coding[j].matrix
    return sorted(r for r in roots if 0 <= r <= 1)


def _close_at_one(lo: QuadSurd, hi: QuadSurd, coding: Coding, side: Side) -> Interval:
    hi_closed = hi == 1 and realises(coding, side, Fraction(1))
    return Interval(lo, hi, hi_closed=hi_closed)


def cylinder_components(coding: Sequence[Digit], side: Side) -> list[Interval]:
    """Return the maximal runs of cells of parameters realising `coding`."""
    cells = tuple(coding)
    if not cells:
        return [Interval.of(0, 1, hi_closed=True)]
    roots = _boundary_roots(cells, side)
    bits = probe_bits(len(cells))
    components: list[Interval] = []
    start: int | None = None
    for i in range(len(roots) - 1):
        probe = Interval(roots[i], roots[i + 1]).interior_rational(bits)
        if realises(cells, side, probe):
            start = i if start is None else start
            continue
        if start is not None:
            components.append(_close_at_one(roots[start], roots[i], cells, side))
            start = None
    if start is not None:
        components.append(_close_at_one(roots[start], roots[-1], cells, side))
    return components


def cylinder_interval(
    coding: Sequence[Digit],
    side: Side,
    seed: Fraction | None = None,
) -> Interval:
    """Return the parameters whose `side` orbit realises `coding`.

    With a seed, the component containing it is returned and only the cells next to
    it are tested.

    Raises:
        EmptyCylinderError: If no parameter (or not the seed) realises the coding.
        VerificationFailedError: If, without a seed, the cylinder is disconnected.
    """
    cells = tuple(coding)
    if seed is None:
        components = cylinder_components(cells, side)
        if not components:
            msg = f"Empty cylinder: {format_coding(cells)} on the {side.value} side"
            raise EmptyCylinderError(msg)
        if len(components) > 1:
            msg = f"Disconnected cylinder: {format_coding(cells)} ({side.value})"
            raise VerificationFailedError(
                msg,
                {"coding": format_coding(cells), "components": len(components)},
            )
        return components[0]
    if not cells:
        return Interval.of(0, 1, hi_closed=True)
    if not realises(cells, side, seed):
        msg = f"Empty cylinder: {format_coding(cells)} not realised at {seed}"
        raise EmptyCylinderError(msg)
    roots = _boundary_roots(cells, side)
    if any(r == seed for r in roots):
        msg = f"Invalid seed: {seed} lies on a cylinder boundary"
        raise ValidationError(msg)
    upper = next(i for i, r in enumerate(roots) if r > seed)
    lower = upper - 1
    bits = probe_bits(len(cells))

    def realised_cell(i: int) -> bool:
        probe = Interval(roots[i], roots[i + 1]).interior_rational(bits)
        return realises(cells, side, probe)

    while lower > 0 and realised_cell(lower - 1):
        lower -= 1
    while upper < len(roots) - 1 and realised_cell(upper):
        upper += 1
    return _close_at_one(roots[lower], roots[upper], cells, side)


# -------------------------------------------------------------------------------------
#   Solving
# -------------------------------------------------------------------------------------


def solve_matching(
    c: MatchingCandidate,
    labels: tuple[CFString, CFString] | None = None,
) -> MatchingInterval:
    """Solve the matching interval containing a verified seed.

    Raises:
        VerificationFailedError: If the conditions fail at the seed, the cylinders do
            not overlap, or the conditions fail inside the solved interval.
    """
    report = check_conditions(c.seed, c.k1, c.k2)
    if not report.holds:
        msg = f"Matching ({c.k1}, {c.k2}) fails at seed {c.seed}"
        raise VerificationFailedError(msg, report.certificate())
    try:
        j_a = cylinder_interval(report.coding_alpha, Side.ALPHA, c.seed)
        j_b = cylinder_interval(report.coding_alpham1, Side.ALPHA_MINUS_ONE, c.seed)
    except EmptyCylinderError as e:
        msg = f"Cylinder solve failed at seed {c.seed}: {e}"
        raise VerificationFailedError(msg, report.certificate()) from e
    j = j_a.intersect(j_b)
    if j is None or j.is_point:
        msg = f"Cylinders of seed {c.seed} do not overlap: {j_a} and {j_b}"
        raise VerificationFailedError(msg, report.certificate())
    probe = j.interior_rational(probe_bits(c.k1 + c.k2))
    if not check_conditions(probe, c.k1, c.k2).holds:
        msg = f"Matching ({c.k1}, {c.k2}) fails inside {j} at {probe}"
        raise VerificationFailedError(msg, report.certificate())
    sign_structure_findings(report)
    logger.debug("Solved (%d, %d) on %s", c.k1, c.k2, j)
    return MatchingInterval(
        interval=j,
        k1=c.k1,
        k2=c.k2,
        coding_alpha=report.coding_alpha,
        coding_alpham1=report.coding_alpham1,
        monotonicity=Monotonicity.from_exponents(c.k1, c.k2),
        labels=labels,
    )


def verify_interval(
    expected: Interval,
    k1: int,
    k2: int,
    labels: tuple[CFString, CFString] | None = None,
) -> MatchingInterval:
    """Solve from a seed inside `expected` and require the exact same interval."""
    seed = expected.interior_rational(probe_bits(k1 + k2))
    solved = solve_matching(MatchingCandidate(seed, k1, k2), labels)
    if solved.lo != expected.lo or solved.hi != expected.hi:
        msg = f"Solved interval {solved.interval} differs from {expected}"
        raise VerificationFailedError(
            msg,
            {"expected": str(expected), "solved": str(solved.interval), "k1": k1},
        )
    return solved


def spot_verify(
    expected: Interval,
    k1: int,
    k2: int,
    labels: tuple[CFString, CFString] | None = None,
) -> MatchingInterval:
    """Check the conditions at one interior point only, without solving cylinders."""
    seed = expected.interior_rational(probe_bits(k1 + k2))
    report = check_conditions(seed, k1, k2)
    if not report.holds:
        msg = f"Matching ({k1}, {k2}) fails at {seed} inside {expected}"
        raise VerificationFailedError(msg, report.certificate())
    return MatchingInterval(
        interval=expected,
        k1=k1,
        k2=k2,
        coding_alpha=report.coding_alpha,
        coding_alpham1=report.coding_alpham1,
        monotonicity=Monotonicity.from_exponents(k1, k2),
        labels=labels,
    )


# -------------------------------------------------------------------------------------
#   Labels and the star transform
# -------------------------------------------------------------------------------------


def k_from_label(s: CFString, side: EndpointSide) -> tuple[int, int]:
    """Predict `(k1, k2)` from the label of a matching-interval endpoint.

    With positions counted from 1, a left endpoint gives
    `k1 = 2 + sum(even positions)`, `k2 = sum(odd positions)`; a right endpoint gives
    `k1 = 1 + sum(even positions)`, `k2 = 1 + sum(odd positions)`.
    """
    odd = sum(s.quotients[0::2])
    even = sum(s.quotients[1::2])
    if side is EndpointSide.LEFT:
        return (2 + even, odd)
    return (1 + even, 1 + odd)


def star_transform(a: CFString | Sequence[int]) -> CFString:
    """Return the quotients of the `alpha - 1` coding from those of `alpha`.

    The quotients `a_i >= 2` are written as the word `N^(a_1-2) * N^(a_2-2) * ...`;
    exchanging `N` and `*` and counting the `N`s between consecutive stars gives
    `b_j - 2`.

    Raises:
        QuotientBelowTwoError: If some `a_i < 2`.
    """
    quotients = tuple(a)
    if any(q < 2 for q in quotients):
        msg = f"Quotient below two: {quotients!r}"
        raise QuotientBelowTwoError(msg)
    word = "*".join("N" * (q - 2) for q in quotients)
    swapped = word.translate(str.maketrans("N*", "*N"))
    return CFString(tuple(2 + len(slot) for slot in swapped.split("*")))


# -------------------------------------------------------------------------------------
#   Words in PGL(2, Z)
# -------------------------------------------------------------------------------------

type Symbol = Literal["S", "T", "V"]

_GENERATORS: dict[str, IntMatrix2] = {
    "S": IntMatrix2(0, -1, 1, 0),
    "T": IntMatrix2(1, 1, 0, 1),
    "V": IntMatrix2(-1, 0, 0, 1),
}


@dataclass(frozen=True, slots=True)
class Letter:
    symbol: Symbol
    power: int = 1

    def __post_init__(self) -> None:
        if self.symbol not in _GENERATORS:
            msg = f"Invalid letter: {self.symbol!r}"
            raise ValidationError(msg)
        if self.power == 0 or (self.symbol != "T" and self.power != 1):
            msg = f"Invalid power: {self.symbol}^{self.power}"
            raise ValidationError(msg)

    @property
    def matrix(self) -> IntMatrix2:
        return _GENERATORS[self.symbol].power(self.power)

    def __str__(self) -> str:
        return self.symbol if self.power == 1 else f"{self.symbol}^{self.power}"


@dataclass(frozen=True, slots=True)
class GroupWord:
    """A word in the generators `S`, `T^n` and `V` of `PGL(2, Z)`."""

    letters: tuple[Letter, ...] = ()

    @classmethod
    def parse(cls, text: str) -> "GroupWord":
        """Read space-separated letters such as `T^-1 S T^-3 S V`."""
        letters: list[Letter] = []
        for token in text.split():
            symbol, _, power = token.partition("^")
            if symbol not in _GENERATORS:
                msg = f"Invalid letter: {token!r}"
                raise ValidationError(msg)
            exponent = int(power) if power else 1
            letters.append(Letter(symbol, exponent))  # type: ignore[arg-type]
        return cls(tuple(letters))

    def __add__(self, other: "GroupWord") -> "GroupWord":
        return GroupWord(self.letters + other.letters)

    def matrix(self) -> IntMatrix2:
        m = IntMatrix2.identity()
        for letter in self.letters:
            m = m @ letter.matrix
        return m

    def __len__(self) -> int:
        return len(self.letters)

    def __str__(self) -> str:
        return " ".join(str(letter) for letter in self.letters) or "I"


def _positive(m: IntMatrix2) -> IntMatrix2:
    return -m if m.c < 0 or (m.c == 0 and m.d < 0) else m


def word_normal_form(w: GroupWord) -> GroupWord:
    """Return the canonical word for the element of `PGL(2, Z)` that `w` denotes.

    The form is `T^n1 S T^n2 S ... T^m`, followed by `V` when the determinant is -1.
    The word is not rewritten with the relations. It is evaluated to an integer
    matrix, and the `T` and `S` letters are read off the Euclidean algorithm on that
    matrix, up to sign, after a trailing `V` has cleared a determinant of -1.
    """
    m = w.matrix()
    reflect = m.det == -1
    if reflect:
        m = m @ _GENERATORS["V"]
    m = _positive(m)
    letters: list[Letter] = []
    while m.c != 0:
        n = m.a // m.c
        if n != 0:
            letters.append(Letter("T", n))
        letters.append(Letter("S"))
        # m = T^n S m'
        m = _positive(IntMatrix2(m.c, m.d, n * m.c - m.a, n * m.d - m.b))
    if m.b != 0:
        letters.append(Letter("T", m.b))
    if reflect:
        letters.append(Letter("V"))
    return GroupWord(tuple(letters))


def _descending_word(quotients: Sequence[int]) -> list[Letter]:
    letters: list[Letter] = []
    for q in reversed(quotients):
        letters += [Letter("S"), Letter("T", -q)]
    return [*letters, Letter("S")]


def verify_algebraic_matching(
    a: CFString | Sequence[int],
    b: CFString | Sequence[int],
) -> bool:
    """Decide the group identity behind a matching with quotient strings `a`, `b`.

    The identity reads

        T^-1 S T^-a_m S ... T^-a_1 S V = V S T^-b_n S ... T^-b_1 S T^-1.

    Raises:
        QuotientBelowTwoError: If an entry is below 2.
    """
    a_quotients, b_quotients = tuple(a), tuple(b)
    if any(q < 2 for q in (*a_quotients, *b_quotients)):
        msg = f"Quotient below two: {a_quotients!r}, {b_quotients!r}"
        raise QuotientBelowTwoError(msg)
    lhs = GroupWord(
        (Letter("T", -1), *_descending_word(a_quotients), Letter("V")),
    )
    rhs = GroupWord(
        (Letter("V"), *_descending_word(b_quotients), Letter("T", -1)),
    )
    return word_normal_form(lhs) == word_normal_form(rhs)


# -------------------------------------------------------------------------------------
#   Families
# -------------------------------------------------------------------------------------

SQRT3_LIMIT = QuadSurd(-1, 1, 3, 2)


def sqrt3_family(n: int) -> MatchingInterval:
    """Return the `n`-th interval of the family accumulating at `(sqrt3 - 1)/2`.

    The codings are `(3,+)(4,-)^n(2,-)` for `alpha` and `((2,-)(3,-))^(n+1)` for
    `alpha - 1`, with exponents `(n + 3, 2n + 3)`.
    """
    if type(n) is not int or n < 1:
        msg = f"Invalid family index: {n!r}, expected n >= 1"
        raise ValidationError(msg)
    coding_a = (Digit(3, 1), *(Digit(4, -1),) * n, Digit(2, -1))
    coding_b = (Digit(2, -1), Digit(3, -1)) * (n + 1)
    overlaps = [
        j
        for j_a in cylinder_components(coding_a, Side.ALPHA)
        for j_b in cylinder_components(coding_b, Side.ALPHA_MINUS_ONE)
        if (j := j_a.intersect(j_b)) is not None and not j.is_point
    ]
    if len(overlaps) != 1:
        msg = f"Family interval {n}: expected one overlap, found {len(overlaps)}"
        raise VerificationFailedError(msg, {"n": n})
    return verify_interval(overlaps[0], n + 3, 2 * n + 3)


def sqrt3_leading_length(n: int, dps: int = 30) -> mpmath.mpf:
    """The leading term `((567 - 327 sqrt3)/26) (2 + sqrt3)^(-2n)` of the lengths."""
    with mpmath.workdps(dps):
        root3 = mpmath.sqrt(3)
        return (567 - 327 * root3) / 26 * (2 + root3) ** (-2 * n)


def family_interval(n: int) -> MatchingInterval:
    """Return the `(2, n)` interval containing `1/n`, for `n >= 2`.

    Its endpoints are `(sqrt(n^2 + 4) - n)/2` and
    `(sqrt(n^2 + 2n - 3) - n + 1)/(2n - 2)`.
    """
    if type(n) is not int or n < 2:
        msg = f"Invalid family index: {n!r}, expected n >= 2"
        raise ValidationError(msg)
    expected = Interval(
        QuadSurd(-n, 1, n * n + 4, 2),
        QuadSurd(1 - n, 1, n * n + 2 * n - 3, 2 * n - 2),
    )
    return verify_interval(expected, 2, n)


def largest_decreasing_prediction(n: int) -> MatchingInterval:
    """Return the predicted largest decreasing interval inside `(1/(n+1), 1/n)`.

    Its endpoints carry the labels `{n,2,1,n-1,1}` and `{n,2,1,n}`, and its exponents
    are `(n + 3, n + 2)`.
    """
    if type(n) is not int or n < 3:
        msg = f"Invalid index: {n!r}, expected n >= 3"
        raise ValidationError(msg)
    interval, label_lo, label_hi = interval_for_rational(finite_value([n, 2, 1, n]))
    k1, k2 = k_from_label(label_lo, EndpointSide.LEFT)
    result = verify_interval(interval, k1, k2, (label_lo, label_hi))
    if result.monotonicity is not Monotonicity.DECREASING:
        msg = f"Predicted interval {interval} is not decreasing: ({k1}, {k2})"
        raise VerificationFailedError(msg, {"n": n, "k1": k1, "k2": k2})
    return result


# -------------------------------------------------------------------------------------
#   Envelope
# -------------------------------------------------------------------------------------


def envelope_bound(
    k1: int,
    k2: int,
    c0: float = ENVELOPE_C0,
    c1: float = ENVELOPE_C1,
) -> mpmath.mpf:
    return mpmath.mpf(c0) * mpmath.exp(-mpmath.mpf(c1) * (k1 + k2))


def envelope_violations(
    intervals: Iterable[MatchingInterval],
    c0: float = ENVELOPE_C0,
    c1: float = ENVELOPE_C1,
    slack: float = ENVELOPE_SLACK,
) -> list[MatchingInterval]:
    """Return the intervals shorter than `slack * c0 * exp(-c1 (k1 + k2))`.

    The rightmost interval is skipped: the parameter range cuts it at 1.
    """
    violations = []
    for m in intervals:
        if m.is_root:
            continue
        if m.size(6) < slack * envelope_bound(m.k1, m.k2, c0, c1):
            logger.warning(
                "Envelope violated by (%d, %d) on %s",
                m.k1,
                m.k2,
                m.interval,
            )
            violations.append(m)
    return violations


# -------------------------------------------------------------------------------------
#   Scanning
# -------------------------------------------------------------------------------------


def scan_candidate(
    alpha: Fraction | float,
    kmax: int = DEFAULT_KMAX,
    tol: float = DEFAULT_TOLERANCE,
) -> MatchingCandidate | None:
    """Find the smallest `(k1, k2)` at which the float orbits come within `tol`.

    Pairs are ordered by `k1 + k2`, then by `k1`. The result is a candidate only; it
    must pass `check_conditions` before use.
    """
    if not 1 <= kmax <= MAX_SCAN_K:
        msg = f"Invalid kmax: {kmax} not in [1, {MAX_SCAN_K}]"
        raise ValidationError(msg)
    value = float(alpha)
    if not 0 < value < 1:
        msg = f"Invalid alpha: {value} not in (0, 1)"
        raise ValidationError(msg)
    xs = float_orbit(value, value, kmax)
    ys = float_orbit(value, value - 1.0, kmax)
    close = np.abs(xs[:, None] - ys[None, :]) < tol
    close[0, :] = close[:, 0] = False
    k1s, k2s = np.nonzero(close)
    if len(k1s) == 0:
        return None
    pairs = zip(k1s.tolist(), k2s.tolist(), strict=True)
    best = min(pairs, key=lambda k: (k[0] + k[1], k[0]))
    seed = alpha if isinstance(alpha, Fraction) else Fraction(alpha)
    return MatchingCandidate(seed, best[0], best[1])


def scan_candidates(
    alphas: Iterable[Fraction | float],
    kmax: int = DEFAULT_KMAX,
    tol: float = DEFAULT_TOLERANCE,
) -> list[tuple[Fraction | float, MatchingCandidate | None]]:
    return [(alpha, scan_candidate(alpha, kmax, tol)) for alpha in alphas]


def random_seeds(
    window: tuple[float, float],
    count: int,
    rng_seed: int,
) -> list[Fraction]:
    """Draw rational seeds with 127-bit dyadic denominators, sorted."""
    lo, hi = (Fraction(x) for x in window)
    rng = np.random.default_rng(rng_seed)
    words = rng.integers(0, 2**63, size=(count, 2), dtype=np.uint64)
    seeds = [
        lo + (hi - lo) * Fraction(2 * ((int(w0) << 63) | int(w1)) + 1, 2**127)
        for w0, w1 in words
    ]
    return sorted(seeds)


@dataclass(frozen=True, slots=True)
class ScanReport:
    """Result of `scan_pipeline`: distinct verified intervals and rejected seeds."""

    intervals: tuple[MatchingInterval, ...]
    seeds: int
    unmatched: int
    failures: tuple[tuple[Fraction, str], ...]


def scan_pipeline(
    window: tuple[float, float],
    seeds: int,
    kmax: int = DEFAULT_KMAX,
    rng_seed: int = 0,
    tol: float = DEFAULT_TOLERANCE,
) -> ScanReport:
    """Scan random rational seeds, verify candidates and solve their intervals.

    Seeds inside an interval already found are skipped; the intervals are returned
    sorted by left endpoint.
    """
    found: list[MatchingInterval] = []
    failures: list[tuple[Fraction, str]] = []
    unmatched = 0
    for seed in random_seeds(window, seeds, rng_seed):
        if any(m.interval.contains(seed) for m in found):
            continue
        candidate = scan_candidate(seed, kmax, tol)
        if candidate is None:
            unmatched += 1
            continue
        try:
            found.append(solve_matching(candidate))
        except (VerificationFailedError, OrbitHitZeroError) as e:
            logger.warning("Seed %s rejected: %s", seed, e)
            failures.append((seed, str(e)))
    found.sort(key=lambda m: m.lo)
    logger.info("Scan of %s: %d intervals from %d seeds", window, len(found), seeds)
    return ScanReport(tuple(found), seeds, unmatched, tuple(failures))


def matching_exponents(
    alpha: Fraction,
    kmax: int = DEFAULT_KMAX,
) -> tuple[int, int] | None:
    """Return the exactly verified exponents at `alpha`, or None."""
    candidate = scan_candidate(alpha, kmax)
    if candidate is None:
        return None
    try:
        report = check_conditions(alpha, candidate.k1, candidate.k2)
    except OrbitHitZeroError:
        return None
    return (candidate.k1, candidate.k2) if report.holds else None
