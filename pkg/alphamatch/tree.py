"""The matching tree: bisection of gaps by pseudocenters.

Starting from the gap `[0, (sqrt5 - 1)/2]` left of the rightmost matching interval,
each level replaces every gap `J` by the two pieces of `J` outside `I_r`, where `r` is
the pseudocenter of `J`. Each removed `I_r` is verified to be a matching interval with
the exponents predicted by its left label; a failure is a counterexample to the
conjecture that pseudocenters always produce matching intervals, and stops the run
with a certificate.

Gaps:
    A gap is stored with the labels of its endpoints, so pseudocenters are computed
    from continued fraction strings and never from floating point. When two matching
    intervals are adjacent the gap between them is a single point; such point gaps are
    carried to every later level and never refined.

Chains:
    The recursion `S_{n+1} = (S_n S_n)'` produces adjacent intervals
    `I_n = (a_n, b_n)` with `a_n = [0; period S_n]`, `b_n = [0; period S_n']` and
    `b_{n+1} = a_n`. The left endpoints decrease to a cluster point whose continued
    fraction starts with every `S_n`.

Verification:
    `"solve"` recomputes each interval from its cylinders and requires exact
    agreement. `"spot"` only checks the matching conditions at one interior point,
    which is much cheaper on deep trees.
"""

import logging
import math
from collections.abc import Iterable, Sequence
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, replace
from fractions import Fraction
from typing import Literal

import mpmath

from .cfrac import (
    CFString,
    Interval,
    PeriodicCF,
    cf_value,
    compare_expansions,
    conjugate_string,
    interval_for_rational,
    pseudocenter_of_expansions,
)
from .exactnum import QuadSurd
from .exceptions import (
    ConjectureCounterexampleError,
    OrbitHitZeroError,
    PointIntervalError,
    ValidationError,
    VerificationFailedError,
)
from .matching import (
    EndpointSide,
    MatchingInterval,
    Monotonicity,
    k_from_label,
    spot_verify,
    verify_interval,
)

logger = logging.getLogger(__name__)

type Verification = Literal["solve", "spot"]

GOLDEN_CONJUGATE = QuadSurd(-1, 1, 5, 2)
DEFAULT_QMAX = 1000

# -------------------------------------------------------------------------------------
#   Gaps
# -------------------------------------------------------------------------------------


@dataclass(frozen=True, slots=True)
class Gap:
    """A closed gap `[lo, hi]` with the labels of its ends; `None` labels the end 0."""

    interval: Interval
    level: int
    label_lo: CFString | None
    label_hi: CFString

    def __post_init__(self) -> None:
        if self.level < 0:
            msg = f"Invalid level: {self.level}"
            raise ValidationError(msg)

    @property
    def is_point(self) -> bool:
        return self.interval.is_point

    @property
    def expansion_lo(self) -> PeriodicCF | None:
        return None if self.label_lo is None else self.label_lo.periodic

    @property
    def expansion_hi(self) -> PeriodicCF:
        return self.label_hi.periodic

    def to_row(self) -> dict[str, object]:
        return {
            "level": self.level,
            "is_point": self.is_point,
            "lo": str(self.interval.lo),
            "hi": str(self.interval.hi),
            "label_lo": "0" if self.label_lo is None else str(self.label_lo),
            "label_hi": str(self.label_hi),
        }

    def __str__(self) -> str:
        lo = "0" if self.label_lo is None else str(self.label_lo.periodic)
        star = "* " if self.is_point else ""
        return f"{star}[{lo}, {self.label_hi.periodic}]"


def initial_gap() -> Gap:
    """The level-0 gap `[0, [0; period 1]]`."""
    return Gap(
        Interval(QuadSurd(0), GOLDEN_CONJUGATE, lo_closed=True, hi_closed=True),
        0,
        None,
        CFString.of(1),
    )


def root_interval(verification: Verification = "solve") -> MatchingInterval:
    """The rightmost matching interval `((sqrt5 - 1)/2, 1]`, with exponents `(2, 1)`."""
    expected = Interval(GOLDEN_CONJUGATE, QuadSurd(1), hi_closed=True)
    check = verify_interval if verification == "solve" else spot_verify
    return check(expected, 2, 1)


def refine_gap(
    j: Gap,
    verification: Verification = "solve",
) -> tuple[MatchingInterval, Gap, Gap]:
    """Remove `I_r` from the gap `j`, with `r` its pseudocenter.

    Returns:
        The verified matching interval and the two child gaps, left first.

    Raises:
        PointIntervalError: If `j` is a point gap.
        ConjectureCounterexampleError: If `I_r` is not a matching interval with the
            exponents predicted by its left label.
    """
    if j.is_point:
        msg = f"Point gap cannot be refined: {j}"
        raise PointIntervalError(msg)
    r = pseudocenter_of_expansions(j.expansion_lo, j.expansion_hi)
    interval, label_lo, label_hi = interval_for_rational(r)
    k1, k2 = k_from_label(label_lo, EndpointSide.LEFT)
    if k_from_label(label_hi, EndpointSide.RIGHT) != (k1, k2):
        logger.warning(
            "Labels of I_%s predict different exponents: %s and %s",
            r,
            label_lo,
            label_hi,
        )
    certificate: dict[str, object] = {
        "pseudocenter": str(r),
        "gap": str(j),
        "label_lo": str(label_lo),
        "label_hi": str(label_hi),
        "k1": k1,
        "k2": k2,
        "lo": str(interval.lo),
        "hi": str(interval.hi),
    }
    check = verify_interval if verification == "solve" else spot_verify
    try:
        m = check(interval, k1, k2, (label_lo, label_hi))
    except (VerificationFailedError, OrbitHitZeroError) as e:
        msg = f"I_{r} is not a matching interval with exponents ({k1}, {k2})"
        certificate["reason"] = str(e)
        raise ConjectureCounterexampleError(msg, certificate) from e
    left = Gap(
        Interval(j.interval.lo, interval.lo, lo_closed=True, hi_closed=True),
        j.level + 1,
        j.label_lo,
        label_lo,
    )
    right = Gap(
        Interval(interval.hi, j.interval.hi, lo_closed=True, hi_closed=True),
        j.level + 1,
        label_hi,
        j.label_hi,
    )
    return (m, left, right)


# -------------------------------------------------------------------------------------
#   Tree
# -------------------------------------------------------------------------------------


@dataclass(frozen=True, slots=True)
class MatchingTree:
    """The result of `generate_tree`.

    Attributes:
        root: The rightmost interval `((sqrt5 - 1)/2, 1]`.
        intervals: Intervals removed from gaps, sorted by left endpoint.
        gaps: The gaps of the last level, sorted by left endpoint.
        families: The gaps of every level `0..depth`.
    """

    root: MatchingInterval
    intervals: tuple[MatchingInterval, ...]
    gaps: tuple[Gap, ...]
    families: tuple[tuple[Gap, ...], ...]

    @property
    def depth(self) -> int:
        return len(self.families) - 1

    def all_intervals(self) -> tuple[MatchingInterval, ...]:
        return (*self.intervals, self.root)


def _overlaps(gap: Gap, window: Interval | None) -> bool:
    if window is None:
        return True
    return gap.interval.lo < window.hi and window.lo < gap.interval.hi


def _sort_key(interval: Interval) -> tuple[QuadSurd, QuadSurd]:
    return (interval.lo, interval.hi)


def generate_tree(
    depth: int,
    window: Interval | None = None,
    verification: Verification = "solve",
    threads: int = 1,
) -> MatchingTree:
    """Run `depth` levels of gap bisection.

    Gaps outside `window` are carried unchanged. Gaps of one level are refined
    independently, on `threads` worker threads; the output order does not depend on
    the thread count.

    Raises:
        ConjectureCounterexampleError: On the first interval that fails verification.
    """
    if depth < 0:
        msg = f"Invalid depth: {depth} < 0"
        raise ValidationError(msg)
    root = root_interval(verification)
    gaps: list[Gap] = [initial_gap()]
    families: list[tuple[Gap, ...]] = [tuple(gaps)]
    intervals: list[MatchingInterval] = []
    with ThreadPoolExecutor(max_workers=max(threads, 1)) as pool:
        for level in range(depth):
            todo = [g for g in gaps if not g.is_point and _overlaps(g, window)]
            results = dict(
                zip(
                    (id(g) for g in todo),
                    pool.map(lambda g: refine_gap(g, verification), todo),
                    strict=True,
                ),
            )
            next_gaps: list[Gap] = []
            for g in gaps:
                if id(g) in results:
                    m, left, right = results[id(g)]
                    intervals.append(m)
                    next_gaps += [left, right]
                else:
                    next_gaps.append(replace(g, level=level + 1))
            gaps = sorted(next_gaps, key=lambda g: _sort_key(g.interval))
            families.append(tuple(gaps))
            logger.info(
                "Level %d: %d gaps, %d intervals",
                level + 1,
                len(gaps),
                len(intervals),
            )
    intervals.sort(key=lambda m: _sort_key(m.interval))
    return MatchingTree(root, tuple(intervals), tuple(gaps), tuple(families))


# -------------------------------------------------------------------------------------
#   Maximality
# -------------------------------------------------------------------------------------


@dataclass(frozen=True, slots=True)
class MaximalityReport:
    """Whether `I_r` contains `I_r'` for all `r'` in `I_r` with denominator <= qmax."""

    r: Fraction
    qmax: int
    maximal: bool
    witness: Fraction | None = None

    def __str__(self) -> str:
        verdict = "maximal" if self.maximal else f"not maximal (witness {self.witness})"
        return f"I_{self.r} is {verdict} up to qmax = {self.qmax}"


def is_maximal(r: Fraction, qmax: int = DEFAULT_QMAX) -> MaximalityReport:
    """Test maximality of `I_r` against all rationals of denominator at most `qmax`."""
    interval, _, _ = interval_for_rational(r)
    lo, hi = interval.lo.to_float, interval.hi.to_float
    for q in range(2, qmax + 1):
        for p in range(math.floor(lo * q), math.ceil(hi * q) + 1):
            candidate = Fraction(p, q)
            if candidate.denominator != q or candidate == r:
                continue
            if not (0 < candidate < 1 and interval.contains(candidate)):
                continue
            inner, _, _ = interval_for_rational(candidate)
            if not interval.contains_interval(inner):
                return MaximalityReport(r, qmax, maximal=False, witness=candidate)
    return MaximalityReport(r, qmax, maximal=True)


# -------------------------------------------------------------------------------------
#   Period doubling
# -------------------------------------------------------------------------------------


@dataclass(frozen=True, slots=True)
class ChainState:
    """The string `S_n` of a doubling chain."""

    string: CFString
    level: int

    def next(self) -> "ChainState":
        """Return `S_{n+1} = (S_n S_n)'`."""
        return ChainState(conjugate_string(self.string + self.string), self.level + 1)


def chain_states(s0: CFString, levels: int) -> list[ChainState]:
    """Return `S_1, ..., S_levels`."""
    if len(s0) % 2 == 0:
        msg = f"Invalid chain start: |{s0}| = {len(s0)} is even"
        raise ValidationError(msg)
    if levels < 1:
        msg = f"Invalid chain length: {levels} < 1"
        raise ValidationError(msg)
    states = [ChainState(s0, 0).next()]
    while len(states) < levels:
        states.append(states[-1].next())
    return states


def doubling_chain(
    s0: CFString,
    levels: int,
    verification: Verification = "solve",
) -> list[MatchingInterval]:
    """Return the verified chain `I_1, ..., I_levels` of adjacent matching intervals.

    Raises:
        VerificationFailedError: If a link is not a matching interval, or two
            consecutive links are not adjacent.
    """
    check = verify_interval if verification == "solve" else spot_verify
    chain: list[MatchingInterval] = []
    for state in chain_states(s0, levels):
        s, t = state.string, conjugate_string(state.string)
        interval = Interval(cf_value(s.periodic), cf_value(t.periodic))
        k1, k2 = k_from_label(s, EndpointSide.LEFT)
        link = check(interval, k1, k2, (s, t))
        if chain and link.hi != chain[-1].lo:
            msg = f"Chain links {state.level - 1} and {state.level} are not adjacent"
            raise VerificationFailedError(msg, {"S": str(s), "level": state.level})
        chain.append(link)
        logger.debug("Chain level %d: (%d, %d) on %s", state.level, k1, k2, interval)
    return chain


@dataclass(frozen=True, slots=True)
class ClusterPoint:
    """A certified enclosure `lower < x < upper` of a chain's cluster point."""

    prefix: CFString
    lower: Fraction
    upper: Fraction
    decimal: str

    @property
    def width(self) -> Fraction:
        return self.upper - self.lower


def _common_decimal_prefix(lower: Fraction, upper: Fraction, digits: int) -> str:
    scale = 10**digits
    lo_digits = str(math.floor(lower * scale)).zfill(digits)
    hi_digits = str(math.floor(upper * scale)).zfill(digits)
    common = ""
    for a, b in zip(lo_digits, hi_digits, strict=True):
        if a != b:
            break
        common += a
    return "0." + common


def cluster_point(s0: CFString, levels: int, digits: int = 60) -> ClusterPoint:
    """Enclose the limit of the left endpoints of a doubling chain.

    The continued fraction of the limit starts with `S_levels`, so it lies between
    `p/q` and `(p + p_prev)/(q + q_prev)` for the last two convergents of that
    prefix. The decimal digits returned are those shared by both ends.
    """
    prefix = chain_states(s0, levels)[-1].string
    p_prev, p, q_prev, q = 1, 0, 0, 1
    for a in prefix:
        p_prev, p = p, a * p + p_prev
        q_prev, q = q, a * q + q_prev
    lower, upper = sorted((Fraction(p, q), Fraction(p + p_prev, q + q_prev)))
    decimal = _common_decimal_prefix(lower, upper, digits)
    return ClusterPoint(prefix, lower, upper, decimal)


# -------------------------------------------------------------------------------------
#   Statistics
# -------------------------------------------------------------------------------------


@dataclass(frozen=True, slots=True)
class CoverageReport:
    """Certified bounds on the fraction of a window covered by matching intervals."""

    lower: Fraction
    upper: Fraction
    intervals: int

    @property
    def value(self) -> mpmath.mpf:
        with mpmath.workdps(30):
            mid = (self.lower + self.upper) / 2
            return mpmath.mpf(mid.numerator) / mid.denominator


def coverage(
    intervals: Iterable[MatchingInterval | Interval],
    window: Interval,
    bits: int = 96,
) -> CoverageReport:
    """Measure of the union of `intervals` inside `window`, relative to its length.

    Overlaps are merged before summing. Endpoints are bounded by rational
    enclosures, so the result is an interval of width about `2**-bits` per endpoint.
    """
    if window.is_point:
        msg = f"Point window: {window}"
        raise PointIntervalError(msg)
    pieces: list[Interval] = []
    for item in intervals:
        interval = item.interval if isinstance(item, MatchingInterval) else item
        clipped = interval.intersect(window)
        if clipped is not None and not clipped.is_point:
            pieces.append(clipped)
    pieces.sort(key=_sort_key)
    lower = upper = Fraction(0)
    reach: QuadSurd | None = None
    for piece in pieces:
        lo = piece.lo if reach is None or piece.lo >= reach else reach
        if reach is not None and piece.hi <= reach:
            continue
        covered = Interval(lo, piece.hi)
        low, high = covered.length_bounds(bits)
        lower, upper = lower + low, upper + high
        reach = piece.hi
    w_low, w_high = window.length_bounds(bits)
    return CoverageReport(lower / w_high, min(upper / w_low, Fraction(1)), len(pieces))


def monotonicity_census(
    intervals: Iterable[MatchingInterval],
    window: Interval,
) -> dict[Monotonicity, int]:
    """Count the intervals of each monotonicity type lying inside `window`."""
    census = dict.fromkeys(Monotonicity, 0)
    for m in intervals:
        if window.contains_interval(m.interval):
            census[m.monotonicity] += 1
    return census


@dataclass(frozen=True, slots=True)
class BoundedTypeViolation:
    gap: Gap
    label: CFString
    bound: int


def bounded_type_violations(gaps: Sequence[Gap]) -> list[BoundedTypeViolation]:
    """Find gap endpoints in `(1/(n+1), 1/n]` with a partial quotient above `n`."""
    violations: list[BoundedTypeViolation] = []
    for gap in gaps:
        if gap.is_point:
            continue
        ends = ((gap.interval.lo, gap.label_lo), (gap.interval.hi, gap.label_hi))
        for endpoint, label in ends:
            if label is None or endpoint == 0:
                continue
            n = math.floor(1 / endpoint)
            if endpoint == Fraction(1, n):
                n -= 1
            if max(label.quotients) > n:
                logger.warning("Gap endpoint %s has a quotient above %d", label, n)
                violations.append(BoundedTypeViolation(gap, label, n))
    return violations


def size_records(intervals: Iterable[MatchingInterval]) -> list[dict[str, object]]:
    """Rows of `(left endpoint, log10 size, k1, k2)` for plotting sizes."""
    records: list[dict[str, object]] = []
    for m in intervals:
        size = m.size(10)
        records.append(
            {
                "lo": m.lo.to_float,
                "log10_size": float(mpmath.log10(size)),
                "k1": m.k1,
                "k2": m.k2,
            },
        )
    return records


def expansions_in_order(gaps: Sequence[Gap]) -> bool:
    """True if the gaps are sorted and disjoint, compared by their labels."""
    for left, right in zip(gaps, gaps[1:], strict=False):
        if compare_expansions(left.expansion_hi, right.expansion_lo) > 0:
            return False
    return True
