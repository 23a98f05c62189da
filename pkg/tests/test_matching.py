# ---------------------------------------------------------------------
#   Tests for matching conditions, cylinders and interval solving
# ---------------------------------------------------------------------

import logging
from fractions import Fraction
from itertools import pairwise

import pytest

from alphamatch import (
    CFString,
    GroupWord,
    Interval,
    MatchingCandidate,
    MatchingInterval,
    Monotonicity,
    QuadSurd,
    ValidationError,
    VerificationFailedError,
    check_conditions,
    cylinder_interval,
    interval_for_rational,
    k_from_label,
    scan_candidate,
    solve_matching,
    sqrt3_family,
    star_transform,
    verify_algebraic_matching,
    word_normal_form,
)
from alphamatch.alphamap import Digit
from alphamatch.exceptions import (
    EmptyCylinderError,
    OrbitHitZeroError,
    QuotientBelowTwoError,
)
from alphamatch.matching import (
    SQRT3_LIMIT,
    ConditionReport,
    EndpointSide,
    Side,
    envelope_violations,
    family_interval,
    largest_decreasing_prediction,
    matching_exponents,
    random_seeds,
    realises,
    scan_pipeline,
    sign_structure_findings,
    spot_verify,
    verify_interval,
)

G = QuadSurd(-1, 1, 5, 2)
SQRT2_M1 = QuadSurd(-1, 1, 2)
SQRT10_LEFT = QuadSurd(-2, 1, 10, 3)

# -------------------------------------------------------------------------------------
#   Conditions
# -------------------------------------------------------------------------------------


def test_conditions_hold_at_a_matching_parameter() -> None:
    report = check_conditions(Fraction(41, 100), 3, 3)
    assert report.holds
    assert report.meets
    assert report.sign_product == -1
    assert report.coding_alpha == (Digit(3, 1), Digit(2, -1))
    assert report.coding_alpham1 == (Digit(2, -1), Digit(3, -1))
    assert sign_structure_findings(report) == []


def test_wrong_exponents_fail_the_matrix_condition() -> None:
    report = check_conditions(Fraction(41, 100), 2, 2)
    assert report.orbits_disjoint
    assert not report.matrix_ok
    assert not report.holds
    assert report.certificate()["coding_alpha"] == "(3,+)"


def test_orbit_reaching_zero_raises() -> None:
    with pytest.raises(OrbitHitZeroError, match="hits 0"):
        check_conditions(Fraction(1, 2), 3, 3)


@pytest.mark.parametrize(("k1", "k2"), [(0, 2), (2, -1)])
def test_invalid_exponents(k1: int, k2: int) -> None:
    with pytest.raises(ValidationError, match="Invalid exponent"):
        check_conditions(Fraction(41, 100), k1, k2)
    with pytest.raises(ValidationError, match="Invalid exponent"):
        MatchingCandidate(Fraction(41, 100), k1, k2)


def test_sign_structure_departures_are_logged(caplog: pytest.LogCaptureFixture) -> None:
    report = check_conditions(Fraction(41, 100), 3, 3)
    odd = ConditionReport(
        alpha=report.alpha,
        k1=3,
        k2=3,
        coding_alpha=(Digit(3, 1), Digit(2, 1)),
        coding_alpham1=report.coding_alpham1,
        orbits_disjoint=True,
        matrix_ok=True,
        meets=True,
        sign_product=1,
    )
    with caplog.at_level(logging.WARNING, logger="alphamatch.matching"):
        findings = sign_structure_findings(odd)
    assert findings == ["eps_2 = +1 in the coding of alpha", "eps_k1 * eta_k2 = +1"]
    assert len(caplog.records) == 2


# -------------------------------------------------------------------------------------
#   Monotonicity and intervals
# -------------------------------------------------------------------------------------


@pytest.mark.parametrize(
    ("k1", "k2", "expected"),
    [
        (2, 3, Monotonicity.INCREASING),
        (3, 3, Monotonicity.CONSTANT),
        (6, 5, Monotonicity.DECREASING),
    ],
)
def test_monotonicity_from_exponents(k1: int, k2: int, expected: Monotonicity) -> None:
    assert Monotonicity.from_exponents(k1, k2) is expected


def test_inconsistent_monotonicity_raises() -> None:
    with pytest.raises(ValidationError, match="Invalid monotonicity: constant"):
        MatchingInterval(
            Interval(SQRT2_M1, G),
            2,
            3,
            (),
            (),
            Monotonicity.CONSTANT,
        )


# -------------------------------------------------------------------------------------
#   Cylinders and solving
# -------------------------------------------------------------------------------------


def test_realises() -> None:
    assert realises((Digit(2, 1),), Side.ALPHA, Fraction(1, 2))
    assert not realises((Digit(2, 1),), Side.ALPHA, Fraction(7, 10))
    assert realises((Digit(2, -1),), Side.ALPHA_MINUS_ONE, Fraction(1, 10))


def test_cylinder_of_a_single_digit() -> None:
    j = cylinder_interval((Digit(2, 1),), Side.ALPHA)
    assert (j.lo, j.hi) == (SQRT2_M1, G)
    seeded = cylinder_interval((Digit(2, 1),), Side.ALPHA, Fraction(1, 2))
    assert seeded == j


def test_cylinder_touching_one_is_closed() -> None:
    j = cylinder_interval((Digit(1, 1),), Side.ALPHA)
    assert (j.lo, j.hi) == (G, QuadSurd(1))
    assert j.hi_closed
    assert j.contains(1)


def test_empty_cylinder_raises() -> None:
    with pytest.raises(EmptyCylinderError, match="not realised at 1/2"):
        cylinder_interval((Digit(5, 1),), Side.ALPHA, Fraction(1, 2))


def test_solve_matching_from_a_seed() -> None:
    m = solve_matching(MatchingCandidate(Fraction(41, 100), 3, 3))
    assert (m.lo, m.hi) == (SQRT10_LEFT, SQRT2_M1)
    assert m.monotonicity is Monotonicity.CONSTANT
    assert not m.is_root
    assert m.interval == interval_for_rational(Fraction(2, 5))[0]


def test_solve_matching_rejects_a_failing_seed() -> None:
    with pytest.raises(VerificationFailedError, match="fails at seed") as e:
        solve_matching(MatchingCandidate(Fraction(41, 100), 2, 2))
    assert e.value.certificate["matrix_ok"] is False


def test_labels_and_rows() -> None:
    interval, label_lo, label_hi = interval_for_rational(Fraction(1, 2))
    m = solve_matching(MatchingCandidate(Fraction(51, 100), 2, 2), (label_lo, label_hi))
    assert (m.lo, m.hi) == (interval.lo, interval.hi)
    row = m.to_row()
    assert (row["label_lo"], row["label_hi"]) == ("2", "1,1")
    assert row["monotonicity"] == "constant"
    assert str(row["size"]).startswith("0.20382")
    unlabelled = solve_matching(MatchingCandidate(Fraction(51, 100), 2, 2))
    assert unlabelled.label_texts() == ("2", "1")


def test_spot_verify_keeps_the_given_interval() -> None:
    interval, *_ = interval_for_rational(Fraction(1, 3))
    m = spot_verify(interval, 2, 3)
    assert m.interval == interval
    assert m.monotonicity is Monotonicity.INCREASING
    with pytest.raises(VerificationFailedError):
        spot_verify(interval, 3, 3)


# Published sample of matching intervals: exponents, size and endpoints.
SAMPLE_INTERVALS = [
    ((3, 9), 7.69e-4, QuadSurd(-8, 1, 82, 9), QuadSurd(-2, 1, 5, 2)),
    ((2, 8), 3.68e-3, QuadSurd(-4, 1, 17, 1), QuadSurd(-7, 1, 77, 14)),
    ((3, 8), 1.11e-3, QuadSurd(-7, 1, 65, 8), QuadSurd(-7, 3, 7, 7)),
    ((2, 7), 5.44e-3, QuadSurd(-7, 1, 53, 2), QuadSurd(-3, 1, 15, 6)),
    ((3, 8), 6.98e-4, QuadSurd(-19, 1, 445, 14), QuadSurd(-9, 2, 30, 13)),
    ((3, 7), 1.69e-3, QuadSurd(-6, 5, 2, 7), QuadSurd(-3, 2, 3, 3)),
    ((4, 7), 8.12e-4, QuadSurd(-17, 1, 445, 26), QuadSurd(-3, 1, 11, 2)),
    ((2, 6), 8.54e-3, QuadSurd(-3, 1, 10, 1), QuadSurd(-5, 3, 5, 10)),
    ((3, 8), 6.06e-4, QuadSurd(-11, 1, 145, 6), QuadSurd(-10, 2, 42, 17)),
    ((3, 7), 1.12e-3, QuadSurd(-8, 1, 82, 6), QuadSurd(-15, 1, 357, 22)),
    ((3, 6), 2.76e-3, QuadSurd(-5, 1, 37, 6), QuadSurd(-5, 1, 35, 5)),
    ((4, 6), 1.34e-3, QuadSurd(-7, 1, 82, 11), QuadSurd(-15, 1, 285, 10)),
    ((9, 7), 2.38e-5, QuadSurd(-51, 13, 29, 100), QuadSurd(-117, 1, 15621, 42)),
    ((5, 6), 7.91e-4, QuadSurd(-9, 1, 145, 16), QuadSurd(-10, 2, 30, 5)),
    ((9, 7), 2.25e-5, QuadSurd(-53, 1, 5185, 99), QuadSurd(-30, 4, 66, 13)),
    ((10, 7), 1.54e-5, QuadSurd(-127, 1, 30629, 250), QuadSurd(-73, 1, 6083, 26)),
    ((2, 5), 1.45e-2, QuadSurd(-5, 1, 29, 2), QuadSurd(-1, 1, 2, 2)),
    ((3, 8), 6.57e-4, QuadSurd(-23, 1, 629, 10), QuadSurd(-10, 1, 195, 19)),
    ((3, 7), 1.06e-3, QuadSurd(-9, 1, 101, 5), QuadSurd(-4, 1, 30, 7)),
    ((3, 6), 1.98e-3, QuadSurd(-13, 1, 229, 10), QuadSurd(-2, 1, 7, 3)),
    ((4, 6), 7.42e-4, QuadSurd(-10, 1, 170, 14), QuadSurd(-7, 1, 69, 6)),
    ((9, 7), 1.03e-5, QuadSurd(-81, 1, 13226, 155), QuadSurd(-187, 3, 4669, 82)),
    ((3, 5), 4.94e-3, QuadSurd(-4, 1, 26, 5), QuadSurd(-2, 1, 6, 2)),
    ((4, 6), 8.44e-4, QuadSurd(-10, 1, 145, 9), QuadSurd(-19, 3, 69, 26)),
    ((7, 6), 1.11e-4, QuadSurd(-25, 1, 1297, 48), QuadSurd(-29, 1, 1023, 13)),
    ((4, 5), 2.45e-3, QuadSurd(-11, 1, 229, 18), QuadSurd(-3, 2, 3, 2)),
    ((8, 6), 6.42e-5, QuadSurd(-33, 1, 2305, 64), QuadSurd(-77, 1, 7221, 34)),
    ((5, 5), 1.46e-3, QuadSurd(-7, 1, 101, 13), QuadSurd(-2, 1, 5, 1)),
    ((2, 4), 2.77e-2, QuadSurd(-2, 1, 5, 1), QuadSurd(-3, 1, 21, 6)),
    ((3, 6), 2.1e-3, QuadSurd(-7, 1, 65, 4), QuadSurd(-6, 4, 5, 11)),
    ((4, 6), 7.02e-4, QuadSurd(-11, 1, 226, 15), QuadSurd(-23, 3, 93, 22)),
    ((3, 5), 3.97e-3, QuadSurd(-5, 1, 37, 4), QuadSurd(-9, 1, 165, 14)),
    ((4, 6), 5.77e-4, QuadSurd(-13, 1, 257, 11), QuadSurd(-2, 2, 2, 3)),
    ((4, 5), 1.51e-3, QuadSurd(-15, 1, 445, 22), QuadSurd(-8, 3, 11, 7)),
    ((5, 5), 7.88e-4, QuadSurd(-10, 1, 226, 18), QuadSurd(-23, 5, 29, 14)),
    ((3, 4), 1.02e-2, QuadSurd(-3, 1, 17, 4), QuadSurd(-3, 1, 15, 3)),
    ((4, 6), 8.86e-4, QuadSurd(-11, 1, 170, 7), QuadSurd(-19, 3, 93, 34)),
    ((4, 5), 1.78e-3, QuadSurd(-15, 1, 365, 14), QuadSurd(-7, 3, 11, 10)),
    ((5, 5), 7.09e-4, QuadSurd(-11, 1, 257, 17), QuadSurd(-6, 2, 14, 5)),
    ((8, 6), 2.73e-5, QuadSurd(-54, 1, 7057, 101), QuadSurd(-127, 7, 453, 74)),
    ((4, 4), 5.24e-3, QuadSurd(-4, 1, 37, 7), QuadSurd(-3, 1, 13, 2)),
    ((2, 3), 6.32e-2, QuadSurd(-3, 1, 13, 2), QuadSurd(-1, 1, 3, 2)),
    ((4, 6), 6.9e-4, QuadSurd(-13, 1, 290, 11), QuadSurd(-23, 1, 1365, 38)),
    ((4, 5), 1.72e-3, QuadSurd(-15, 1, 533, 22), QuadSurd(-4, 1, 30, 4)),
    ((3, 4), 9.87e-3, QuadSurd(-7, 1, 85, 6), QuadSurd(-3, 2, 6, 5)),
    ((4, 5), 1.45e-3, QuadSurd(-9, 1, 145, 8), QuadSurd(-8, 2, 42, 13)),
    ((4, 4), 3.82e-3, QuadSurd(-5, 1, 65, 8), QuadSurd(-11, 1, 221, 10)),
    ((5, 5), 6.75e-4, QuadSurd(-13, 5, 13, 13), QuadSurd(-2, 1, 10, 3)),
    ((3, 3), 2.68e-2, QuadSurd(-2, 1, 10, 3), QuadSurd(-1, 1, 2, 1)),
    ((2, 2), 2.04e-1, QuadSurd(-1, 1, 2, 1), QuadSurd(-1, 1, 5, 2)),
    ((2, 1), 3.82e-1, QuadSurd(-1, 1, 5, 2), QuadSurd(1)),
]


@pytest.mark.parametrize(("k", "size", "lo", "hi"), SAMPLE_INTERVALS)
def test_sample_intervals_are_solved_exactly(
    k: tuple[int, int],
    size: float,
    lo: QuadSurd,
    hi: QuadSurd,
) -> None:
    m = verify_interval(Interval(lo, hi), *k)
    assert (m.lo, m.hi) == (lo, hi)
    assert float(m.size()) == pytest.approx(size, rel=5e-3)
    assert m.monotonicity is Monotonicity.from_exponents(*k)


def test_sample_intervals_are_disjoint() -> None:
    ordered = sorted(SAMPLE_INTERVALS, key=lambda row: row[2])
    assert all(a[3] <= b[2] for a, b in pairwise(ordered))


# -------------------------------------------------------------------------------------
#   Labels and the star transform
# -------------------------------------------------------------------------------------


@pytest.mark.parametrize(
    ("label", "side", "expected"),
    [
        ("2", EndpointSide.LEFT, (2, 2)),
        ("1,1", EndpointSide.RIGHT, (2, 2)),
        ("2,1,1", EndpointSide.LEFT, (3, 3)),
        ("2,2", EndpointSide.RIGHT, (3, 3)),
        ("3", EndpointSide.LEFT, (2, 3)),
        ("2,1", EndpointSide.RIGHT, (2, 3)),
        ("3,2,1,2,1", EndpointSide.LEFT, (6, 5)),
    ],
)
def test_k_from_label(
    label: str,
    side: EndpointSide,
    expected: tuple[int, int],
) -> None:
    assert k_from_label(CFString.parse(label), side) == expected


@pytest.mark.parametrize(
    ("a", "b"),
    [((3, 4, 2), (2, 3, 2, 3)), ((3,), (2, 2)), ((2,), (2,)), ((3, 2), (2, 3))],
)
def test_star_transform(a: tuple[int, ...], b: tuple[int, ...]) -> None:
    assert star_transform(a) == CFString(b)


def test_star_transform_requires_quotients_of_two() -> None:
    with pytest.raises(QuotientBelowTwoError, match="Quotient below two"):
        star_transform((3, 1))


# -------------------------------------------------------------------------------------
#   Group words
# -------------------------------------------------------------------------------------


def test_word_text() -> None:
    text = "T^-1 S T^-3 S V"
    assert str(GroupWord.parse(text)) == text
    assert str(GroupWord()) == "I"


@pytest.mark.parametrize(
    ("word", "normal"),
    [
        ("S S", "I"),
        ("T T^-1", "I"),
        ("T^2 T^3", "T^5"),
        ("S", "S"),
        ("V V", "I"),
        ("V", "V"),
        ("S T S T S T", "I"),
        ("V T V", "T^-1"),
        ("V S V", "S"),
    ],
)
def test_word_normal_form(word: str, normal: str) -> None:
    assert str(word_normal_form(GroupWord.parse(word))) == normal


@pytest.mark.parametrize(
    "word",
    ["T^-1 S T^-3 S V", "S T^2 S T^-4 V S", "V T^3 S T S T^-2"],
)
def test_normal_form_denotes_the_same_element(word: str) -> None:
    w = GroupWord.parse(word)
    assert word_normal_form(w).matrix().equal_up_to_sign(w.matrix())
    assert word_normal_form(word_normal_form(w)) == word_normal_form(w)


@pytest.mark.parametrize("text", ["X", "S^2", "T^0"])
def test_invalid_words(text: str) -> None:
    with pytest.raises(ValidationError, match="Invalid"):
        GroupWord.parse(text)


@pytest.mark.parametrize(
    ("a", "b", "expected"),
    [
        ((2,), (2,), True),
        ((3, 2), (2, 3), True),
        ((3,), (2, 2), True),
        ((3, 4, 2), (2, 3, 2, 3), True),
        ((3,), (2,), False),
    ],
)
def test_verify_algebraic_matching(
    a: tuple[int, ...],
    b: tuple[int, ...],
    expected: bool,
) -> None:
    assert verify_algebraic_matching(a, b) is expected


def test_algebraic_matching_requires_quotients_of_two() -> None:
    with pytest.raises(QuotientBelowTwoError):
        verify_algebraic_matching((1,), (2,))


# -------------------------------------------------------------------------------------
#   Families
# -------------------------------------------------------------------------------------


@pytest.mark.parametrize("n", [2, 3, 4])
def test_family_interval_is_the_interval_of_one_over_n(n: int) -> None:
    m = family_interval(n)
    expected, *_ = interval_for_rational(Fraction(1, n))
    assert (m.lo, m.hi) == (expected.lo, expected.hi)
    assert (m.k1, m.k2) == (2, n)


def test_family_index_is_checked() -> None:
    with pytest.raises(ValidationError, match="expected n >= 2"):
        family_interval(1)
    with pytest.raises(ValidationError, match="expected n >= 1"):
        sqrt3_family(0)


def test_sqrt3_family_first_member() -> None:
    m = sqrt3_family(1)
    assert (m.k1, m.k2) == (4, 5)
    assert m.coding_alpha == (Digit(3, 1), Digit(4, -1), Digit(2, -1))
    assert not m.interval.contains(SQRT3_LIMIT)


@pytest.mark.slow
def test_sqrt3_family_accumulates() -> None:
    first, second = sqrt3_family(1), sqrt3_family(2)
    assert (second.k1, second.k2) == (5, 7)
    limit = SQRT3_LIMIT.to_float
    assert abs(second.interval.midpoint_float - limit) < abs(
        first.interval.midpoint_float - limit
    )
    assert second.size(6) < first.size(6)


def test_largest_decreasing_prediction() -> None:
    m = largest_decreasing_prediction(3)
    assert (m.k1, m.k2) == (6, 5)
    assert m.label_texts() == ("3,2,1,2,1", "3,2,1,3")
    assert Fraction(1, 4) < m.lo < m.hi < Fraction(1, 3)


# -------------------------------------------------------------------------------------
#   Envelope
# -------------------------------------------------------------------------------------


def test_envelope_flags_tiny_intervals_and_skips_the_root() -> None:
    third = Fraction(1, 3)
    tiny = MatchingInterval(
        Interval.of(third, third + Fraction(1, 10**9)),
        2,
        2,
        (),
        (),
        Monotonicity.CONSTANT,
    )
    root = MatchingInterval(
        Interval.of(Fraction(999, 1000), 1, hi_closed=True),
        1,
        1,
        (),
        (),
        Monotonicity.CONSTANT,
    )
    assert root.is_root
    assert envelope_violations([tiny, root]) == [tiny]


# -------------------------------------------------------------------------------------
#   Scanning
# -------------------------------------------------------------------------------------


@pytest.mark.parametrize(
    ("alpha", "expected"),
    [(0.45, (2, 2)), (Fraction(41, 100), (3, 3))],
)
def test_scan_candidate(alpha: float | Fraction, expected: tuple[int, int]) -> None:
    candidate = scan_candidate(alpha)
    assert candidate is not None
    assert (candidate.k1, candidate.k2) == expected
    assert candidate.seed == Fraction(alpha)


@pytest.mark.parametrize(
    ("alpha", "kmax", "match"),
    [(0.45, 0, "Invalid kmax"), (0.45, 65, "Invalid kmax"), (1.0, 10, "Invalid alpha")],
)
def test_scan_candidate_rejects(alpha: float, kmax: int, match: str) -> None:
    with pytest.raises(ValidationError, match=match):
        scan_candidate(alpha, kmax)


def test_scan_candidate_without_match() -> None:
    assert scan_candidate(Fraction(41, 100), kmax=2) is None


def test_matching_exponents() -> None:
    assert matching_exponents(Fraction(41, 100)) == (3, 3)
    assert matching_exponents(Fraction(41, 100), kmax=2) is None


def test_random_seeds_are_sorted_and_reproducible() -> None:
    seeds = random_seeds((0.4, 0.5), 6, rng_seed=7)
    assert seeds == sorted(seeds)
    assert seeds == random_seeds((0.4, 0.5), 6, rng_seed=7)
    assert all(Fraction(0.4) < s < Fraction(0.5) for s in seeds)


def test_scan_pipeline_finds_both_intervals() -> None:
    report = scan_pipeline((0.40, 0.43), 12, kmax=20, rng_seed=3)
    assert [(m.k1, m.k2) for m in report.intervals] == [(3, 3), (2, 2)]
    assert [m.lo for m in report.intervals] == [SQRT10_LEFT, SQRT2_M1]
    assert report.failures == ()
    assert report.unmatched == 0
