# ---------------------------------------------------------------------
#   Tests for exact quadratic surds and integer matrices
# ---------------------------------------------------------------------

import math
from fractions import Fraction

import mpmath
import numpy as np
import pytest

from alphamatch import IntMatrix2, QuadSurd, ValidationError, mobius_apply
from alphamatch.exactnum import (
    format_surd,
    quadratic_roots,
    rational_between,
    square_split,
    surd_cmp,
    surd_floor,
    to_surd,
)
from alphamatch.exceptions import (
    DegenerateLinearError,
    DivisionByZeroError,
    ImplicitConversionError,
    MixedRadicandError,
    NegativeDiscriminantError,
    PoleAtInputError,
    SurdFormatError,
)

G = QuadSurd(-1, 1, 5, 2)
SQRT2 = QuadSurd(0, 1, 2)

# -------------------------------------------------------------------------------------
#   Construction and normal form
# -------------------------------------------------------------------------------------


@pytest.mark.parametrize(
    ("d", "expected"),
    [(0, (1, 0)), (1, (1, 1)), (2, (1, 2)), (12, (2, 3)), (72, (6, 2)), (49, (7, 1))],
)
def test_square_split(d: int, expected: tuple[int, int]) -> None:
    assert square_split(d) == expected


def test_square_split_rejects_negative() -> None:
    with pytest.raises(NegativeDiscriminantError, match="-1 < 0"):
        square_split(-1)


@pytest.mark.parametrize(
    ("surd", "fields"),
    [
        (QuadSurd(0, 1, 12), (0, 2, 3, 1)),
        (QuadSurd(3, 1, 4), (5, 0, 0, 1)),
        (QuadSurd(2, 0, 7, 4), (1, 0, 0, 2)),
        (QuadSurd(2, 2, 5, -4), (-1, -1, 5, 2)),
        (QuadSurd(4, 2, 8, 2), (2, 2, 2, 1)),
    ],
)
def test_normal_form(surd: QuadSurd, fields: tuple[int, int, int, int]) -> None:
    assert (surd.p, surd.q, surd.d, surd.r) == fields


@pytest.mark.parametrize("args", [(1.5,), (1, 1, 2.0), (1, 0, 0, True)])
def test_non_integer_coefficients_raise(args: tuple[object, ...]) -> None:
    with pytest.raises(ValidationError, match="expected integer"):
        QuadSurd(*args)  # type: ignore[arg-type]


def test_zero_denominator_raises() -> None:
    with pytest.raises(DivisionByZeroError, match="Division by zero surd"):
        QuadSurd(1, r=0)


def test_negative_radicand_raises() -> None:
    with pytest.raises(NegativeDiscriminantError):
        QuadSurd(0, 1, -2)


def test_rational_accessors() -> None:
    half = QuadSurd(1, r=2)
    assert half.is_rational
    assert half.as_fraction == Fraction(1, 2)
    with pytest.raises(ValidationError, match="is irrational"):
        _ = G.as_fraction


# -------------------------------------------------------------------------------------
#   Field operations
# -------------------------------------------------------------------------------------


def test_golden_conjugate_identities() -> None:
    assert G * G + G == 1
    assert 1 / G == G + 1
    assert G.conjugate == QuadSurd(-1, -1, 5, 2)
    assert G * G.conjugate == -1


def test_mixed_with_rationals() -> None:
    assert SQRT2 * SQRT2 == 2
    assert Fraction(1, 2) + SQRT2 - Fraction(1, 2) == SQRT2
    assert 3 - SQRT2 == -(SQRT2 - 3)
    assert (SQRT2 / 2) * 2 == SQRT2


def test_square_multiple_radicands_combine() -> None:
    assert SQRT2 * QuadSurd(0, 1, 8) == 4
    assert SQRT2 + QuadSurd(0, 1, 8) == QuadSurd(0, 3, 2)


def test_different_fields_raise_on_arithmetic() -> None:
    with pytest.raises(MixedRadicandError, match=r"sqrt\(2\) and sqrt\(3\)"):
        _ = SQRT2 + QuadSurd(0, 1, 3)


def test_inverse_of_zero_raises() -> None:
    with pytest.raises(DivisionByZeroError):
        QuadSurd(0).inverse()
    with pytest.raises(ZeroDivisionError):
        _ = 1 / QuadSurd(0)


# -------------------------------------------------------------------------------------
#   Order, floor and hashing
# -------------------------------------------------------------------------------------


def test_order_within_a_field() -> None:
    assert SQRT2 - 1 < G < Fraction(2, 3)
    assert G.sign == 1
    assert G.conjugate.sign == -1
    assert abs(G.conjugate) == -G.conjugate


def test_order_across_fields_uses_enclosures() -> None:
    assert SQRT2 < QuadSurd(0, 1, 3)
    assert surd_cmp(QuadSurd(0, 1, 3), SQRT2) == 1
    assert SQRT2 != QuadSurd(0, 1, 3)


@pytest.mark.parametrize(
    ("x", "expected"),
    [(SQRT2, 1), (-SQRT2, -2), (G, 0), (G.conjugate, -2), (QuadSurd(-7, r=2), -4)],
)
def test_floor(x: QuadSurd, expected: int) -> None:
    assert math.floor(x) == expected
    assert surd_floor(x) == expected


def test_truth_testing_is_refused() -> None:
    with pytest.raises(ImplicitConversionError, match="Compare against 0"):
        bool(G)


def test_equal_values_hash_alike() -> None:
    assert hash(QuadSurd(1, r=2)) == hash(Fraction(1, 2))
    assert hash(QuadSurd(0, 2, 2, 2)) == hash(SQRT2)
    assert len({SQRT2, QuadSurd(0, 1, 8) / 2, G}) == 2


# -------------------------------------------------------------------------------------
#   Evaluation
# -------------------------------------------------------------------------------------


def test_enclosure_brackets_the_value() -> None:
    lo, hi = SQRT2.enclosure(80)
    assert lo * lo < 2 < hi * hi
    assert hi - lo <= Fraction(1, 2**80)


def test_float_and_decimal() -> None:
    assert G.to_float == pytest.approx(0.6180339887498949)
    assert SQRT2.to_decimal(20) == "1.4142135623730950488"


def test_rational_between() -> None:
    r = rational_between(SQRT2 - 1, G)
    assert SQRT2 - 1 < r < G
    fine = rational_between(SQRT2 - 1, G, min_bits=200)
    assert SQRT2 - 1 < fine < G
    assert fine.denominator.bit_length() > 200


def test_rational_between_requires_order() -> None:
    with pytest.raises(ValidationError, match="Invalid bounds"):
        rational_between(G, G)


def test_to_surd_rejects_floats() -> None:
    assert to_surd(Fraction(3, 4)) == Fraction(3, 4)
    with pytest.raises(ValidationError, match="Invalid exact number"):
        to_surd(0.75)  # type: ignore[arg-type]


# -------------------------------------------------------------------------------------
#   Text format
# -------------------------------------------------------------------------------------


@pytest.mark.parametrize(
    ("surd", "text"),
    [
        (G, "(-1+1*sqrt(5))/2"),
        (G.conjugate, "(-1-1*sqrt(5))/2"),
        (QuadSurd(3, r=4), "3/4"),
        (QuadSurd(-2), "-2/1"),
    ],
)
def test_format_and_parse(surd: QuadSurd, text: str) -> None:
    assert format_surd(surd) == text
    assert QuadSurd.parse(text) == surd


def test_parse_accepts_plain_integers() -> None:
    assert QuadSurd.parse(" 5 ") == 5


@pytest.mark.parametrize("text", ["sqrt(5)", "(1+sqrt(5))/2", "1/2/3", ""])
def test_parse_rejects_malformed(text: str) -> None:
    with pytest.raises(SurdFormatError, match="Invalid surd text"):
        QuadSurd.parse(text)


# -------------------------------------------------------------------------------------
#   Quadratics
# -------------------------------------------------------------------------------------


def test_quadratic_roots_are_sorted() -> None:
    assert quadratic_roots(1, 1, -1) == (G.conjugate, G)
    assert quadratic_roots(-1, 0, 2) == (-SQRT2, SQRT2)
    assert quadratic_roots(1, -2, 1) == (QuadSurd(1), QuadSurd(1))


def test_linear_equation_carries_its_root() -> None:
    with pytest.raises(DegenerateLinearError) as e:
        quadratic_roots(0, 2, -1)
    assert e.value.root == Fraction(1, 2)
    with pytest.raises(DegenerateLinearError) as e:
        quadratic_roots(0, 0, 1)
    assert e.value.root is None


def test_complex_roots_raise() -> None:
    with pytest.raises(NegativeDiscriminantError, match="-4"):
        quadratic_roots(1, 0, 1)


# -------------------------------------------------------------------------------------
#   Matrices
# -------------------------------------------------------------------------------------


def test_matrix_algebra() -> None:
    t = IntMatrix2(1, 1, 0, 1)
    s = IntMatrix2(0, -1, 1, 0)
    assert t.power(3) == IntMatrix2(1, 3, 0, 1)
    assert t.power(-2) == IntMatrix2(1, -2, 0, 1)
    assert (s @ s).equal_up_to_sign(IntMatrix2.identity())
    assert (s @ s).canonical() == IntMatrix2.identity()
    m = IntMatrix2(0, 1, 1, 3)
    assert m.det == -1
    assert m @ m.inverse() == IntMatrix2.identity()


def test_non_unimodular_inverse_raises() -> None:
    with pytest.raises(ValidationError, match="determinant 2"):
        IntMatrix2(2, 0, 0, 1).inverse()


def test_mobius_apply() -> None:
    assert mobius_apply(IntMatrix2(0, 1, 1, 2), Fraction(1, 3)) == Fraction(3, 7)
    assert mobius_apply(IntMatrix2(0, 1, 1, 1), G) == G


def test_mobius_pole_raises() -> None:
    with pytest.raises(PoleAtInputError, match="Pole at input"):
        mobius_apply(IntMatrix2(1, 0, 1, -1), 1)
    with pytest.raises(PoleAtInputError):
        mobius_apply(IntMatrix2(1, 0, 2, 1), QuadSurd(-1, r=2))


# -------------------------------------------------------------------------------------
#   Random values
# -------------------------------------------------------------------------------------


def _random_surd(rng: np.random.Generator) -> QuadSurd:
    p, q = (int(v) for v in rng.integers(-60, 61, size=2))
    d = int(rng.integers(2, 300))
    r = int(rng.integers(1, 40))
    return QuadSurd(p, q, d, r)


def _mp(x: QuadSurd) -> mpmath.mpf:
    return (x.p + x.q * mpmath.sqrt(x.d)) / x.r


def test_random_text_round_trip() -> None:
    rng = np.random.default_rng(7)
    for _ in range(200):
        x = _random_surd(rng)
        assert QuadSurd.parse(format_surd(x)) == x
        assert QuadSurd.parse(str(x)) == x


def test_random_floor_and_order_agree_with_mpmath() -> None:
    rng = np.random.default_rng(11)
    with mpmath.workdps(60):
        for _ in range(300):
            x, y = _random_surd(rng), _random_surd(rng)
            assert surd_floor(x) == int(mpmath.floor(_mp(x)))
            diff = _mp(x) - _mp(y)
            if abs(diff) < mpmath.mpf(10) ** -40:
                assert surd_cmp(x, y) == 0
            else:
                assert surd_cmp(x, y) == int(mpmath.sign(diff))


def _random_matrix(rng: np.random.Generator) -> IntMatrix2:
    while True:
        a, b, c, d = (int(v) for v in rng.integers(-6, 7, size=4))
        m = IntMatrix2(a, b, c, d)
        if m.det != 0:
            return m


def test_random_mobius_composition() -> None:
    rng = np.random.default_rng(13)
    for _ in range(100):
        a, b = _random_matrix(rng), _random_matrix(rng)
        x = QuadSurd(int(rng.integers(-9, 10)), int(rng.integers(1, 5)), 7, 3)
        assert mobius_apply(a @ b, x) == mobius_apply(a, mobius_apply(b, x))
