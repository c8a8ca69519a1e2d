from decimal import Decimal, localcontext
from fractions import Fraction

import pytest
from hypothesis import given, strategies as st

from c0dyn.rigor import (
    EnclosureError,
    Exact,
    Interval,
    as_rational,
    exp_neg_enclosure,
    exp_neg_partial_sum,
    format_rational,
    interval_product,
    measure_value_from_json,
    parse_rational,
)

fractions = st.fractions(max_denominator=10 ** 6)
unit = st.fractions(min_value=Fraction(1, 10 ** 4), max_value=1, max_denominator=10 ** 4)


def _decimal_exp_neg(x: Fraction, digits: int = 80) -> Fraction:
    with localcontext() as ctx:
        ctx.prec = digits
        return Fraction((-(Decimal(x.numerator) / Decimal(x.denominator))).exp())


@given(fractions)
def test_format_parse_round_trip(q):
    assert parse_rational(format_rational(q)) == q


def test_format_always_has_denominator():
    assert format_rational(Fraction(3)) == "3/1"
    assert format_rational(Fraction(-2, 4)) == "-1/2"


@pytest.mark.parametrize("bad", ["", "0.5", "1e3", "1/0", "x/2"])
def test_parse_rejects(bad):
    with pytest.raises(ValueError):
        parse_rational(bad)


def test_as_rational_refuses_floats_and_bools():
    with pytest.raises(TypeError):
        as_rational(0.5)
    with pytest.raises(TypeError):
        as_rational(True)
    assert as_rational("3/6") == Fraction(1, 2)
    assert as_rational(4) == 4


@given(unit, st.integers(min_value=1, max_value=60))
def test_enclosure_brackets_and_is_narrow(x, bits):
    width = Fraction(1, 2 ** bits)
    enc = exp_neg_enclosure(x, width)
    assert enc.width <= width
    truth = _decimal_exp_neg(x)
    slop = Fraction(1, 10 ** 70)
    assert enc.lo - slop <= truth <= enc.hi + slop


def test_enclosure_matches_alternating_partial_sums():
    x = Fraction(1, 3)
    enc = exp_neg_enclosure(x, Fraction(1, 2 ** 10))
    odd = [exp_neg_partial_sum(x, j) for j in range(1, 12, 2)]
    even = [exp_neg_partial_sum(x, j) for j in range(0, 12, 2)]
    assert enc.lo in odd and enc.hi in even
    assert all(a <= b for a, b in zip(odd, odd[1:]))
    assert all(a >= b for a, b in zip(even, even[1:]))


def test_e_to_minus_third_reference():
    enc = exp_neg_enclosure(Fraction(1, 3), Fraction(1, 1024))
    assert Fraction(7165, 10000) < enc.hi and enc.lo < Fraction(7166, 10000)


def test_coarse_width_at_one():
    enc = exp_neg_enclosure(1, 2)
    assert (enc.lo, enc.hi) == (0, 1)


@pytest.mark.parametrize("x", [0, Fraction(-1, 2), Fraction(3, 2)])
def test_enclosure_domain(x):
    with pytest.raises(EnclosureError):
        exp_neg_enclosure(x, Fraction(1, 8))


def test_enclosure_width_must_be_positive():
    with pytest.raises(EnclosureError):
        exp_neg_enclosure(Fraction(1, 2), 0)


def test_measure_values():
    assert Exact(Fraction(1, 4)).lo == Exact(Fraction(1, 4)).hi == Fraction(1, 4)
    with pytest.raises(ValueError):
        Exact(Fraction(-1, 2))
    with pytest.raises(EnclosureError):
        Interval(Fraction(1, 2), Fraction(1, 4))
    for v in (Exact(Fraction(2, 3)), Interval(Fraction(1, 3), Fraction(1, 2))):
        assert measure_value_from_json(v.to_json()) == v


def test_interval_product():
    assert interval_product([Exact(Fraction(1, 2)), Exact(Fraction(1, 3))]) == Exact(Fraction(1, 6))
    mixed = interval_product([Exact(Fraction(1, 2)), Interval(Fraction(1, 4), Fraction(1, 2))])
    assert mixed == Interval(Fraction(1, 8), Fraction(1, 4))
