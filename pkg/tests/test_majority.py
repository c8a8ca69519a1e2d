from fractions import Fraction
from math import comb

import pytest
from hypothesis import given, settings, strategies as st

from c0dyn import majority
from c0dyn.checks import enumerate_overlap
from c0dyn.majority import SearchCapExceeded, ai_find, overlap, symdiff_shift


@pytest.mark.parametrize("n", [1, 2, 3])
@pytest.mark.parametrize("d", [0, 1, 2, 3, 4, 7])
def test_overlap_against_enumeration(n, d):
    assert overlap(n, d) == enumerate_overlap(n, d)


def test_known_values():
    assert overlap(1, 1) == Fraction(3, 8)
    assert overlap(2, 1) == Fraction(13, 32)
    assert symdiff_shift(2, 1) == Fraction(3, 16)


@given(st.integers(1, 40))
def test_symdiff_one_closed_form(n):
    assert symdiff_shift(n, 1) == Fraction(comb(2 * n, n), 2 ** (2 * n + 1))


@given(st.integers(1, 30), st.integers(0, 200))
def test_overlap_is_even_and_independent_far_out(n, d):
    assert overlap(n, d) == overlap(n, -d)
    if d >= 2 * n + 1:
        assert overlap(n, d) == Fraction(1, 4)
    assert symdiff_shift(n, d) == 1 - 2 * overlap(n, d)


@given(st.integers(1, 25), st.integers(0, 30), st.integers(0, 30))
def test_symdiff_triangle_inequality(n, a, b):
    assert symdiff_shift(n, a + b) <= symdiff_shift(n, a) + symdiff_shift(n, b)


@given(st.integers(1, 30), st.integers(0, 40), st.fractions(0, 1, max_denominator=1000))
def test_integer_comparison_matches_fractions(n, d, slack):
    assert majority.symdiff_at_most(n, d, slack) == (symdiff_shift(n, d) <= slack)


def test_binomial_row():
    assert majority.binomial_row(5) == [comb(5, k) for k in range(6)]


@settings(max_examples=30)
@given(st.integers(1, 3), st.fractions(Fraction(1, 50), Fraction(1, 2), max_denominator=200))
def test_ai_find_is_least(radius, slack):
    n = ai_find(radius, slack)
    assert majority.max_symdiff(n, radius) <= slack
    assert n == 1 or majority.max_symdiff(n - 1, radius) > slack


def test_ai_find_start_hint_does_not_change_answer():
    slack = Fraction(1, 40)
    exact = ai_find(2, slack)
    assert ai_find(2, slack, start=exact // 2) == exact


def test_ai_find_radius_zero():
    assert ai_find(0, Fraction(0)) == 1


def test_ai_find_cap():
    with pytest.raises(SearchCapExceeded):
        ai_find(1, Fraction(1, 100), cap=5)
    with pytest.raises(SearchCapExceeded):
        ai_find(1, Fraction(0))
    with pytest.raises(SearchCapExceeded):
        ai_find(1, Fraction(1, 10 ** 12))


def test_overlap_table():
    table = majority.overlap_table(2, 3)
    assert table[-1] == table[1] == overlap(2, 1)


def test_invalid_n():
    with pytest.raises(ValueError):
        overlap(0, 1)
    with pytest.raises(ValueError):
        majority.majority_measure(0)
