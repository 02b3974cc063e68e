import pickle
from fractions import Fraction as F

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from quantlb.errors import EmptyInterval
from quantlb.universe import (
    NEG_INF,
    POS_INF,
    Ordering,
    between,
    compare,
    format_bound,
    format_item,
    generate_increasing,
    item,
    parse_bound,
    parse_item,
    to_fraction,
)

fractions = st.fractions(max_denominator=10 ** 6)
bounds = st.one_of(fractions, st.just(NEG_INF), st.just(POS_INF))


def test_compare_examples():
    assert compare(F(1, 2), F(1, 2)) is Ordering.EQ
    assert compare(F(3, 8), F(1, 2)) is Ordering.LT
    assert compare(F(7, 16), F(3, 8)) is Ordering.GT


def test_between_examples():
    assert between(F(0), F(1)) == F(1, 2)
    assert between(NEG_INF, POS_INF) == 0
    assert between(F(3, 8), F(1, 2)) == F(7, 16)
    assert between(NEG_INF, F(5)) == 4
    assert between(F(5), POS_INF) == 6


def test_between_rejects_empty():
    with pytest.raises(EmptyInterval):
        between(F(1), F(1))
    with pytest.raises(EmptyInterval):
        between(POS_INF, NEG_INF)


def test_generate_increasing_examples():
    assert generate_increasing(F(0), F(1), 3) == [F(1, 4), F(2, 4), F(3, 4)]
    assert generate_increasing(F(0), F(1), 1) == [F(1, 2)]


def test_generate_increasing_brute_force_order():
    lo, hi = F(7, 16), F(1, 2)
    xs = generate_increasing(lo, hi, 12)
    assert len(xs) == 12
    for i, a in enumerate(xs):
        assert lo < a < hi
        for b in xs[i + 1:]:
            assert a < b


def test_generate_increasing_unbounded_sides():
    assert generate_increasing(NEG_INF, POS_INF, 4) == [1, 2, 3, 4]
    assert generate_increasing(F(10), POS_INF, 2) == [11, 12]
    assert generate_increasing(NEG_INF, F(0), 3) == [-3, -2, -1]
    with pytest.raises(ValueError):
        generate_increasing(F(0), F(1), 0)
    with pytest.raises(EmptyInterval):
        generate_increasing(F(1), F(0), 2)


def test_sentinels_order_and_pickle():
    assert NEG_INF < F(-10 ** 30) < POS_INF
    assert F(10 ** 30) < POS_INF and not POS_INF < F(0)
    assert NEG_INF < POS_INF and NEG_INF == NEG_INF and NEG_INF != POS_INF
    assert pickle.loads(pickle.dumps(POS_INF)) is POS_INF


def test_text_formats():
    assert format_item(F(7, 16)) == "7/16"
    assert format_item(F(-3)) == "-3/1"
    assert parse_item("7/16") == F(7, 16)
    assert format_bound(NEG_INF) == "-inf" and format_bound(POS_INF) == "+inf"
    assert parse_bound("-inf") is NEG_INF and parse_bound("+inf") is POS_INF
    assert parse_bound("-3/1") == -3


def test_item_rejects_floats_but_to_fraction_is_exact_on_repr():
    with pytest.raises(TypeError):
        item(0.5)
    assert item("3/4") == F(3, 4)
    assert to_fraction(0.37) == F(37, 100)


@given(fractions, fractions, fractions)
def test_total_order(a, b, c):
    outcomes = [compare(a, b) is o for o in Ordering]
    assert sum(outcomes) == 1
    assert compare(a, b) == -compare(b, a)
    if compare(a, b) is Ordering.LT and compare(b, c) is Ordering.LT:
        assert compare(a, c) is Ordering.LT


@given(bounds, bounds)
def test_between_strictly_inside(lo, hi):
    if not lo < hi:
        with pytest.raises(EmptyInterval):
            between(lo, hi)
        return
    x = between(lo, hi)
    assert lo < x < hi


@settings(max_examples=50)
@given(bounds, bounds, st.integers(min_value=1, max_value=40))
def test_generate_increasing_properties(lo, hi, m):
    if not lo < hi:
        return
    xs = generate_increasing(lo, hi, m)
    assert len(xs) == m
    assert all(lo < x < hi for x in xs)
    assert all(a < b for a, b in zip(xs, xs[1:]))
    assert xs == generate_increasing(lo, hi, m)


@given(fractions)
def test_format_round_trip(x):
    assert parse_item(format_item(x)) == x


def test_nesting_never_exhausts():
    lo, hi = F(0), F(1)
    for step in range(10_000):
        x = between(lo, hi)
        assert lo < x < hi
        if step % 2:
            lo = x
        else:
            hi = x
    assert lo < hi
