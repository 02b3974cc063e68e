import random
from fractions import Fraction as F

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from quantlb.errors import SummaryNotStreaming
from quantlb.oracle import check_quantile_answer
from quantlb.summaries import GKSummary, OfflineSummary, make_summary, summary_factory
from quantlb.suite import PHI_GRID, order_isomorphism, quantile_prefix_check, random_stream

STREAMING = ["gk", "gk-greedy"]


def ints(lo, hi):
    return [F(v) for v in range(lo, hi + 1)]


def test_insert_examples():
    d = GKSummary(10)
    d.process(F(5))
    assert d.tuples == [(5, 1, 0)]
    d.process(F(9))
    assert d.tuples[-1] == (9, 1, 0)


@pytest.mark.parametrize("policy", ["gk", "gk-greedy"])
def test_invariants_hold_throughout(policy):
    d = GKSummary(10, policy)
    for x in ints(1, 100):
        d.process(x)
        assert d.invariant_violations() == []
    assert sum(g for _, g, _ in d.tuples) == 100
    assert all(g + delta <= 20 for _, g, delta in d.tuples)


def test_compress_fixpoints():
    d = GKSummary(10, "none")
    d.extend([F(1), F(2)])
    before = d.tuples
    d.compress_greedy()
    assert d.tuples == before
    d = GKSummary(100, "gk-greedy")
    d.extend(ints(1, 30))
    before = d.tuples
    d.compress()
    assert d.tuples == before


def test_greedy_compression_saves_space():
    greedy, plain = GKSummary(16, "gk-greedy"), GKSummary(16, "none")
    greedy.extend(ints(1, 1000))
    plain.extend(ints(1, 1000))
    assert greedy.meter.max_items_total < plain.meter.max_items_total


@pytest.mark.parametrize("name", STREAMING)
def test_median_of_1_to_100(name):
    d = make_summary(name, 10)
    xs = ints(1, 100)
    d.extend(xs)
    _, answer = d.query(F(1, 2))
    assert 40 <= answer <= 60
    assert check_quantile_answer(xs, F(1, 2), answer, F(1, 10))


@pytest.mark.parametrize("name", STREAMING)
def test_single_item_and_extremes(name):
    d = make_summary(name, 8)
    d.process(F(7))
    assert all(d.query(phi) == (1, 7) for phi in PHI_GRID[::10])
    d.extend(random_stream(random.Random(1), 300))
    assert d.query(0)[1] == min(d.stored) and d.query(1)[1] == max(d.stored)


@pytest.mark.parametrize("name", STREAMING)
def test_random_512_every_prefix(name):
    stream = random_stream(random.Random(512), 512)
    assert quantile_prefix_check(make_summary(name, 8), stream) == []


@pytest.mark.parametrize("name", STREAMING)
def test_never_forgets_four_consecutive(name):
    d = make_summary(name, 6)
    xs = ints(1, 12)
    d.extend(xs)
    kept = set(d.stored)
    for start in range(len(xs) - 3):
        assert any(x in kept for x in xs[start:start + 4])


@pytest.mark.parametrize("m", [5, 6, 8, 16])
def test_offline_baseline(m):
    n = 12 * m
    xs = random_stream(random.Random(m), n)
    d = OfflineSummary(m)
    d.extend(xs)
    d.finalize()
    assert len(d.stored) == -(-m // 2)
    for phi in PHI_GRID:
        _, answer = d.query(phi)
        assert check_quantile_answer(xs, phi, answer, F(1, m))
    with pytest.raises(SummaryNotStreaming):
        d.process(F(10 ** 6))


def test_order_isomorphism():
    result = order_isomorphism(STREAMING, n_streams=3, n=200)
    assert result.ok and result.checked > 1000, result.line()


def test_factories():
    with pytest.raises(ValueError):
        make_summary("kll", 8)
    with pytest.raises(ValueError):
        summary_factory("nope", 8)
    with pytest.raises(ValueError):
        GKSummary(8, "band")
    assert summary_factory("gk", 8)() is not summary_factory("gk", 8)()


@settings(max_examples=40, deadline=None)
@given(st.lists(st.integers(-10 ** 6, 10 ** 6), unique=True, min_size=1, max_size=150),
       st.sampled_from(STREAMING), st.integers(2, 40))
def test_gk_invariants_and_answers(values, name, m):
    xs = [F(v) for v in values]
    d = make_summary(name, m)
    d.extend(xs)
    assert d.invariant_violations() == []
    assert list(d.stored) == sorted(d.stored)
    for phi in PHI_GRID[::5]:
        assert check_quantile_answer(xs, phi, d.query(phi)[1], F(1, m))
