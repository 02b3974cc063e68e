from fractions import Fraction as F

import pytest

from quantlb.errors import ArrayMismatch, EmptyStream, NotInStream
from quantlb.oracle import (
    QuantileChecker,
    allowed_ranks,
    brute_gap,
    check_quantile_answer,
    check_rank_answer,
    count_at_most,
    exact_quantile,
    gap_witness,
    no_index_answers,
    target_rank,
)
from quantlb.worked_example import restricted_ranks_fixture


def ints(lo, hi):
    return [F(v) for v in range(lo, hi + 1)]


def test_exact_quantile_examples():
    s = [F(5), F(1), F(3)]
    assert exact_quantile(s, 1) == 5
    assert exact_quantile(s, F(1, 2)) == 1
    assert exact_quantile(ints(1, 100), F(37, 100)) == 37
    assert exact_quantile(s, 0) == 1
    with pytest.raises(EmptyStream):
        exact_quantile([], F(1, 2))


def test_target_and_allowed_ranks():
    assert target_rank(0, 10) == 1
    assert target_rank(F(1, 2), 3) == 1
    assert allowed_ranks(F(1, 2), 100, F(1, 10)) == range(40, 61)
    assert allowed_ranks(1, 100, F(1, 10)) == range(90, 101)


def test_check_quantile_answer_examples():
    s = ints(1, 100)
    assert check_quantile_answer(s, F(1, 2), F(41), F(1, 10))
    verdict = check_quantile_answer(s, F(1, 2), F(39), F(1, 10))
    assert not verdict and (verdict.lo, verdict.hi, verdict.observed) == (40, 60, 39)
    with pytest.raises(NotInStream):
        check_quantile_answer(s, F(1, 2), F(1, 2), F(1, 10))
    checker = QuantileChecker(s)
    assert checker.ok(F(1, 2), F(60), F(1, 10)) and not checker.ok(F(1, 2), F(61), F(1, 10))


def test_check_rank_answer():
    s = ints(1, 100)
    assert count_at_most(s, F(41, 2)) == 20
    assert check_rank_answer(s, F(41, 2), 30, F(1, 10))
    assert not check_rank_answer(s, F(41, 2), 31, F(1, 10))


def test_brute_gap_examples():
    pi, rho, s_pi, s_rho, iv = restricted_ranks_fixture()
    report = brute_gap(pi, rho, s_pi.I, s_rho.I, iv, iv)
    assert report.size == 5 and report.i == 2
    xs = ints(1, 9)
    assert brute_gap(xs, xs, xs, xs).size == 1
    with pytest.raises(ArrayMismatch):
        brute_gap(xs, xs, xs, xs[:3])


def test_gap_witness_and_no_index_answers():
    # stored items 1 and 30 of 1..30 leave a hole of 29 ranks
    pi = ints(1, 30)
    rho = ints(101, 130)
    I_pi, I_rho = [F(1), F(30)], [F(101), F(130)]
    report = brute_gap(pi, rho, I_pi, I_rho)
    assert report.size == 29
    phi = gap_witness(pi, rho, I_pi, I_rho, report, F(1, 10))
    assert phi is not None
    assert no_index_answers(pi, rho, I_pi, I_rho, phi, F(1, 10))
    # fully stored streams can always answer
    assert gap_witness(pi, rho, pi, rho, brute_gap(pi, rho, pi, rho), F(1, 10)) is None
