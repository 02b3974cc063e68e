"""The ten acceptance criteria; each test records one PASS/FAIL line."""

import time
from fractions import Fraction as F

import pytest

from acceptance_log import record
from doubles import ForgetfulDouble, LeakyDouble
from quantlb import oracle
from quantlb.adversary import run_adversary
from quantlb.attacks import rank_attack
from quantlb.summaries import summary_factory
from quantlb.summary_api import check_indistinguishable
from quantlb.suite import adversary_grid, named_subjects, oracle_equivalence, rank_equivalence, space_trend
from quantlb.worked_example import fixture_gaps, replay_example

SUBJECTS = ("gk", "gk-greedy")
GRID_EPS_INV = (18, 32)
GRID_K = range(1, 11)


@pytest.fixture(scope="module")
def grid():
    """The criterion-2 grid, run once and shared by criteria 3 to 6."""
    start = time.perf_counter()
    results, skipped = adversary_grid(named_subjects(SUBJECTS), GRID_EPS_INV, GRID_K, cross_check_upto=4)
    return results, skipped, time.perf_counter() - start


def test_criterion_01_gk_oracle_equivalence():
    start = time.perf_counter()
    result = oracle_equivalence(["gk"], 200, sizes=(64, 256, 512), eps_invs=(8, 16, 32), seed=1)
    elapsed = time.perf_counter() - start
    ok = result.ok and elapsed <= 120
    record(1, ok, f"GK oracle equivalence: {result.failed} violations in {result.checked} answers, {elapsed:.0f}s")
    assert result.ok, result.line()
    sizes = [n for n in (64, 256, 512) for _ in range(3)]
    assert result.checked == sum(sizes[s % 9] * 101 for s in range(200))
    assert elapsed <= 120


def test_criterion_02_indistinguishability(grid):
    results, skipped, elapsed = grid
    res = results["indistinguishability"]
    # an independent replay of a finished construction through the public checker
    replays = []
    for name in SUBJECTS:
        run = run_adversary(summary_factory(name, 18), 18, 6, check_every_prefix=False)
        replays.append(bool(check_indistinguishable(summary_factory(name, 18), run.pi.items, run.rho.items)))
    ok = res.ok and not skipped and all(replays) and elapsed <= 300
    record(2, ok, f"indistinguishable after every prefix: {res.checked} prefixes, {res.failed} violations, "
                  f"{elapsed:.0f}s")
    assert not skipped
    assert res.ok, res.line()
    assert all(replays)
    assert elapsed <= 300


def test_criterion_03_root_gap_bound(grid):
    res = grid[0]["gap_bound"]
    ok = res.ok and res.checked == len(SUBJECTS) * len(GRID_EPS_INV) * len(GRID_K)
    record(3, ok, f"root full gap <= 2 eps N: {res.checked} runs, {res.failed} violations")
    assert ok, res.line()


def test_criterion_04_claim_gaps(grid):
    res = grid[0]["gap_split"]
    record(4, res.ok and res.checked > 0, f"g >= g' + g'' - 1: {res.checked} internal nodes, {res.failed} violations")
    assert res.ok and res.checked > 0, res.line()


def test_criterion_05_space_gap_inequality(grid):
    res = grid[0]["space_gap"]
    expected = len(SUBJECTS) * sum(2 ** k - 1 for m in GRID_EPS_INV for k in GRID_K)
    ok = res.ok and res.checked == expected
    record(5, ok, f"space-gap inequality: {res.checked} nodes, {res.failed} violations")
    assert ok, res.line()


def test_criterion_06_refinement_properties(grid):
    results = grid[0]
    parts = [results[name] for name in ("fresh_intervals", "rank_ordering", "oracle_gap")]
    ok = all(p.ok and p.checked > 0 for p in parts)
    record(6, ok, "; ".join(f"{p.name}: {p.checked} checks, {p.failed} violations" for p in parts))
    for p in parts:
        assert p.ok and p.checked > 0, p.line()


def test_criterion_07_worked_example():
    report = replay_example()
    gaps = fixture_gaps()
    checks = {
        "spine": report["spine"] == [12, 24, 48],
        "checkpoints": report["checkpoints"] == [12, 24, 36, 48],
        "length": report["n_total"] == 48,
        "leaves": report["leaves"] == 4 and report["per_leaf"] == [12, 12, 12, 12],
        "fixture_5": gaps["restricted_ranks"]["size"] == 5,
        "fixture_4": gaps["first_leaf"]["size"] == 4,
    }
    ok = all(checks.values())
    record(7, ok, f"worked example: spine {report['spine']}, {report['leaves']} leaves x {report['per_leaf'][0]}, "
                  f"fixture gaps {gaps['restricted_ranks']['size']} and {gaps['first_leaf']['size']}")
    assert ok, checks


def test_criterion_08_rank_attack():
    m = 32
    outcomes = [rank_attack(summary_factory("gk", m), m, k) for k in range(4, 11)]
    attack_ok = all(o.survived and o.gap_bound_ok for o in outcomes)
    for o in outcomes:
        assert o.details["forward_gap"] * m <= 2 * m * 2 ** o.k + 2 * m
    oracle_res = rank_equivalence(36, sizes=(64, 256, 512), eps_invs=(8, 16, 32), seed=3)
    ok = attack_ok and oracle_res.ok
    worst = max(o.details["forward_gap"] - 2 * 2 ** o.k for o in outcomes)
    record(8, ok, f"rank attack k=4..10 survived with gap - 2 eps N <= {worst}; "
                  f"{oracle_res.checked} rank answers, {oracle_res.failed} off")
    assert attack_ok, [o.witness for o in outcomes if not o.ok]
    assert oracle_res.ok, oracle_res.line()


def test_criterion_09_space_trend():
    start = time.perf_counter()
    rows = space_trend("gk", 32, range(6, 15), seed=9)
    elapsed = time.perf_counter() - start
    worst = max(r.ratio for r in rows)
    ok = worst <= 2 and elapsed <= 600 and [r.k for r in rows] == list(range(6, 15))
    record(9, ok, f"GK peak / ((1/eps)(k+2)) ratio to k=6 at most {float(worst):.3f} over k=6..14, {elapsed:.0f}s")
    assert worst <= 2
    assert elapsed <= 600


def test_criterion_10_negative_controls():
    m, k = 18, 4
    n = m * 2 ** k
    eps = F(1, m)
    run = run_adversary(lambda: ForgetfulDouble(m, n), m, k)
    gap = run.full_gap()
    gap_bound_fails = bool(run.checks()["gap_bound"]) and gap.size * m > 2 * n
    pair = run.pair
    phi = oracle.gap_witness(pair.pi, pair.rho, pair.d_pi.stored, pair.d_rho.stored, gap, eps)
    witness_ok = phi is not None and oracle.no_index_answers(
        pair.pi, pair.rho, pair.d_pi.stored, pair.d_rho.stored, phi, eps)
    if witness_ok:
        (_, a), (_, b) = pair.d_pi.query(phi), pair.d_rho.query(phi)
        witness_ok = not (oracle.check_quantile_answer(pair.pi, phi, a, eps)
                          and oracle.check_quantile_answer(pair.rho, phi, b, eps))

    base = run_adversary(summary_factory("gk", m), m, 2)
    leak = check_indistinguishable(lambda: LeakyDouble(m), base.pi.items, base.rho.items)
    # the first leaf is identical in both streams; values differ from here on
    first_diff = 1 + next(t for t, (a, b) in enumerate(zip(base.pi.items, base.rho.items)) if a != b)

    ok = gap_bound_fails and witness_ok and not leak and leak.prefix == first_diff
    record(10, ok, f"forgetful double: gap {gap.size} > 2 eps N = {2 * n // m}, witness phi={phi}; "
                   f"value-leaking double flagged at prefix {leak.prefix}")
    assert gap_bound_fails
    assert witness_ok
    assert not leak and leak.prefix == first_diff
