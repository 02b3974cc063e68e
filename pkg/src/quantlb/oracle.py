"""Brute-force ground truth over fully logged streams.

Everything here works from plain sorted copies of the streams and deliberately
avoids the order-statistics helpers used by the adversary, so that it can serve
as an independent cross-check.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from math import floor
from typing import Dict, Iterable, List, Optional, Sequence

from .errors import ArrayMismatch, EmptyStream, NotInStream
from .universe import NEG_INF, POS_INF, Bound, Item, format_item, to_fraction


@dataclass(frozen=True)
class Verdict:
    ok: bool
    lo: int
    hi: int
    observed: int

    def __bool__(self) -> bool:
        return self.ok


def target_rank(phi, n: int) -> int:
    """Rank asked for by quantile ``phi``: ``max(1, floor(phi * n))``."""
    return max(1, floor(to_fraction(phi) * n))


def allowed_ranks(phi, n: int, eps) -> range:
    t = target_rank(phi, n)
    e = floor(to_fraction(eps) * n)
    return range(max(1, t - e), min(n, t + e) + 1)


def _ranks(stream: Iterable[Item]) -> Dict[Item, int]:
    return {x: r for r, x in enumerate(sorted(stream), start=1)}


def exact_quantile(stream: Sequence[Item], phi) -> Item:
    items = sorted(stream)
    if not items:
        raise EmptyStream("quantile of an empty stream")
    return items[target_rank(phi, len(items)) - 1]


def check_quantile_answer(stream: Sequence[Item], phi, answer: Item, eps) -> Verdict:
    ranks = _ranks(stream)
    if answer not in ranks:
        raise NotInStream(f"{format_item(answer)} not in stream")
    ok_range = allowed_ranks(phi, len(ranks), eps)
    observed = ranks[answer]
    return Verdict(observed in ok_range, ok_range.start, ok_range.stop - 1, observed)


def count_at_most(stream: Iterable[Item], q: Item) -> int:
    return sum(1 for x in stream if x <= q)


def check_rank_answer(stream: Sequence[Item], q: Item, answer: int, eps) -> Verdict:
    """Rank estimates answer ``#{x <= q}`` within ``floor(eps * N)``."""
    truth = count_at_most(stream, q)
    e = floor(to_fraction(eps) * len(stream))
    return Verdict(abs(answer - truth) <= e, truth - e, truth + e, answer)


class QuantileChecker:
    """Vectorised verdicts for one fixed stream prefix (sorted copy + rank map)."""

    def __init__(self, stream: Sequence[Item]) -> None:
        self.ranks = _ranks(stream)
        self.n = len(self.ranks)

    def ok(self, phi, answer: Item, eps) -> bool:
        return self.ranks[answer] in allowed_ranks(phi, self.n, eps)


def _restricted(stream: Sequence[Item], I: Sequence[Item], lo: Bound, hi: Bound):
    sub = [x for x in stream if lo < x < hi]
    ranks = _ranks(sub)
    arr = [x for x in I if lo < x < hi]
    arr_ranks = [0] + [ranks[x] for x in arr] + [len(sub) + 1]
    return [lo, *arr, hi], arr_ranks


def brute_gap(
    pi: Sequence[Item],
    rho: Sequence[Item],
    I_pi: Sequence[Item],
    I_rho: Sequence[Item],
    iv_pi=None,
    iv_rho=None,
):
    """Largest gap by direct scan.

    Without intervals this is the unrestricted gap, taking both orientations
    into account; with intervals it is the restricted gap, whose ranks are
    relative to the substreams inside the intervals and whose arrays are
    enclosed by the interval endpoints (ranked ``0`` and ``n_inside + 1``).
    Ties go to the smallest index, then to the pi-to-rho orientation.
    """
    from .adversary import GapReport

    pi, rho = list(pi), list(rho)
    if iv_pi is None and iv_rho is None:
        if len(I_pi) != len(I_rho):
            raise ArrayMismatch(f"|I_pi| = {len(I_pi)} != |I_rho| = {len(I_rho)}")
        rp, rr = _ranks(pi), _ranks(rho)
        best: Optional[GapReport] = None
        for i in range(len(I_pi) - 1):
            fwd = rr[I_rho[i + 1]] - rp[I_pi[i]]
            back = rp[I_pi[i + 1]] - rr[I_rho[i]]
            for size, rev, a, b in ((fwd, False, I_pi[i], I_rho[i + 1]), (back, True, I_rho[i], I_pi[i + 1])):
                if best is None or size > best.size:
                    best = GapReport(i + 1, a, b, size, reversed=rev)
        if best is None:
            raise ArrayMismatch("gap needs at least two stored items")
        return best

    lo_p, hi_p = (iv_pi.lo, iv_pi.hi) if iv_pi is not None else (NEG_INF, POS_INF)
    lo_r, hi_r = (iv_rho.lo, iv_rho.hi) if iv_rho is not None else (NEG_INF, POS_INF)
    arr_p, rk_p = _restricted(pi, I_pi, lo_p, hi_p)
    arr_r, rk_r = _restricted(rho, I_rho, lo_r, hi_r)
    if len(arr_p) != len(arr_r):
        raise ArrayMismatch(f"|I'_pi| = {len(arr_p)} != |I'_rho| = {len(arr_r)}")
    best = None
    for i in range(len(arr_p) - 1):
        size = rk_r[i + 1] - rk_p[i]
        if best is None or size > best.size:
            best = GapReport(i + 1, arr_p[i], arr_r[i + 1], size)
    return best


def no_index_answers(pi: Sequence[Item], rho: Sequence[Item], I_pi, I_rho, phi, eps) -> bool:
    """True when no common index j makes I_pi[j] and I_rho[j] both valid answers.

    This is what a gap witness must satisfy: whatever index a
    comparison-based summary returns, one of the two runs is wrong.
    """
    return _no_index_answers(QuantileChecker(pi), QuantileChecker(rho), I_pi, I_rho, phi, eps)


def _no_index_answers(cp, cr, I_pi, I_rho, phi, eps) -> bool:
    return not any(cp.ok(phi, a, eps) and cr.ok(phi, b, eps) for a, b in zip(I_pi, I_rho))


def gap_witness(pi, rho, I_pi, I_rho, report, eps) -> Optional[Fraction]:
    """A quantile ``phi`` proving the summary wrong on pi or rho, if one exists.

    Candidates are the integer target ranks between the gap's two witnesses,
    tried from the middle outwards.
    """
    n = len(pi)
    cp, cr = QuantileChecker(pi), QuantileChecker(rho)
    rp, rr = cp.ranks, cr.ranks
    if report.reversed:
        lo, hi = rr[report.a], rp[report.b]
    else:
        lo, hi = rp[report.a], rr[report.b]
    mid = (lo + hi) // 2
    candidates: List[int] = sorted(range(max(1, lo), min(n, hi) + 1), key=lambda t: (abs(t - mid), t))
    for t in candidates:
        phi = Fraction(t, n)
        if _no_index_answers(cp, cr, I_pi, I_rho, phi, eps):
            return phi
    return None
