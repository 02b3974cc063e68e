"""Adversarial construction of two indistinguishable streams.

:class:`AdvStrategy` drives two copies of a summary in lockstep through the
recursion tree: leaves append ``2 * eps_inv`` increasing items from the current
interval of each stream, internal nodes recurse left, move both intervals to
the far ends of the largest gap (:func:`refine_intervals`) and recurse right.
Every node is recorded in an :class:`AdversaryTrace` together with the values
needed to check the gap and space inequalities afterwards.
"""

from __future__ import annotations

from bisect import bisect_right
from dataclasses import dataclass, field
from decimal import ROUND_FLOOR, Decimal, localcontext
from fractions import Fraction
from typing import Dict, Iterator, List, Optional, Sequence, Tuple

from . import oracle
from .errors import (
    ArrayMismatch,
    DegenerateArray,
    InvalidEpsilon,
    NoPredecessor,
    NoSuccessor,
    PreconditionViolated,
)
from .streams import (
    WHOLE,
    Interval,
    StreamLog,
    first_index_at_least,
    restrict_item_array,
    restricted_count,
)
from .summary_api import LockstepPair, SummaryFactory
from .universe import Bound, Item, between, format_bound, generate_increasing

LOG2_BITS = 30


@dataclass(frozen=True)
class GapReport:
    """Position ``i`` (1-based) and size of a largest gap.

    ``a`` is the lower witness (``I'_pi[i]``) and ``b`` the upper one
    (``I'_rho[i+1]``); ``reversed`` marks the rho-to-pi orientation of the
    unrestricted gap.
    """

    i: int
    a: Bound
    b: Bound
    size: int
    reversed: bool = False

    def to_json(self) -> dict:
        out = {"i": self.i, "a": format_bound(self.a), "b": format_bound(self.b), "size": self.size}
        if self.reversed:
            out["reversed"] = True
        return out


@dataclass
class TraceNode:
    path: str
    level: int
    height: int
    iv_pi: Interval
    iv_rho: Interval
    n_before: int
    n_after: int = 0
    peak_items: int = 0
    final_items: int = 0
    gap: Optional[GapReport] = None
    final_gap: Optional[GapReport] = None
    refined_pi: Optional[Interval] = None
    refined_rho: Optional[Interval] = None
    fresh_empty: Optional[bool] = None
    fresh_aligned: Optional[bool] = None
    rank_ordered: Optional[bool] = None
    brute_mismatch: List[str] = field(default_factory=list)
    left: Optional["TraceNode"] = None
    right: Optional["TraceNode"] = None

    @property
    def is_leaf(self) -> bool:
        return self.left is None

    @property
    def n_items(self) -> int:
        return self.n_after - self.n_before

    def walk(self) -> Iterator["TraceNode"]:
        yield self
        if self.left is not None:
            yield from self.left.walk()
        if self.right is not None:
            yield from self.right.walk()

    def to_json(self) -> dict:
        out = {
            "path": self.path,
            "level": self.level,
            "height": self.height,
            "iv_pi": self.iv_pi.to_json(),
            "iv_rho": self.iv_rho.to_json(),
            "gap": self.gap.to_json() if self.gap else None,
            "final_gap": self.final_gap.to_json() if self.final_gap else None,
            "peak_items": self.peak_items,
            "final_items": self.final_items,
            "n_before": self.n_before,
            "n_after": self.n_after,
        }
        if self.refined_pi is not None:
            out["refined_pi"] = self.refined_pi.to_json()
            out["refined_rho"] = self.refined_rho.to_json()
        return out


@dataclass
class AdversaryTrace:
    eps_inv: int
    roots: List[TraceNode] = field(default_factory=list)

    @property
    def root(self) -> TraceNode:
        return self.roots[-1]

    def nodes(self) -> List[TraceNode]:
        return [node for r in self.roots for node in r.walk()]

    def leaves(self) -> List[TraceNode]:
        return [node for node in self.nodes() if node.is_leaf]

    def to_json(self) -> dict:
        return {"eps_inv": self.eps_inv, "nodes": [node.to_json() for node in self.nodes()]}


def restricted_gap(
    pi: StreamLog,
    rho: StreamLog,
    I_pi: Sequence[Item],
    I_rho: Sequence[Item],
    iv_pi: Interval = WHOLE,
    iv_rho: Interval = WHOLE,
) -> GapReport:
    """Largest gap between the restricted item arrays, smallest index on ties."""
    arr_pi = restrict_item_array(I_pi, iv_pi)
    arr_rho = restrict_item_array(I_rho, iv_rho)
    if len(arr_pi) != len(arr_rho):
        raise ArrayMismatch(f"|I'_pi| = {len(arr_pi)} != |I'_rho| = {len(arr_rho)}")
    r_pi = pi.restricted_ranks(arr_pi, iv_pi)
    r_rho = rho.restricted_ranks(arr_rho, iv_rho)
    best = 0
    best_size = r_rho[1] - r_pi[0]
    for i in range(1, len(arr_pi) - 1):
        size = r_rho[i + 1] - r_pi[i]
        if size > best_size:
            best, best_size = i, size
    return GapReport(best + 1, arr_pi[best], arr_rho[best + 1], best_size)


def full_gap(pi: StreamLog, rho: StreamLog, I_pi: Sequence[Item], I_rho: Sequence[Item],
             forward_only: bool = False) -> GapReport:
    """Unrestricted largest gap, maximised over both orientations.

    ``forward_only`` keeps just ``rank_rho(I_rho[i+1]) - rank_pi(I_pi[i])``.
    """
    if len(I_pi) != len(I_rho):
        raise ArrayMismatch(f"|I_pi| = {len(I_pi)} != |I_rho| = {len(I_rho)}")
    if len(I_pi) < 2:
        raise ArrayMismatch("gap needs at least two stored items")
    r_pi = [pi.rank(x) for x in I_pi]
    r_rho = [rho.rank(y) for y in I_rho]
    best: Optional[GapReport] = None
    for i in range(len(I_pi) - 1):
        fwd = r_rho[i + 1] - r_pi[i]
        if best is None or fwd > best.size:
            best = GapReport(i + 1, I_pi[i], I_rho[i + 1], fwd)
        back = r_pi[i + 1] - r_rho[i]
        if not forward_only and back > best.size:
            best = GapReport(i + 1, I_rho[i], I_pi[i + 1], back, reversed=True)
    return best


def refine_intervals(
    pi: StreamLog,
    rho: StreamLog,
    iv_pi: Interval,
    iv_rho: Interval,
    I_pi: Sequence[Item],
    I_rho: Sequence[Item],
) -> Tuple[Interval, Interval, GapReport]:
    """New intervals at the two far ends of the largest restricted gap."""
    if restricted_count(I_pi, iv_pi) <= 2:
        raise DegenerateArray(f"no stored item of pi inside {iv_pi}")
    report = restricted_gap(pi, rho, I_pi, I_rho, iv_pi, iv_rho)
    # a witness at an infinite end of the interval has no stream neighbour on
    # that side; the interval bound itself is then the neighbour
    try:
        hi = pi.next(report.a)
    except NoSuccessor:
        hi = iv_pi.hi
    try:
        lo = rho.prev(report.b)
    except NoPredecessor:
        lo = iv_rho.lo
    return Interval(report.a, hi), Interval(lo, report.b), report


def rank_ordering_holds(pi: StreamLog, rho: StreamLog, I_pi: Sequence[Item], I_rho: Sequence[Item]) -> bool:
    return all(pi.rank(x) <= rho.rank(y) for x, y in zip(I_pi, I_rho))


def _probes(iv: Interval) -> List[Item]:
    mid = between(iv.lo, iv.hi)
    return [between(iv.lo, mid), mid, between(mid, iv.hi)]


def probes_aligned(I_pi: Sequence[Item], I_rho: Sequence[Item], iv_pi: Interval, iv_rho: Interval) -> bool:
    """Sampled check that every point of both intervals has the same insertion index."""
    idx = {first_index_at_least(I_pi, a) for a in _probes(iv_pi)}
    idx |= {first_index_at_least(I_rho, b) for b in _probes(iv_rho)}
    return len(idx) == 1


class AdvStrategy:
    """Recursive adversary over a :class:`LockstepPair`.

    ``cross_check`` recomputes every gap with the brute-force oracle and records
    disagreements on the node (slow; meant for small runs).
    """

    def __init__(self, pair: LockstepPair, eps_inv: int, trace: Optional[AdversaryTrace] = None,
                 cross_check: bool = False) -> None:
        self.pair = pair
        self.eps_inv = int(eps_inv)
        self.trace = trace if trace is not None else AdversaryTrace(self.eps_inv)
        self.cross_check = cross_check
        self._active: List[TraceNode] = []

    def run(self, k: int, iv_pi: Interval = WHOLE, iv_rho: Interval = WHOLE, path: str = "root") -> TraceNode:
        if k < 1:
            raise ValueError(f"k must be >= 1, got {k}")
        root = self._node(k, iv_pi, iv_rho, path, level=1)
        self.trace.roots.append(root)
        return root

    def _feed(self, a: Item, b: Item) -> None:
        self.pair.feed(a, b)
        # Every item inside an active node's interval arrived while that node
        # was running (checked on entry and again on exit), so counting by
        # arrival index avoids comparing items.
        arrivals = sorted(self.pair.stored_arrivals())
        total = len(arrivals) + 2
        for node in self._active:
            c = total - bisect_right(arrivals, node.n_before)
            if c > node.peak_items:
                node.peak_items = c

    def _check_entry(self, iv_pi: Interval, iv_rho: Interval, path: str) -> None:
        pair = self.pair
        if pair.pi.count_inside(iv_pi) or pair.rho.count_inside(iv_rho):
            raise PreconditionViolated("interval already contains stream items", path)
        if not probes_aligned(pair.d_pi.stored, pair.d_rho.stored, iv_pi, iv_rho):
            raise PreconditionViolated("insertion indices differ between the two intervals", path)

    def _node(self, k: int, iv_pi: Interval, iv_rho: Interval, path: str, level: int) -> TraceNode:
        pair = self.pair
        pair.path = path
        self._check_entry(iv_pi, iv_rho, path)
        node = TraceNode(path, level, k, iv_pi, iv_rho, n_before=len(pair.pi))
        node.peak_items = restricted_count(pair.d_pi.stored, iv_pi)
        self._active.append(node)
        if k == 1:
            xs = generate_increasing(iv_pi.lo, iv_pi.hi, 2 * self.eps_inv)
            ys = generate_increasing(iv_rho.lo, iv_rho.hi, 2 * self.eps_inv)
            for a, b in zip(xs, ys):
                self._feed(a, b)
        else:
            node.left = self._node(k - 1, iv_pi, iv_rho, path + "/L", level + 1)
            pair.path = path
            I_pi, I_rho = pair.d_pi.stored, pair.d_rho.stored
            try:
                new_pi, new_rho, node.gap = refine_intervals(pair.pi, pair.rho, iv_pi, iv_rho, I_pi, I_rho)
            except (ArrayMismatch, DegenerateArray) as exc:
                raise type(exc)(f"{exc} (node {path})") from exc
            if self.cross_check:
                self._cross_check(node, "refine", node.gap, iv_pi, iv_rho)
            node.refined_pi, node.refined_rho = new_pi, new_rho
            node.fresh_empty = pair.pi.count_inside(new_pi) == 0 and pair.rho.count_inside(new_rho) == 0
            node.fresh_aligned = probes_aligned(I_pi, I_rho, new_pi, new_rho)
            node.right = self._node(k - 1, new_pi, new_rho, path + "/R", level + 1)
            pair.path = path
        self._active.pop()
        I_pi, I_rho = pair.d_pi.stored, pair.d_rho.stored
        node.n_after = len(pair.pi)
        node.final_items = restricted_count(I_pi, iv_pi)
        arrivals = pair.stored_arrivals()
        if node.final_items != 2 + sum(1 for t in arrivals if t > node.n_before):
            raise PreconditionViolated("stored items inside the interval did not all arrive during the node", path)
        node.final_gap = restricted_gap(pair.pi, pair.rho, I_pi, I_rho, iv_pi, iv_rho)
        if self.cross_check:
            self._cross_check(node, "exit", node.final_gap, iv_pi, iv_rho)
        node.rank_ordered = rank_ordering_holds(pair.pi, pair.rho, I_pi, I_rho)
        return node

    def _cross_check(self, node: TraceNode, where: str, report: GapReport, iv_pi, iv_rho) -> None:
        pair = self.pair
        brute = oracle.brute_gap(pair.pi, pair.rho, pair.d_pi.stored, pair.d_rho.stored, iv_pi, iv_rho)
        if brute != report:
            node.brute_mismatch.append(f"{where}: adversary {report} vs oracle {brute}")


def adv_strategy(
    k: int,
    pair: LockstepPair,
    iv_pi: Interval = WHOLE,
    iv_rho: Interval = WHOLE,
    trace: Optional[AdversaryTrace] = None,
    cross_check: bool = False,
) -> AdversaryTrace:
    """Run the adversary for ``k`` levels on ``pair``; returns the trace."""
    strategy = AdvStrategy(pair, pair.d_pi.eps_inv, trace, cross_check)
    strategy.run(k, iv_pi, iv_rho)
    return strategy.trace


@dataclass
class AdversaryRun:
    eps_inv: int
    k: int
    pair: LockstepPair
    trace: AdversaryTrace

    @property
    def pi(self) -> StreamLog:
        return self.pair.pi

    @property
    def rho(self) -> StreamLog:
        return self.pair.rho

    @property
    def root(self) -> TraceNode:
        return self.trace.root

    @property
    def n_total(self) -> int:
        return len(self.pair.pi)

    def full_gap(self) -> GapReport:
        return full_gap(self.pi, self.rho, self.pair.d_pi.stored, self.pair.d_rho.stored)

    def checks(self) -> Dict[str, List[str]]:
        return check_trace(self.trace, self.full_gap(), self.n_total)


def run_adversary(factory: SummaryFactory, eps_inv: int, k: int, check_every_prefix: bool = True,
                  cross_check: bool = False) -> AdversaryRun:
    pair = LockstepPair(factory, check=check_every_prefix, strict=True)
    trace = adv_strategy(k, pair, cross_check=cross_check)
    return AdversaryRun(int(eps_inv), k, pair, trace)


def log2_bounds(g: int) -> Tuple[Fraction, Fraction]:
    """Rationals ``lo <= log2(g) <= hi`` on the ``2**-30`` grid (exact for powers of two)."""
    if g < 1:
        raise ValueError(f"g must be >= 1, got {g}")
    if g & (g - 1) == 0:
        e = Fraction(g.bit_length() - 1)
        return e, e
    with localcontext() as ctx:
        ctx.prec = 60
        value = Decimal(g).ln() / Decimal(2).ln()
        j = int((value * (1 << LOG2_BITS)).to_integral_value(rounding=ROUND_FLOOR))
    return Fraction(j, 1 << LOG2_BITS), Fraction(j + 1, 1 << LOG2_BITS)


def space_gap_rhs(g: int, n_items: int, eps) -> Fraction:
    """``(1/8 - 2 eps) (log2 g + 1) (n_items / g - 1 / (4 eps))``, rounded down.

    The logarithm is taken from :func:`log2_bounds`, choosing whichever side
    keeps the result a lower bound of the exact value.
    """
    eps = Fraction(eps)
    if not 0 < eps < Fraction(1, 16):
        raise InvalidEpsilon(f"space-gap bound needs 0 < eps < 1/16, got {eps}")
    c = Fraction(1, 8) - 2 * eps
    tail = Fraction(n_items, g) - 1 / (4 * eps)
    lo, hi = log2_bounds(g)
    return c * ((lo if tail >= 0 else hi) + 1) * tail


def check_claim_gaps(g: int, g_left: int, g_right: int) -> bool:
    return g >= g_left + g_right - 1


PROPERTIES = ("gap_bound", "gap_split", "space_times_gap", "space_gap", "fresh_empty", "fresh_aligned", "rank_ordering", "oracle_gap")


def check_trace(trace: AdversaryTrace, root_full_gap: Optional[GapReport], n_total: int) -> Dict[str, List[str]]:
    """Evaluate the per-node inequalities; maps property name to failing node paths.

    ``gap_bound`` compares the unrestricted root gap against ``2 n_total / eps_inv``.
    ``space_gap`` is skipped (empty) when ``eps_inv <= 16``.
    """
    m = trace.eps_inv
    failures: Dict[str, List[str]] = {name: [] for name in PROPERTIES}
    if root_full_gap is not None and root_full_gap.size * m > 2 * n_total:
        failures["gap_bound"].append(trace.root.path)
    for node in trace.nodes():
        g = node.final_gap.size
        if node.peak_items * g < node.n_items:
            failures["space_times_gap"].append(node.path)
        if m > 16 and node.peak_items < space_gap_rhs(g, node.n_items, Fraction(1, m)):
            failures["space_gap"].append(node.path)
        if not node.rank_ordered:
            failures["rank_ordering"].append(node.path)
        if node.brute_mismatch:
            failures["oracle_gap"].append(node.path)
        if not node.is_leaf:
            if not check_claim_gaps(g, node.left.final_gap.size, node.right.final_gap.size):
                failures["gap_split"].append(node.path)
            if not node.fresh_empty:
                failures["fresh_empty"].append(node.path)
            if not node.fresh_aligned:
                failures["fresh_aligned"].append(node.path)
    return failures
