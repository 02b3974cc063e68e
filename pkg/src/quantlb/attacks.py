"""Attacks built on the adversary: quantile, median, rank and biased-quantile.

Each attack drives a pair of subjects through :class:`AdvStrategy`, then either
finds a query on which one of the two runs must answer wrongly (the witness is
re-checked by the oracle) or reports the space the subject needed.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Dict, List, Optional

from . import oracle
from .adversary import (
    AdversaryTrace,
    AdvStrategy,
    GapReport,
    check_trace,
    full_gap,
    space_gap_rhs,
)
from .errors import PreconditionViolated, SubjectLacksRankQuery, SummaryNotStreaming
from .streams import WHOLE, Interval
from .summary_api import LockstepPair, QuantileSummary
from .universe import NEG_INF, POS_INF, between, format_item, generate_increasing

ATTACKS = ("quantile", "median", "rank", "biased")

CSV_COLUMNS = (
    "attack", "summary", "eps_inv", "k", "N_total", "peak_items", "final_items", "root_gap",
    "bound_rhs", "gap_bound_ok", "gap_split_ok", "spacegap_ok", "survived", "witness",
)

PHI_GRID = [Fraction(j, 100) for j in range(101)]


def _flag(value: Optional[bool]) -> str:
    if value is None:
        return "n/a"
    return "true" if value else "false"


@dataclass
class AttackOutcome:
    """Result of one attack at one ``(eps_inv, k)`` grid point.

    ``root_gap`` is the restricted gap of the (last) root interval pair and
    ``bound_rhs`` the space-gap bound evaluated on it with ``N = eps_inv * 2**k``.
    ``witness`` is empty when the subject survived.
    """

    attack: str
    summary: str
    eps_inv: int
    k: int
    n_total: int = 0
    peak_items: int = 0
    final_items: int = 0
    root_gap: int = 0
    full_gap: Optional[GapReport] = None
    bound_rhs: Optional[Fraction] = None
    gap_bound_ok: Optional[bool] = None
    gap_split_ok: Optional[bool] = None
    spacegap_ok: Optional[bool] = None
    survived: bool = True
    witness: str = ""
    failures: Dict[str, List[str]] = field(default_factory=dict)
    details: Dict[str, object] = field(default_factory=dict)
    trace: Optional[AdversaryTrace] = None
    pair: Optional[LockstepPair] = None

    @property
    def ok(self) -> bool:
        """True when nothing that the attack asserts was violated."""
        asserted = (self.gap_bound_ok, self.gap_split_ok) if self.attack != "biased" else (self.gap_split_ok,)
        if self.attack != "biased":
            asserted += (self.spacegap_ok,)
        return self.survived and all(v is not False for v in asserted)

    def csv_row(self) -> Dict[str, str]:
        rhs = "" if self.bound_rhs is None else f"{self.bound_rhs.numerator}/{self.bound_rhs.denominator}"
        return {
            "attack": self.attack,
            "summary": self.summary,
            "eps_inv": str(self.eps_inv),
            "k": str(self.k),
            "N_total": str(self.n_total),
            "peak_items": str(self.peak_items),
            "final_items": str(self.final_items),
            "root_gap": str(self.root_gap),
            "bound_rhs": rhs,
            "gap_bound_ok": _flag(self.gap_bound_ok),
            "gap_split_ok": _flag(self.gap_split_ok),
            "spacegap_ok": _flag(self.spacegap_ok),
            "survived": _flag(self.survived),
            "witness": self.witness,
        }


SubjectFactory = Callable[[], QuantileSummary]


def _probe(factory: SubjectFactory) -> QuantileSummary:
    subject = factory()
    if not subject.streaming:
        raise SummaryNotStreaming(f"{subject.name} is an offline summary and cannot be attacked online")
    return subject


def _start(attack: str, factory: SubjectFactory, eps_inv: int, k: int):
    subject = _probe(factory)
    pair = LockstepPair(factory, check=True, strict=True)
    strategy = AdvStrategy(pair, eps_inv)
    outcome = AttackOutcome(attack, subject.name, eps_inv, k, trace=strategy.trace, pair=pair)
    return pair, strategy, outcome


def _run(strategy: AdvStrategy, outcome: AttackOutcome, k: int, iv_pi: Interval = WHOLE,
         iv_rho: Interval = WHOLE, path: str = "root") -> bool:
    """Run one adversary tree; a broken precondition ends the attack with a witness."""
    try:
        strategy.run(k, iv_pi, iv_rho, path)
    except PreconditionViolated as exc:
        outcome.survived = False
        outcome.witness = f"precondition at {exc.path}: {exc}"
        return False
    return True


def _finish(outcome: AttackOutcome, n_root: int) -> None:
    """Fill the space and gap columns shared by all attacks."""
    pair = outcome.pair
    eps_inv = outcome.eps_inv
    outcome.n_total = len(pair.pi)
    outcome.peak_items = pair.d_pi.meter.max_items_total
    outcome.final_items = len(pair.d_pi.stored)
    root = outcome.trace.root
    outcome.root_gap = root.final_gap.size
    outcome.full_gap = full_gap(pair.pi, pair.rho, pair.d_pi.stored, pair.d_rho.stored)
    outcome.failures = check_trace(outcome.trace, outcome.full_gap, outcome.n_total)
    outcome.gap_split_ok = not outcome.failures["gap_split"]
    if eps_inv > 16:
        outcome.bound_rhs = space_gap_rhs(outcome.root_gap, n_root, Fraction(1, eps_inv))
        outcome.spacegap_ok = not outcome.failures["space_gap"]
    for name in ("fresh_empty", "fresh_aligned", "rank_ordering", "space_times_gap"):
        if outcome.failures[name] and outcome.survived:
            outcome.survived = False
            outcome.witness = f"{name} fails at {outcome.failures[name][0]}"


def _sweep(pair: LockstepPair, eps_inv: int, phis) -> Optional[str]:
    """Query both subjects on every phi; returns a witness for the first wrong answer."""
    eps = Fraction(1, eps_inv)
    cp, cr = oracle.QuantileChecker(pair.pi), oracle.QuantileChecker(pair.rho)
    for phi in phis:
        j_pi, a = pair.d_pi.query(phi)
        j_rho, b = pair.d_rho.query(phi)
        if j_pi != j_rho:
            return f"phi={phi}: query indices differ ({j_pi} vs {j_rho})"
        if not cp.ok(phi, a, eps):
            return f"phi={phi}: pi answer {format_item(a)} has rank {cp.ranks[a]}"
        if not cr.ok(phi, b, eps):
            return f"phi={phi}: rho answer {format_item(b)} has rank {cr.ranks[b]}"
    return None


def quantile_attack(factory: SubjectFactory, eps_inv: int, k: int) -> AttackOutcome:
    """Adversary run followed by a quantile sweep; a gap above ``2 eps N`` yields a witness phi."""
    pair, strategy, outcome = _start("quantile", factory, eps_inv, k)
    if not _run(strategy, outcome, k):
        return outcome
    n = eps_inv * 2 ** k
    _finish(outcome, n)
    outcome.gap_bound_ok = outcome.full_gap.size * eps_inv <= 2 * outcome.n_total
    phis = list(PHI_GRID)
    if not outcome.gap_bound_ok:
        phi = oracle.gap_witness(pair.pi, pair.rho, pair.d_pi.stored, pair.d_rho.stored,
                                 outcome.full_gap, Fraction(1, eps_inv))
        outcome.details["gap_phi"] = phi
        if phi is not None:
            phis.insert(0, phi)
    bad = _sweep(pair, eps_inv, phis)
    if bad and outcome.survived:
        outcome.survived = False
        outcome.witness = bad
    return outcome


def _round_half_up(x: Fraction) -> int:
    return int((2 * x + 1) // 2)


def median_shift_count(phi_shift, n: int) -> int:
    """Items to add on one side so that quantile ``phi_shift`` of ``n`` items becomes the median."""
    return _round_half_up(abs(1 - 2 * Fraction(phi_shift)) * n)


def median_attack(factory: SubjectFactory, eps_inv: int, k: int) -> AttackOutcome:
    """Shift the middle of a gap wider than ``4 eps N`` onto the median, then ask for it."""
    pair, strategy, outcome = _start("median", factory, eps_inv, k)
    if not _run(strategy, outcome, k):
        return outcome
    n = eps_inv * 2 ** k
    gap = full_gap(pair.pi, pair.rho, pair.d_pi.stored, pair.d_rho.stored)
    appended = 0
    if gap.size * eps_inv > 4 * n:
        if gap.reversed:
            lo, hi = pair.rho.rank(gap.a), pair.pi.rank(gap.b)
        else:
            lo, hi = pair.pi.rank(gap.a), pair.rho.rank(gap.b)
        phi_shift = Fraction(lo + hi, 2 * n)
        appended = median_shift_count(phi_shift, n)
        outcome.details["phi_shift"] = phi_shift
        if appended:
            if phi_shift < Fraction(1, 2):
                xs = generate_increasing(NEG_INF, pair.pi.min(), appended)
                ys = generate_increasing(NEG_INF, pair.rho.min(), appended)
            else:
                xs = generate_increasing(pair.pi.max(), POS_INF, appended)
                ys = generate_increasing(pair.rho.max(), POS_INF, appended)
            pair.path = "median-shift"
            try:
                for a, b in zip(xs, ys):
                    pair.feed(a, b)
            except PreconditionViolated as exc:
                outcome.survived = False
                outcome.witness = f"precondition at {exc.path}: {exc}"
                return outcome
    outcome.details["appended"] = appended
    _finish(outcome, n)
    outcome.gap_bound_ok = gap.size * eps_inv <= 2 * n
    bad = _sweep(pair, eps_inv, [Fraction(1, 2)])
    if bad and outcome.survived:
        outcome.survived = False
        outcome.witness = bad
    return outcome


def rank_attack(factory: SubjectFactory, eps_inv: int, k: int) -> AttackOutcome:
    """Ask both runs for the rank of a point hidden inside the largest gap.

    A comparison-based estimator must give the same answer on both runs, which
    is only possible within ``eps N`` if the gap is at most ``2 eps N + 2``; the
    ``gap_bound_ok`` column reports that bound for this attack.
    """
    subject = _probe(factory)
    if not subject.supports_rank:
        raise SubjectLacksRankQuery(f"{subject.name} does not answer rank queries")
    pair, strategy, outcome = _start("rank", factory, eps_inv, k)
    if not _run(strategy, outcome, k):
        return outcome
    n = eps_inv * 2 ** k
    _finish(outcome, n)
    pi, rho = pair.pi, pair.rho
    gap = full_gap(pi, rho, pair.d_pi.stored, pair.d_rho.stored, forward_only=True)
    outcome.gap_bound_ok = gap.size * eps_inv <= 2 * n + 2 * eps_inv
    q_pi = between(gap.a, pi.next(gap.a))
    q_rho = between(rho.prev(gap.b), gap.b)
    r_pi, r_rho = pair.d_pi.rank(q_pi), pair.d_rho.rank(q_rho)
    eps = Fraction(1, eps_inv)
    v_pi = oracle.check_rank_answer(pi, q_pi, r_pi, eps)
    v_rho = oracle.check_rank_answer(rho, q_rho, r_rho, eps)
    outcome.details.update(
        q_pi=q_pi, q_rho=q_rho, r_pi=r_pi, r_rho=r_rho, forward_gap=gap.size,
        straddle=oracle.count_at_most(rho, q_rho) - oracle.count_at_most(pi, q_pi),
    )
    if r_pi != r_rho:
        outcome.survived = False
        outcome.witness = f"q={format_item(q_pi)}|{format_item(q_rho)}: ranks differ ({r_pi} vs {r_rho})"
    elif not (v_pi and v_rho):
        bad, q = (v_pi, q_pi) if not v_pi else (v_rho, q_rho)
        outcome.survived = False
        outcome.witness = f"q={format_item(q)}: rank {bad.observed} outside [{bad.lo}, {bad.hi}]"
    return outcome


def biased_attack(factory: SubjectFactory, eps_inv: int, k: int, assert_phase_gaps: bool = True) -> AttackOutcome:
    """Phases ``1..k``; phase ``i`` runs a depth-``i`` adversary above every earlier item.

    The gap of each phase (restricted to the phase interval, taken when the
    phase ends) must stay within ``4 eps N_i`` for a correct uniform-error
    subject; with ``assert_phase_gaps=False`` it is only recorded. The
    ``spacegap_ok`` column is informational for this attack.
    """
    pair, strategy, outcome = _start("biased", factory, eps_inv, k)
    phases = []
    for i in range(1, k + 1):
        if len(pair.pi):
            iv_pi, iv_rho = Interval(pair.pi.max(), POS_INF), Interval(pair.rho.max(), POS_INF)
        else:
            iv_pi, iv_rho = WHOLE, WHOLE
        if not _run(strategy, outcome, i, iv_pi, iv_rho, f"phase{i}"):
            return outcome
        node = strategy.trace.roots[-1]
        n_i = eps_inv * 2 ** i
        phases.append({
            "phase": i,
            "n_items": node.n_items,
            "peak_items": node.peak_items,
            "gap": node.final_gap.size,
            "gap_ok": node.final_gap.size * eps_inv <= 4 * n_i,
        })
    outcome.details["phases"] = phases
    outcome.details["space_sum"] = sum(p["peak_items"] for p in phases)
    _finish(outcome, eps_inv * 2 ** k)
    outcome.gap_bound_ok = outcome.full_gap.size * eps_inv <= 2 * outcome.n_total
    if assert_phase_gaps:
        for p in phases:
            if not p["gap_ok"] and outcome.survived:
                outcome.survived = False
                outcome.witness = f"phase {p['phase']} gap {p['gap']} > 4 eps N_i"
    return outcome


RUNNERS = {
    "quantile": quantile_attack,
    "median": median_attack,
    "rank": rank_attack,
    "biased": biased_attack,
}


def run_attack(name: str, factory: SubjectFactory, eps_inv: int, k: int) -> AttackOutcome:
    if name not in RUNNERS:
        raise ValueError(f"unknown attack {name!r}; expected one of {ATTACKS}")
    return RUNNERS[name](factory, eps_inv, k)
