"""Property suite behind ``quantlb verify`` and the space benchmark behind ``quantlb bench``."""

from __future__ import annotations

import os
import random
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import Callable, Dict, Iterable, List, Optional, Sequence, Tuple

from sortedcontainers import SortedList

from . import oracle
from .adversary import run_adversary
from .errors import ArrayMismatch, DegenerateArray, PreconditionViolated
from .summaries import GKSummary, make_summary
from .summary_api import QuantileSummary
from .universe import format_item

SubjectMaker = Callable[[int, int], QuantileSummary]

ADVERSARY_PROPERTIES = (
    "indistinguishability", "fresh_intervals", "rank_ordering", "space_times_gap", "gap_bound", "gap_split", "space_gap", "oracle_gap",
)
PHI_GRID = [Fraction(j, 100) for j in range(101)]


def max_n_from_env() -> Optional[int]:
    """Stream-length cap from ``QA_MAX_N`` (unset or empty means no cap)."""
    raw = os.environ.get("QA_MAX_N", "").strip()
    if not raw:
        return None
    value = int(raw)
    if value < 1:
        raise ValueError(f"QA_MAX_N must be positive, got {raw!r}")
    return value


@dataclass
class PropertyResult:
    name: str
    checked: int = 0
    failed: int = 0
    detail: str = ""

    @property
    def ok(self) -> bool:
        return self.failed == 0

    def record(self, ok: bool, detail: str = "") -> None:
        self.checked += 1
        if not ok:
            self.failed += 1
            if not self.detail:
                self.detail = detail

    def merge(self, checked: int, failures: Sequence[str]) -> None:
        self.checked += checked
        self.failed += len(failures)
        if failures and not self.detail:
            self.detail = failures[0]

    def line(self) -> str:
        status = "PASS" if self.ok else "FAIL"
        tail = f" ({self.checked} checks)" if self.ok else f" ({self.failed}/{self.checked} failed; first: {self.detail})"
        return f"{status} {self.name}{tail}"


def named_subjects(names: Iterable[str]) -> Dict[str, SubjectMaker]:
    return {name: (lambda m, k, _name=name: make_summary(_name, m)) for name in names}


def adversary_point(label: str, maker: SubjectMaker, eps_inv: int, k: int,
                    cross_check: bool = False, states: Optional[dict] = None) -> Dict[str, Tuple[int, List[str]]]:
    """All adversary properties for one grid point as ``{name: (checks, failures)}``.

    When ``states`` is a dict, the final memory states of both runs are stored
    in it under the point's label.
    """
    where = f"{label} eps_inv={eps_inv} k={k}"
    out: Dict[str, Tuple[int, List[str]]] = {}
    try:
        run = run_adversary(lambda: maker(eps_inv, k), eps_inv, k, cross_check=cross_check)
    except PreconditionViolated as exc:
        out["indistinguishability"] = (1, [f"{where}: {exc} at {exc.path}"])
        return out
    except (ArrayMismatch, DegenerateArray) as exc:
        out["indistinguishability"] = (1, [f"{where}: {exc}"])
        return out
    out["indistinguishability"] = (run.n_total, [])
    if states is not None:
        states[where] = {"pi": run.pair.d_pi.snapshot().to_json(), "rho": run.pair.d_rho.snapshot().to_json()}
    nodes = run.trace.nodes()
    internal = [n for n in nodes if not n.is_leaf]
    failures = run.checks()

    def tagged(name):
        return [f"{where} node {path}" for path in failures[name]]

    gap = run.full_gap()
    gap_bound = tagged("gap_bound")
    if gap_bound:
        pair = run.pair
        phi = oracle.gap_witness(pair.pi, pair.rho, pair.d_pi.stored, pair.d_rho.stored, gap,
                                 Fraction(1, eps_inv))
        gap_bound = [f"{where}: gap {gap.size} > 2 eps N = {2 * run.n_total // eps_inv}, witness phi={phi}"]
    out["gap_bound"] = (1, gap_bound)
    out["fresh_intervals"] = (2 * len(internal), tagged("fresh_empty") + tagged("fresh_aligned"))
    out["rank_ordering"] = (len(nodes), tagged("rank_ordering"))
    out["space_times_gap"] = (len(nodes), tagged("space_times_gap"))
    out["gap_split"] = (len(internal), tagged("gap_split"))
    if eps_inv > 16:
        out["space_gap"] = (len(nodes), tagged("space_gap"))
    if cross_check:
        out["oracle_gap"] = (len(nodes) + len(internal), tagged("oracle_gap"))
    return out


def _named_point(name: str, eps_inv: int, k: int, cross_check: bool, dump: bool = False):
    states = {} if dump else None
    out = adversary_point(name, lambda m, _k: make_summary(name, m), eps_inv, k, cross_check, states)
    return out, states


def adversary_grid(
    subjects: Dict[str, SubjectMaker],
    eps_invs: Iterable[int],
    ks: Iterable[int],
    cross_check_upto: int = 0,
    max_n: Optional[int] = None,
    jobs: int = 1,
    named: bool = False,
    states: Optional[dict] = None,
) -> Tuple[Dict[str, PropertyResult], List[str]]:
    """Run every grid point; returns merged results and the skipped points.

    ``named=True`` means ``subjects`` keys are summary names, which lets the
    points run in a process pool. Final memory states are collected into
    ``states`` when it is given.
    """
    results = {name: PropertyResult(name) for name in ADVERSARY_PROPERTIES}
    points, skipped = [], []
    for label in subjects:
        for m in eps_invs:
            for k in ks:
                if max_n is not None and m * 2 ** k > max_n:
                    skipped.append(f"{label} eps_inv={m} k={k}")
                    continue
                points.append((label, m, k, k <= cross_check_upto))
    dump = states is not None
    if jobs > 1 and named:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            pairs = list(pool.map(_named_point, *zip(*points), [dump] * len(points))) if points else []
        outs = []
        for out, point_states in pairs:
            outs.append(out)
            if dump:
                states.update(point_states)
    else:
        outs = [adversary_point(label, subjects[label], m, k, cross, states) for label, m, k, cross in points]
    for out in outs:
        for name, (checked, failures) in out.items():
            results[name].merge(checked, failures)
    return results, skipped


def random_stream(rng: random.Random, n: int) -> List[Fraction]:
    """``n`` distinct items: a random permutation of ``1..n`` scaled by a random odd denominator."""
    values = list(range(1, n + 1))
    rng.shuffle(values)
    den = rng.choice((1, 3, 7))
    return [Fraction(v, den) for v in values]


@lru_cache(maxsize=8192)
def _allowed(phis: Tuple[Fraction, ...], n: int, eps: Fraction) -> List[range]:
    return [oracle.allowed_ranks(phi, n, eps) for phi in phis]


def quantile_prefix_check(summary: QuantileSummary, stream: Sequence[Fraction], phis=PHI_GRID) -> List[str]:
    """Feed ``stream`` and check every phi after every prefix; returns failures."""
    eps = Fraction(1, summary.eps_inv)
    seen = SortedList()
    bad = []
    for n, x in enumerate(stream, start=1):
        summary.process(x)
        seen.add(x)
        stored = summary.stored
        ranks = [seen.bisect_left(v) + 1 for v in stored]
        for phi, ok in zip(phis, _allowed(tuple(phis), n, eps)):
            j = summary.query_index(phi)
            if ranks[j - 1] not in ok:
                bad.append(f"n={n} phi={phi}: rank {ranks[j - 1]} outside [{ok.start}, {ok.stop - 1}]")
    return bad


def oracle_equivalence(subject_names: Sequence[str], n_streams: int, sizes=(64, 256, 512),
                       eps_invs=(8, 16, 32), seed: int = 0) -> PropertyResult:
    """Random streams cycled over the (N, eps) grid; every prefix, every phi on the 0.01 grid."""
    result = PropertyResult("oracle_equivalence")
    rng = random.Random(seed)
    grid = [(n, m) for n in sizes for m in eps_invs]
    for s in range(n_streams):
        n, m = grid[s % len(grid)]
        stream = random_stream(rng, n)
        for name in subject_names:
            bad = quantile_prefix_check(make_summary(name, m), stream)
            result.checked += n * len(PHI_GRID)
            if bad:
                result.failed += len(bad)
                result.detail = result.detail or f"{name} stream {s} (N={n}, eps_inv={m}): {bad[0]}"
    return result


def rank_prefix_check(summary: GKSummary, stream: Sequence[Fraction], probes_per_prefix: int,
                      rng: random.Random) -> Tuple[int, List[str]]:
    """Rank answers against ``count_at_most`` after every prefix, exhaustively at the end."""
    seen = SortedList()
    bad, checked = [], 0
    lo, hi = min(stream) - 1, max(stream) + 1
    for n, x in enumerate(stream, start=1):
        summary.process(x)
        seen.add(x)
        probes = [Fraction(rng.randint(0, 4096), 4096) * (hi - lo) + lo for _ in range(probes_per_prefix)]
        probes.append(x)
        if n == len(stream):
            items = list(seen)
            probes += items + [(a + b) / 2 for a, b in zip(items, items[1:])] + [lo, hi]
        e = n // summary.eps_inv
        for q in probes:
            truth = seen.bisect_right(q)
            r = summary.rank(q)
            checked += 1
            if abs(r - truth) > e:
                bad.append(f"n={n} q={format_item(q)}: answer {r}, truth {truth}")
    return checked, bad


def rank_equivalence(n_streams: int, sizes=(64, 256, 512), eps_invs=(8, 16, 32), seed: int = 0,
                     probes_per_prefix: int = 8) -> PropertyResult:
    result = PropertyResult("rank_equivalence")
    rng = random.Random(seed)
    grid = [(n, m) for n in sizes for m in eps_invs]
    for s in range(n_streams):
        n, m = grid[s % len(grid)]
        stream = random_stream(rng, n)
        checked, bad = rank_prefix_check(GKSummary(m), stream, probes_per_prefix, rng)
        result.checked += checked
        if bad:
            result.failed += len(bad)
            result.detail = result.detail or f"stream {s} (N={n}, eps_inv={m}): {bad[0]}"
    return result


def order_isomorphism(subject_names: Sequence[str], n_streams: int = 6, n: int = 300, eps_inv: int = 16,
                      seed: int = 0) -> PropertyResult:
    """States and answers must not change under a strictly increasing relabelling of items."""
    result = PropertyResult("order_isomorphism")
    rng = random.Random(seed)
    for s in range(n_streams):
        stream = random_stream(rng, n)
        scale, shift = Fraction(rng.randint(1, 9), rng.randint(1, 9)), Fraction(rng.randint(-50, 50), 7)
        for name in subject_names:
            a, b = make_summary(name, eps_inv), make_summary(name, eps_inv)
            for t, x in enumerate(stream, start=1):
                a.process(x)
                b.process(x * scale + shift)
                if a.streaming:
                    same = a.general_memory() == b.general_memory() and [
                        v * scale + shift for v in a.stored] == list(b.stored)
                    result.record(same, f"{name} stream {s}: states differ at prefix {t}")
            answers_a = [a.query(phi)[0] for phi in PHI_GRID]
            answers_b = [b.query(phi)[0] for phi in PHI_GRID]
            result.record(answers_a == answers_b, f"{name} stream {s}: query indices differ")
    return result


def run_verify(
    subjects: Optional[Dict[str, SubjectMaker]] = None,
    names: Sequence[str] = ("gk", "gk-greedy"),
    eps_invs: Sequence[int] = (18, 32),
    ks: Sequence[int] = tuple(range(1, 11)),
    quick: bool = False,
    seed: int = 0,
    jobs: int = 1,
    out: Callable[[str], None] = print,
    states: Optional[dict] = None,
) -> Dict[str, PropertyResult]:
    """Full property suite; ``subjects`` maps labels to ``(eps_inv, k) -> summary`` makers.

    Without injected subjects the summaries listed in ``names`` are used and
    the random-stream properties are included as well.
    """
    named = subjects is None
    if named:
        subjects = named_subjects(names)
    if quick:
        ks = [k for k in ks if k <= 6]
    results, skipped = adversary_grid(subjects, eps_invs, ks, cross_check_upto=4,
                                      max_n=max_n_from_env(), jobs=jobs, named=named, states=states)
    for point in skipped:
        out(f"SKIP {point} (QA_MAX_N)")
    if named:
        names = list(subjects)
        results["oracle_equivalence"] = oracle_equivalence(names, 9 if quick else 36, seed=seed)
        results["rank_equivalence"] = rank_equivalence(9 if quick else 18, seed=seed)
        results["order_isomorphism"] = order_isomorphism(names, 2 if quick else 6, seed=seed)
    for res in results.values():
        out(res.line())
    return results


@dataclass
class TrendRow:
    summary: str
    eps_inv: int
    k: int
    n: int
    peak_items: int
    final_items: int
    normalized: Fraction
    ratio: Fraction

    def csv_row(self) -> Dict[str, str]:
        return {
            "summary": self.summary,
            "eps_inv": str(self.eps_inv),
            "k": str(self.k),
            "N": str(self.n),
            "peak_items": str(self.peak_items),
            "final_items": str(self.final_items),
            "normalized": f"{float(self.normalized):.6f}",
            "ratio": f"{float(self.ratio):.6f}",
        }


def space_trend(summary: str = "gk", eps_inv: int = 32, ks: Sequence[int] = tuple(range(6, 15)),
                seed: int = 0) -> List[TrendRow]:
    """Peak stored items at ``N = eps_inv * 2**k`` on one seeded random stream.

    ``normalized`` divides the peak by ``eps_inv * (k + 2)``; ``ratio`` compares
    it with the first checkpoint.
    """
    ks = sorted(ks)
    stream = random_stream(random.Random(seed), eps_inv * 2 ** ks[-1])
    checkpoints = {eps_inv * 2 ** k: k for k in ks}
    rows: List[TrendRow] = []

    def add(k, n, peak, final):
        norm = Fraction(peak, eps_inv * (k + 2))
        ratio = norm / rows[0].normalized if rows else Fraction(1)
        rows.append(TrendRow(summary, eps_inv, k, n, peak, final, norm, ratio))

    if summary == "offline":
        for n, k in sorted(checkpoints.items()):
            s = make_summary(summary, eps_inv)
            s.extend(stream[:n])
            s.finalize()
            add(k, n, s.meter.max_items_total, len(s.stored))
        return rows
    s = make_summary(summary, eps_inv)
    for n, x in enumerate(stream, start=1):
        s.process(x)
        if n in checkpoints:
            add(checkpoints[n], n, s.meter.max_items_total, len(s.stored))
    return rows
