"""The small ``eps = 1/6, k = 3`` construction and two fixed gap fixtures.

The gap fixtures are hand-made memory states for a hypothetical subject; they
exercise the gap arithmetic only and are independent of any real summary.
"""

from __future__ import annotations

from fractions import Fraction
from typing import Dict, List, Tuple

from .adversary import AdvStrategy, full_gap, restricted_gap
from .streams import Interval, StreamLog
from .summaries import GKSummary
from .summary_api import LockstepPair, MemoryState
from .universe import format_item

EPS_INV = 6
DEPTH = 3


def _items(values) -> List[Fraction]:
    return [Fraction(v) for v in values]


def restricted_ranks_fixture() -> Tuple[StreamLog, StreamLog, MemoryState, MemoryState, Interval]:
    """14 items inside ``(0, 15)`` (plus a few outside), stored at restricted ranks 1, 6, 11, 14."""
    outside = _items([-5, -3, 20, 31])
    inside = _items(range(1, 15))
    pi = StreamLog(outside[:2] + inside + outside[2:])
    rho = StreamLog(outside[:2] + inside[::-1] + outside[2:])
    stored = _items([-5, 1, 6, 11, 14, 31])
    state = MemoryState(tuple(stored), b"fixture-1")
    return pi, rho, state, state, Interval(Fraction(0), Fraction(15))


def first_leaf_fixture() -> Tuple[StreamLog, StreamLog, MemoryState, MemoryState]:
    """Twelve items per stream, stored at ranks 1, 5, 9, 12."""
    pi = StreamLog(_items(range(1, 13)))
    rho = StreamLog(_items(range(101, 113)))
    s_pi = MemoryState(tuple(_items([1, 5, 9, 12])), b"fixture-2")
    s_rho = MemoryState(tuple(_items([101, 105, 109, 112])), b"fixture-2")
    return pi, rho, s_pi, s_rho


def fixture_gaps() -> Dict[str, dict]:
    pi, rho, s_pi, s_rho, iv = restricted_ranks_fixture()
    g1 = restricted_gap(pi, rho, s_pi.I, s_rho.I, iv, iv)
    pi2, rho2, t_pi, t_rho = first_leaf_fixture()
    g2 = full_gap(pi2, rho2, t_pi.I, t_rho.I)
    return {"restricted_ranks": g1.to_json(), "first_leaf": g2.to_json()}


def replay_example(subject_factory=None) -> dict:
    """Run the depth-3 construction with ``eps = 1/6`` and summarise its shape.

    ``checkpoints`` are the stream lengths after each leaf; ``spine`` the
    lengths when the leftmost leaf, its parent and the root complete.
    """
    factory = subject_factory or (lambda: GKSummary(EPS_INV))
    pair = LockstepPair(factory, check=True, strict=True)
    strategy = AdvStrategy(pair, EPS_INV)
    root = strategy.run(DEPTH)
    nodes = list(root.walk())
    leaves = [n for n in nodes if n.is_leaf]
    spine = []
    node = root
    while node is not None:
        spine.append(node.n_after)
        node = node.left
    return {
        "eps_inv": EPS_INV,
        "k": DEPTH,
        "subject": pair.d_pi.name,
        "n_total": len(pair.pi),
        "checkpoints": sorted(leaf.n_after for leaf in leaves),
        "spine": sorted(spine),
        "leaves": len(leaves),
        "per_leaf": [leaf.n_items for leaf in leaves],
        "refinements": sum(1 for n in nodes if n.gap is not None),
        "fixture_gaps": fixture_gaps(),
        "streams": {"pi": [format_item(x) for x in pair.pi], "rho": [format_item(x) for x in pair.rho]},
        "trace": strategy.trace.to_json(),
    }
