"""Adversarial lower-bound harness for deterministic comparison-based quantile summaries."""

from .adversary import (
    AdversaryTrace,
    AdvStrategy,
    GapReport,
    adv_strategy,
    check_claim_gaps,
    full_gap,
    refine_intervals,
    restricted_gap,
    run_adversary,
    space_gap_rhs,
)
from .attacks import AttackOutcome, biased_attack, median_attack, quantile_attack, rank_attack
from .estimator import QuantileSketch
from .streams import Interval, StreamLog, restrict_item_array
from .summaries import GKSummary, OfflineSummary, make_summary
from .summary_api import LockstepPair, MemoryState, QuantileSummary, check_equivalent, check_indistinguishable
from .universe import NEG_INF, POS_INF, between, generate_increasing

__all__ = [
    "AdversaryTrace", "AdvStrategy", "GapReport", "adv_strategy", "check_claim_gaps", "full_gap",
    "refine_intervals", "restricted_gap", "run_adversary", "space_gap_rhs",
    "AttackOutcome", "biased_attack", "median_attack", "quantile_attack", "rank_attack",
    "QuantileSketch", "Interval", "StreamLog", "restrict_item_array",
    "GKSummary", "OfflineSummary", "make_summary",
    "LockstepPair", "MemoryState", "QuantileSummary", "check_equivalent", "check_indistinguishable",
    "NEG_INF", "POS_INF", "between", "generate_increasing",
]
__version__ = "0.1.0"
