"""Comparison-based summary abstraction and the state-equivalence checkers.

A summary's memory is split into the sorted item array ``I`` and an item-free
byte string ``G``. Two states are equivalent when ``|I|`` and ``G`` agree; two
streams are indistinguishable when they drive fresh summaries into equivalent
states whose stored items sit at the same arrival positions.
"""

from __future__ import annotations

import json
from abc import ABC, abstractmethod
from dataclasses import dataclass
from typing import Callable, List, Optional, Sequence, Tuple

from .errors import EmptySummary, LengthMismatch, PreconditionViolated, SubjectLacksRankQuery
from .streams import StreamLog
from .universe import Item, format_item, parse_item, to_fraction


@dataclass(frozen=True)
class MemoryState:
    I: Tuple[Item, ...]
    G: bytes

    def to_json(self) -> dict:
        return {"I": [format_item(x) for x in self.I], "G": self.G.hex()}

    @classmethod
    def from_json(cls, obj) -> "MemoryState":
        if isinstance(obj, str):
            obj = json.loads(obj)
        return cls(tuple(parse_item(s) for s in obj["I"]), bytes.fromhex(obj["G"]))


class SpaceMeter:
    """Peak ``|I|`` over the lifetime of a summary."""

    def __init__(self) -> None:
        self.current = 0
        self.max_items_total = 0

    def observe(self, size: int) -> None:
        self.current = size
        if size > self.max_items_total:
            self.max_items_total = size

    def __repr__(self) -> str:
        return f"SpaceMeter(current={self.current}, max={self.max_items_total})"


class QuantileSummary(ABC):
    """Base class for deterministic comparison-based quantile summaries.

    Subclasses keep their stored items sorted in :attr:`stored` and encode all
    remaining state in :meth:`general_memory`. :meth:`query_index` must depend
    on ``len(stored)`` and ``general_memory()`` only.
    """

    name = "abstract"
    streaming = True
    supports_rank = False

    def __init__(self, eps_inv: int) -> None:
        if eps_inv < 1:
            raise ValueError(f"eps_inv must be a positive integer, got {eps_inv}")
        self.eps_inv = int(eps_inv)
        self.n = 0
        self.meter = SpaceMeter()

    @property
    @abstractmethod
    def stored(self) -> Sequence[Item]:
        """Sorted item array; callers must not mutate it."""

    @abstractmethod
    def _insert(self, x: Item) -> None:
        ...

    @abstractmethod
    def general_memory(self) -> bytes:
        ...

    @abstractmethod
    def query_index(self, phi) -> int:
        """1-based index into :attr:`stored` answering quantile ``phi``."""

    def process(self, x: Item) -> None:
        self._insert(x)
        self.meter.observe(len(self.stored))

    def extend(self, xs) -> None:
        for x in xs:
            self.process(x)

    def query(self, phi) -> Tuple[int, Item]:
        if not self.stored:
            raise EmptySummary("query on an empty summary")
        phi = to_fraction(phi)
        if not 0 <= phi <= 1:
            raise ValueError(f"phi must lie in [0, 1], got {phi}")
        j = self.query_index(phi)
        return j, self.stored[j - 1]

    def rank(self, q: Item) -> int:
        raise SubjectLacksRankQuery(f"{self.name} does not answer rank queries")

    def snapshot(self) -> MemoryState:
        return MemoryState(tuple(self.stored), self.general_memory())

    def __len__(self) -> int:
        return len(self.stored)


SummaryFactory = Callable[[], QuantileSummary]


def check_equivalent(m1: MemoryState, m2: MemoryState) -> bool:
    return len(m1.I) == len(m2.I) and m1.G == m2.G


@dataclass(frozen=True)
class IndistinguishabilityVerdict:
    ok: bool
    prefix: Optional[int] = None
    reason: str = ""

    def __bool__(self) -> bool:
        return self.ok


class LockstepPair:
    """Two fresh summaries fed the streams pi and rho side by side.

    With ``check`` enabled, state equivalence and positional alignment are
    verified after every fed pair; ``strict`` turns a violation into
    :class:`PreconditionViolated`, otherwise the first one is recorded.
    """

    def __init__(self, factory: SummaryFactory, check: bool = True, strict: bool = True) -> None:
        self.pi = StreamLog()
        self.rho = StreamLog()
        self.d_pi = factory()
        self.d_rho = factory()
        self.check = check
        self.strict = strict
        self.violation: Optional[IndistinguishabilityVerdict] = None
        self.path = ""
        self._arrivals: Optional[List[int]] = None

    def __len__(self) -> int:
        return len(self.pi)

    def stored_arrivals(self) -> List[int]:
        """Arrival indices (in pi) of the items currently stored by ``d_pi``."""
        if self._arrivals is None:
            self._arrivals = self.pi.arrival_indices(self.d_pi.stored)
        return self._arrivals

    def feed(self, a: Item, b: Item) -> None:
        self._arrivals = None
        self.pi.append(a)
        self.d_pi.process(a)
        self.rho.append(b)
        self.d_rho.process(b)
        if self.check:
            reason = self._violation()
            if reason:
                verdict = IndistinguishabilityVerdict(False, len(self.pi), reason)
                if self.violation is None:
                    self.violation = verdict
                if self.strict:
                    raise PreconditionViolated(
                        f"streams became distinguishable at prefix {len(self.pi)}: {reason}",
                        self.path,
                    )

    def _violation(self) -> str:
        I_pi, I_rho = self.d_pi.stored, self.d_rho.stored
        if len(I_pi) != len(I_rho):
            return f"|I| differs ({len(I_pi)} vs {len(I_rho)})"
        if self.d_pi.general_memory() != self.d_rho.general_memory():
            return "general memory G differs"
        arrivals = self.pi.arrival_indices(I_pi)
        if arrivals != self.rho.arrival_indices(I_rho):
            return "stored items are not positionally aligned"
        self._arrivals = arrivals
        return ""

    def verdict(self) -> IndistinguishabilityVerdict:
        # a failing verdict is falsy, so test identity rather than truth
        return self.violation if self.violation is not None else IndistinguishabilityVerdict(True)


def check_indistinguishable(
    factory: SummaryFactory, pi: Sequence[Item], rho: Sequence[Item]
) -> IndistinguishabilityVerdict:
    """Replay both streams on fresh summaries and report the first violation."""
    pi, rho = list(pi), list(rho)
    if len(pi) != len(rho):
        raise LengthMismatch(f"stream lengths differ: {len(pi)} vs {len(rho)}")
    pair = LockstepPair(factory, check=True, strict=False)
    for a, b in zip(pi, rho):
        pair.feed(a, b)
        if pair.violation is not None:
            break
    return pair.verdict()


def query_indices(summary: QuantileSummary, phis) -> List[int]:
    return [summary.query(phi)[0] for phi in phis]
