"""Concrete summaries used as subjects: simplified GK, greedy GK, offline."""

from __future__ import annotations

import json
from array import array
from bisect import bisect_left, bisect_right
from itertools import accumulate
from math import floor
from typing import List, Optional, Sequence, Tuple

from .errors import EmptySummary, SummaryNotStreaming
from .summary_api import QuantileSummary
from .universe import Item, format_item

_POLICIES = ("gk", "gk-greedy", "none")


def _header(tag: bytes, *ints: int) -> bytes:
    return tag + array("q", ints).tobytes()


class GKSummary(QuantileSummary):
    """Greenwald-Khanna tuples ``(v, g, delta)`` without the band hierarchy.

    ``policy`` selects the compression schedule: ``"gk"`` compresses once
    every ``compress_every`` insertions (default ``floor(eps_inv / 2)``),
    ``"gk-greedy"`` merges exhaustively after every insertion and ``"none"``
    never compresses, i.e. stores every item.

    The capacity ``floor(2 * eps * n)`` is computed as ``2 * n // eps_inv``.
    Interior insertions get ``delta = cap - 1``; new extremes are exact.
    """

    supports_rank = True

    def __init__(self, eps_inv: int, policy: str = "gk", compress_every: Optional[int] = None) -> None:
        super().__init__(eps_inv)
        if policy not in _POLICIES:
            raise ValueError(f"unknown policy {policy!r}; expected one of {_POLICIES}")
        self.policy = policy
        self.name = policy if policy != "none" else "gk-store-all"
        self.compress_every = compress_every or max(1, self.eps_inv // 2)
        self._v: List[Item] = []
        self._g: List[int] = []
        self._d: List[int] = []
        self._cum: Optional[Tuple[List[int], List[int]]] = None

    @property
    def stored(self) -> Sequence[Item]:
        return self._v

    @property
    def capacity(self) -> int:
        return 2 * self.n // self.eps_inv

    @property
    def tuples(self) -> List[Tuple[Item, int, int]]:
        return list(zip(self._v, self._g, self._d))

    def _insert(self, x: Item) -> None:
        self.n += 1
        self._cum = None
        pos = bisect_right(self._v, x)
        if pos == 0 or pos == len(self._v):
            delta = 0
        else:
            delta = max(0, self.capacity - 1)
        self._v.insert(pos, x)
        self._g.insert(pos, 1)
        self._d.insert(pos, delta)
        if self.policy == "gk":
            if self.n % self.compress_every == 0:
                self.compress()
        elif self.policy == "gk-greedy":
            self.compress_greedy()

    def _mergeable(self, i: int, cap: int) -> bool:
        return self._g[i] + self._g[i + 1] + self._d[i + 1] <= cap

    def _merge(self, i: int) -> None:
        # fold tuple i into its successor
        self._g[i + 1] += self._g[i]
        del self._v[i], self._g[i], self._d[i]

    def compress(self) -> None:
        """One right-to-left pass; the first and last tuples are never removed."""
        cap = self.capacity
        i = len(self._v) - 2
        while i >= 1:
            if self._mergeable(i, cap):
                self._merge(i)
            i -= 1
        self._cum = None

    def compress_greedy(self) -> None:
        """Left-to-right merging repeated until no pair is mergeable."""
        cap = self.capacity
        changed = True
        while changed:
            changed = False
            i = 1
            while i <= len(self._v) - 2:
                if self._mergeable(i, cap):
                    self._merge(i)
                    changed = True
                else:
                    i += 1
        self._cum = None

    def general_memory(self) -> bytes:
        return (
            _header(b"GK", self.eps_inv, self.n, len(self._v))
            + array("q", self._g).tobytes()
            + array("q", self._d).tobytes()
        )

    def _bounds(self) -> Tuple[List[int], List[int]]:
        if self._cum is None:
            rmin = list(accumulate(self._g))
            rmax = [r + d for r, d in zip(rmin, self._d)]
            self._cum = (rmin, rmax)
        return self._cum

    def query_index(self, phi) -> int:
        n = self.n
        target = max(1, floor(phi * n))
        slack = n // self.eps_inv
        rmin, rmax = self._bounds()
        i = bisect_left(rmin, target - slack)
        while i < len(rmin):
            if rmax[i] <= target + slack:
                return i + 1
            i += 1
        # unreachable while the invariant holds; fall back to the closest bound
        return len(rmin)

    def rank(self, q: Item) -> int:
        """Estimate of the number of processed items that are ``<= q``."""
        if not self._v:
            raise EmptySummary("rank query on an empty summary")
        j = bisect_right(self._v, q)
        if j == 0:
            return 0
        if j == len(self._v):
            return self.n
        rmin, rmax = self._bounds()
        return (rmin[j - 1] + rmax[j] - 1) // 2

    def invariant_violations(self) -> List[str]:
        """Broken GK invariants, empty when the state is sound."""
        out = []
        if sum(self._g) != self.n:
            out.append(f"sum(g) = {sum(self._g)} != n = {self.n}")
        if any(a >= b for a, b in zip(self._v, self._v[1:])):
            out.append("stored values not strictly increasing")
        cap = max(1, self.capacity)
        for i, (g, d) in enumerate(zip(self._g, self._d)):
            if g + d > cap:
                out.append(f"tuple {i}: g + delta = {g + d} > {cap}")
        if self._v and (self._g[0], self._d[0]) != (1, 0):
            out.append("minimum tuple is not exact")
        if self._v and self._d[-1] != 0:
            out.append("maximum tuple is not exact")
        return out

    def state_json(self) -> str:
        return json.dumps([[format_item(v), g, d] for v, g, d in self.tuples])


class OfflineSummary(QuantileSummary):
    """Offline baseline: buffers everything, keeps ceil(1/(2 eps)) items at the end.

    The selection holds the items of rank ``floor((2j+1) * N / eps_inv)``
    (clamped to ``[1, N]``) for ``j = 0 .. ceil(eps_inv / 2) - 1``.
    """

    name = "offline"
    streaming = False

    def __init__(self, eps_inv: int) -> None:
        super().__init__(eps_inv)
        self._buffer: List[Item] = []
        self._ranks: Optional[List[int]] = None
        self._selection: List[Item] = []

    @property
    def finalized(self) -> bool:
        return self._ranks is not None

    @property
    def stored(self) -> Sequence[Item]:
        return self._selection if self.finalized else self._buffer

    @property
    def selected_ranks(self) -> List[int]:
        return list(self._ranks or [])

    def _insert(self, x: Item) -> None:
        if self.finalized:
            raise SummaryNotStreaming("offline summary is already finalized")
        self.n += 1
        pos = bisect_right(self._buffer, x)
        self._buffer.insert(pos, x)

    def finalize(self) -> None:
        if self.finalized:
            return
        n, m = self.n, self.eps_inv
        if n == 0:
            raise EmptySummary("nothing to finalize")
        count = -(-m // 2)
        self._ranks = [min(n, max(1, (2 * j + 1) * n // m)) for j in range(count)]
        self._selection = [self._buffer[r - 1] for r in self._ranks]
        self._buffer = []
        self.meter.observe(len(self._selection))

    def general_memory(self) -> bytes:
        ranks = self._ranks or []
        return _header(b"OF", self.eps_inv, self.n, int(self.finalized)) + array("q", ranks).tobytes()

    def query_index(self, phi) -> int:
        self.finalize()
        target = max(1, floor(phi * self.n))
        best = min(range(len(self._ranks)), key=lambda j: (abs(self._ranks[j] - target), j))
        return best + 1

    def query(self, phi):
        self.finalize()
        return super().query(phi)


SUMMARY_NAMES = ("gk", "gk-greedy", "offline")


def make_summary(name: str, eps_inv: int) -> QuantileSummary:
    if name == "gk":
        return GKSummary(eps_inv, "gk")
    if name == "gk-greedy":
        return GKSummary(eps_inv, "gk-greedy")
    if name == "offline":
        return OfflineSummary(eps_inv)
    raise ValueError(f"unknown summary {name!r}; expected one of {SUMMARY_NAMES}")


def summary_factory(name: str, eps_inv: int):
    make_summary(name, eps_inv)  # validate eagerly
    return lambda: make_summary(name, eps_inv)
