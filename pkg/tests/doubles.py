"""Deliberately broken summaries used as negative controls."""

from __future__ import annotations

from array import array
from bisect import bisect_right
from itertools import accumulate
from math import floor
from typing import List

from quantlb.summary_api import QuantileSummary
from quantlb.universe import format_item


class StoreAll(QuantileSummary):
    """Keeps every item with exact counts; the reference for the doubles below."""

    name = "store-all"

    def __init__(self, eps_inv: int) -> None:
        super().__init__(eps_inv)
        self._v: List = []
        self._g: List[int] = []

    @property
    def stored(self):
        return self._v

    def _insert(self, x) -> None:
        self.n += 1
        pos = bisect_right(self._v, x)
        self._v.insert(pos, x)
        self._g.insert(pos, 1)

    def general_memory(self) -> bytes:
        return b"SA" + array("q", [self.n, *self._g]).tobytes()

    def query_index(self, phi) -> int:
        target = max(1, floor(phi * self.n))
        ranks = list(accumulate(self._g))
        return min(range(len(ranks)), key=lambda i: (abs(ranks[i] - target), i)) + 1


class ForgetfulDouble(StoreAll):
    """Stores everything, but on the ``n_total``-th item drops ``width * n_total / eps_inv``
    consecutive stored items right after the minimum (by position only, so it
    stays comparison-based)."""

    name = "forgetful"

    def __init__(self, eps_inv: int, n_total: int, width: int = 3) -> None:
        super().__init__(eps_inv)
        self.n_total = n_total
        self.width = width
        self.dropped = 0

    def _insert(self, x) -> None:
        super()._insert(x)
        if self.n == self.n_total:
            count = self.width * self.n_total // self.eps_inv
            hole = self._g[1:1 + count]
            del self._v[1:1 + count], self._g[1:1 + count]
            self._g[1] += sum(hole)
            self.dropped = count


class LeakyDouble(StoreAll):
    """Writes the value of the latest item into G: not comparison-based."""

    name = "leaky"

    def __init__(self, eps_inv: int) -> None:
        super().__init__(eps_inv)
        self._last = b""

    def _insert(self, x) -> None:
        super()._insert(x)
        self._last = format_item(x).encode()

    def general_memory(self) -> bytes:
        return super().general_memory() + self._last


class ParityDouble(StoreAll):
    """G records the arrival-index parity of each stored item, in sorted order."""

    name = "parity"

    def __init__(self, eps_inv: int) -> None:
        super().__init__(eps_inv)
        self._arrival = {}

    def _insert(self, x) -> None:
        super()._insert(x)
        self._arrival[x] = self.n

    def general_memory(self) -> bytes:
        return super().general_memory() + bytes(self._arrival[v] % 2 for v in self._v)
