"""Append-only stream logs with order-statistics queries."""

from __future__ import annotations

from bisect import bisect_left, bisect_right
from dataclasses import dataclass
from pathlib import Path
from typing import Dict, Iterable, Iterator, List, Optional, Sequence, Tuple

from sortedcontainers import SortedList

from .errors import (
    DuplicateItem,
    InvalidInterval,
    NoPredecessor,
    NoSuccessor,
    NotInStream,
)
from .universe import NEG_INF, POS_INF, Bound, Item, format_bound, format_item, is_finite, parse_item


@dataclass(frozen=True)
class Interval:
    """Open interval ``(lo, hi)`` of the extended universe."""

    lo: Bound = NEG_INF
    hi: Bound = POS_INF

    def __post_init__(self) -> None:
        if not self.lo < self.hi:
            raise InvalidInterval(f"invalid interval {self}")

    def __contains__(self, x) -> bool:
        return self.lo < x < self.hi

    def __str__(self) -> str:
        return f"({format_bound(self.lo)}, {format_bound(self.hi)})"

    def to_json(self) -> List[str]:
        return [format_bound(self.lo), format_bound(self.hi)]


WHOLE = Interval()


def _key(x: Item) -> Tuple[int, int]:
    return x.numerator, x.denominator


# Bisection with the infinite sentinels answered directly; comparing a
# Fraction against a non-number goes through a slow ABC check.
def _left(seq, x: Bound) -> int:
    if not is_finite(x):
        return 0 if x < 0 else len(seq)
    if isinstance(seq, SortedList):
        return seq.bisect_left(x)
    return bisect_left(seq, x)


def _right(seq, x: Bound) -> int:
    if not is_finite(x):
        return 0 if x < 0 else len(seq)
    if isinstance(seq, SortedList):
        return seq.bisect_right(x)
    return bisect_right(seq, x)


class StreamLog:
    """A stream of pairwise-distinct items in arrival order.

    ``rank`` is 1-based: one plus the number of strictly smaller items.
    """

    def __init__(self, items: Iterable[Item] = ()) -> None:
        self._items: List[Item] = []
        self._sorted = SortedList()
        # keyed by (numerator, denominator): hashing a Fraction is expensive
        self._arrival: Dict[Tuple[int, int], int] = {}
        # ranks asked since the last append; node checks repeat them a lot
        self._rank_cache: Dict[Tuple[int, int], int] = {}
        for x in items:
            self.append(x)

    def append(self, x: Item) -> "StreamLog":
        key = _key(x)
        if key in self._arrival:
            raise DuplicateItem(f"{format_item(x)} already in stream")
        self._items.append(x)
        self._sorted.add(x)
        self._arrival[key] = len(self._items)
        if self._rank_cache:
            self._rank_cache = {}
        return self

    def __len__(self) -> int:
        return len(self._items)

    def __iter__(self) -> Iterator[Item]:
        return iter(self._items)

    def __getitem__(self, i):
        return self._items[i]

    def __contains__(self, x) -> bool:
        return is_finite(x) and _key(x) in self._arrival

    def __eq__(self, other: object) -> bool:
        if isinstance(other, StreamLog):
            return self._items == other._items
        return NotImplemented

    def __repr__(self) -> str:
        head = ", ".join(format_item(x) for x in self._items[:6])
        more = ", ..." if len(self._items) > 6 else ""
        return f"StreamLog([{head}{more}], n={len(self)})"

    @property
    def items(self) -> List[Item]:
        return list(self._items)

    @property
    def sorted_items(self) -> SortedList:
        return self._sorted

    def arrival_index(self, x: Item) -> int:
        """1-based position of ``x`` in arrival order."""
        try:
            return self._arrival[_key(x)]
        except (KeyError, AttributeError):
            raise NotInStream(f"{format_item(x)} not in stream") from None

    def arrival_indices(self, xs: Iterable[Item]) -> List[int]:
        """``arrival_index`` for many items at once."""
        arrival = self._arrival
        try:
            return [arrival[(x.numerator, x.denominator)] for x in xs]
        except KeyError as exc:
            raise NotInStream(f"{exc.args[0][0]}/{exc.args[0][1]} not in stream") from None

    def count_below(self, x: Bound) -> int:
        """Number of items strictly smaller than ``x`` (``x`` need not occur)."""
        return _left(self._sorted, x)

    def count_at_most(self, x: Bound) -> int:
        return _right(self._sorted, x)

    def rank(self, x: Item) -> int:
        if x not in self:
            raise NotInStream(f"{format_bound(x)} not in stream")
        key = _key(x)
        r = self._rank_cache.get(key)
        if r is None:
            r = self._rank_cache[key] = self._sorted.bisect_left(x) + 1
        return r

    def select(self, r: int) -> Item:
        """The item of rank ``r``."""
        if not 1 <= r <= len(self):
            raise IndexError(f"rank {r} outside [1, {len(self)}]")
        return self._sorted[r - 1]

    def next(self, a: Bound) -> Item:
        """Smallest item strictly larger than ``a``.

        ``a`` may also be an interval bound that is not itself in the stream.
        """
        i = _right(self._sorted, a)
        if i == len(self._sorted):
            raise NoSuccessor(f"no item after {format_bound(a)}")
        return self._sorted[i]

    def prev(self, b: Bound) -> Item:
        i = _left(self._sorted, b)
        if i == 0:
            raise NoPredecessor(f"no item before {format_bound(b)}")
        return self._sorted[i - 1]

    def min(self) -> Item:
        return self._sorted[0]

    def max(self) -> Item:
        return self._sorted[-1]

    def restrict(self, iv: Interval) -> "StreamLog":
        return StreamLog(x for x in self._items if iv.lo < x < iv.hi)

    def count_inside(self, iv: Interval) -> int:
        return _left(self._sorted, iv.hi) - _right(self._sorted, iv.lo)

    def restricted_rank(self, x: Bound, iv: Interval) -> int:
        """Rank of ``x`` within the substream of items inside ``iv``.

        The enclosing endpoints take positions ``0`` and ``n_inside + 1``.
        """
        if x == iv.lo:
            return 0
        below_lo = _right(self._sorted, iv.lo)
        if x == iv.hi:
            return _left(self._sorted, iv.hi) - below_lo + 1
        if not iv.lo < x < iv.hi:
            raise InvalidInterval(f"{format_bound(x)} outside {iv}")
        return self.rank(x) - below_lo

    def restricted_ranks(self, arr: Sequence[Bound], iv: Interval) -> List[int]:
        """``restricted_rank`` of every entry of an enclosed restricted array."""
        below_lo = _right(self._sorted, iv.lo)
        inside = [self.rank(x) - below_lo for x in arr[1:-1]]
        return [0, *inside, _left(self._sorted, iv.hi) - below_lo + 1]

    def dump(self, path) -> None:
        Path(path).write_text("".join(format_item(x) + "\n" for x in self._items))

    @classmethod
    def load(cls, path) -> "StreamLog":
        lines = Path(path).read_text().splitlines()
        return cls(parse_item(line) for line in lines if line.strip())


def restrict_item_array(
    I: Sequence[Item], iv: Interval, enclose: bool = True
) -> List[Bound]:
    """Stored items strictly inside ``iv``, enclosed by ``iv.lo`` and ``iv.hi``.

    The endpoints are included even when they are not (or no longer) stored.
    """
    i = _right(I, iv.lo)
    j = _left(I, iv.hi)
    inside = list(I[i:j])
    if not enclose:
        return inside
    return [iv.lo, *inside, iv.hi]


def restricted_count(I: Sequence[Item], iv: Interval) -> int:
    """``len(restrict_item_array(I, iv))`` without building the list."""
    return _left(I, iv.hi) - _right(I, iv.lo) + 2


def first_index_at_least(I: Sequence[Item], x: Bound) -> int:
    """``min{i | x <= I[i]}`` with 1-based ``i``; ``len(I) + 1`` if none."""
    return _left(I, x) + 1


def interval_of(lo: Optional[Bound], hi: Optional[Bound]) -> Interval:
    return Interval(NEG_INF if lo is None else lo, POS_INF if hi is None else hi)
