"""Exact, dense, totally ordered universe of items.

Items are :class:`fractions.Fraction` values, so any non-empty open interval
can be subdivided forever without losing precision. Interval endpoints may
additionally be one of the two sentinels :data:`NEG_INF` / :data:`POS_INF`.
"""

from __future__ import annotations

from enum import IntEnum
from fractions import Fraction
from typing import List, Union

from .errors import EmptyInterval

Item = Fraction


class Ordering(IntEnum):
    LT = -1
    EQ = 0
    GT = 1


class _Infinity:
    """Sentinel strictly below (sign=-1) or above (sign=+1) every Item."""

    __slots__ = ("sign",)

    def __init__(self, sign: int) -> None:
        self.sign = sign

    def __repr__(self) -> str:
        return "NEG_INF" if self.sign < 0 else "POS_INF"

    def __str__(self) -> str:
        return "-inf" if self.sign < 0 else "+inf"

    def __reduce__(self):
        return (_sentinel, (self.sign,))

    def __hash__(self) -> int:
        return hash(("quantlb-inf", self.sign))

    def __eq__(self, other: object) -> bool:
        return isinstance(other, _Infinity) and other.sign == self.sign

    def __ne__(self, other: object) -> bool:
        return not self == other

    def __lt__(self, other: object) -> bool:
        if isinstance(other, _Infinity):
            return self.sign < other.sign
        return self.sign < 0

    def __le__(self, other: object) -> bool:
        return self == other or self < other

    def __gt__(self, other: object) -> bool:
        if isinstance(other, _Infinity):
            return self.sign > other.sign
        return self.sign > 0

    def __ge__(self, other: object) -> bool:
        return self == other or self > other


NEG_INF = _Infinity(-1)
POS_INF = _Infinity(+1)


def _sentinel(sign: int) -> _Infinity:
    return NEG_INF if sign < 0 else POS_INF


Bound = Union[Fraction, _Infinity]


def is_finite(b: Bound) -> bool:
    return not isinstance(b, _Infinity)


def item(value) -> Item:
    """Coerce ints, strings ("7/16") and Fractions to an Item.

    Floats are rejected: they would silently import binary rounding.
    """
    if isinstance(value, float):
        raise TypeError("floats are not Items; pass a Fraction, int or 'num/den' string")
    if isinstance(value, str):
        return parse_item(value)
    return Fraction(value)


def to_fraction(x) -> Fraction:
    """Exact fraction; floats go through their shortest repr (0.37 -> 37/100)."""
    if isinstance(x, float):
        return Fraction(repr(x))
    return Fraction(x)


def compare(a: Bound, b: Bound) -> Ordering:
    if a < b:
        return Ordering.LT
    if b < a:
        return Ordering.GT
    return Ordering.EQ


def between(lo: Bound, hi: Bound) -> Item:
    """A deterministic item strictly inside ``(lo, hi)``."""
    if not lo < hi:
        raise EmptyInterval(f"({format_bound(lo)}, {format_bound(hi)}) is empty")
    lo_fin, hi_fin = is_finite(lo), is_finite(hi)
    if lo_fin and hi_fin:
        return (lo + hi) / 2
    if hi_fin:
        return hi - 1
    if lo_fin:
        return lo + 1
    return Fraction(0)


def generate_increasing(lo: Bound, hi: Bound, m: int) -> List[Item]:
    """``m`` increasing items splitting ``(lo, hi)`` into ``m + 1`` equal parts.

    Unbounded sides are first closed off at distance ``m + 1`` from the finite
    endpoint (or to ``(0, m + 1)`` when both sides are open), which keeps the
    output integral there and the rule uniform.
    """
    if m < 1:
        raise ValueError(f"m must be >= 1, got {m}")
    if not lo < hi:
        raise EmptyInterval(f"({format_bound(lo)}, {format_bound(hi)}) is empty")
    lo_fin, hi_fin = is_finite(lo), is_finite(hi)
    if not lo_fin and not hi_fin:
        lo, hi = Fraction(0), Fraction(m + 1)
    elif not lo_fin:
        lo = hi - (m + 1)
    elif not hi_fin:
        hi = lo + (m + 1)
    step = (hi - lo) / (m + 1)
    return [lo + step * j for j in range(1, m + 1)]


def format_item(x: Item) -> str:
    x = Fraction(x)
    return f"{x.numerator}/{x.denominator}"


def parse_item(text: str) -> Item:
    return Fraction(text.strip())


def format_bound(b: Bound) -> str:
    if isinstance(b, _Infinity):
        return str(b)
    return format_item(b)


def parse_bound(text: str) -> Bound:
    t = text.strip()
    if t == "-inf":
        return NEG_INF
    if t in ("+inf", "inf"):
        return POS_INF
    return parse_item(t)
