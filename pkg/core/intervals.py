"""Exact finite interval-set algebra with Lebesgue measure.

Intervals carry exact open/closed flags so point-set disjointness can be
certified, while every measure computation ignores the flags (a point has
measure zero).

Canonical form of an :class:`IntervalSet`: parts sorted by ``lo``, pairwise
disjoint, overlapping parts merged, and two parts touching at a shared
endpoint merged only when both are closed there. An open/closed touching pair
stays split.
"""

import bisect
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any, Dict, Iterable, List, Optional, Sequence, Tuple

from core.exceptions import IntervalError
from core.rationals import RationalLike, format_rational, to_rational


@dataclass(frozen=True)
class Interval:
    """A bounded interval with exact rational endpoints."""

    lo: Fraction
    hi: Fraction
    lo_open: bool = False
    hi_open: bool = False

    def __post_init__(self) -> None:
        object.__setattr__(self, "lo", to_rational(self.lo))
        object.__setattr__(self, "hi", to_rational(self.hi))
        if self.lo > self.hi:
            raise IntervalError(f"Malformed interval: lo={self.lo} > hi={self.hi}")
        if self.lo == self.hi and (self.lo_open or self.hi_open):
            raise IntervalError(f"Degenerate interval at {self.lo} must be closed")

    @classmethod
    def closed(cls, lo: RationalLike, hi: RationalLike) -> "Interval":
        return cls(to_rational(lo), to_rational(hi))

    @classmethod
    def open(cls, lo: RationalLike, hi: RationalLike) -> "Interval":
        return cls(to_rational(lo), to_rational(hi), True, True)

    @property
    def length(self) -> Fraction:
        return self.hi - self.lo

    @property
    def is_degenerate(self) -> bool:
        return self.lo == self.hi

    def closure(self) -> "Interval":
        return Interval(self.lo, self.hi)

    def contains(self, x: RationalLike) -> bool:
        x = to_rational(x)
        if x < self.lo or x > self.hi:
            return False
        if x == self.lo and self.lo_open:
            return False
        if x == self.hi and self.hi_open:
            return False
        return True

    def contains_interval(self, other: "Interval") -> bool:
        """Point-set inclusion ``other ⊆ self``."""
        if other.lo < self.lo or other.hi > self.hi:
            return False
        if other.lo == self.lo and self.lo_open and not other.lo_open:
            return False
        if other.hi == self.hi and self.hi_open and not other.hi_open:
            return False
        return True

    def intersection(self, other: "Interval") -> Optional["Interval"]:
        return intersect_intervals(self, other)

    def overlap_length(self, other: "Interval") -> Fraction:
        lo = max(self.lo, other.lo)
        hi = min(self.hi, other.hi)
        return hi - lo if hi > lo else Fraction(0)

    def __str__(self) -> str:
        left = "(" if self.lo_open else "["
        right = ")" if self.hi_open else "]"
        return f"{left}{format_rational(self.lo)}, {format_rational(self.hi)}{right}"

    def to_dict(self) -> Dict[str, Any]:
        return {
            "lo": format_rational(self.lo),
            "hi": format_rational(self.hi),
            "lo_open": self.lo_open,
            "hi_open": self.hi_open,
        }

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "Interval":
        return cls(
            to_rational(data["lo"]),
            to_rational(data["hi"]),
            bool(data.get("lo_open", False)),
            bool(data.get("hi_open", False)),
        )


def _make(lo: Fraction, hi: Fraction, lo_open: bool, hi_open: bool) -> Optional[Interval]:
    """Build an interval, or None when the bounds describe the empty set."""
    if lo > hi:
        return None
    if lo == hi and (lo_open or hi_open):
        return None
    return Interval(lo, hi, lo_open, hi_open)


def intersect_intervals(a: Interval, b: Interval) -> Optional[Interval]:
    """Exact intersection of two intervals, None when empty."""
    if a.lo > b.lo:
        lo, lo_open = a.lo, a.lo_open
    elif b.lo > a.lo:
        lo, lo_open = b.lo, b.lo_open
    else:
        lo, lo_open = a.lo, a.lo_open or b.lo_open
    if a.hi < b.hi:
        hi, hi_open = a.hi, a.hi_open
    elif b.hi < a.hi:
        hi, hi_open = b.hi, b.hi_open
    else:
        hi, hi_open = a.hi, a.hi_open or b.hi_open
    return _make(lo, hi, lo_open, hi_open)


def _sort_key(interval: Interval) -> Tuple[Fraction, bool]:
    # A closed lower bound starts before an open one at the same coordinate.
    return (interval.lo, interval.lo_open)


@dataclass(frozen=True)
class IntervalSet:
    """Sorted disjoint finite union of intervals in canonical form.

    Build instances through :func:`normalize` (or the classmethods); the
    constructor trusts its input.
    """

    parts: Tuple[Interval, ...] = ()
    _his: Tuple[Fraction, ...] = field(default=(), repr=False, compare=False)

    def __post_init__(self) -> None:
        object.__setattr__(self, "parts", tuple(self.parts))
        object.__setattr__(self, "_his", tuple(p.hi for p in self.parts))

    @classmethod
    def empty(cls) -> "IntervalSet":
        return cls(())

    @classmethod
    def of(cls, *intervals: Interval) -> "IntervalSet":
        return normalize(intervals)

    @classmethod
    def closed(cls, *pairs: Tuple[RationalLike, RationalLike]) -> "IntervalSet":
        return normalize([Interval.closed(lo, hi) for lo, hi in pairs])

    def __iter__(self):
        return iter(self.parts)

    def __len__(self) -> int:
        return len(self.parts)

    def __bool__(self) -> bool:
        return bool(self.parts)

    def is_canonical(self) -> bool:
        return normalize(self.parts).parts == self.parts

    def measure(self) -> Fraction:
        return sum((p.hi - p.lo for p in self.parts), Fraction(0))

    def contains(self, x: RationalLike) -> bool:
        x = to_rational(x)
        idx = bisect.bisect_left(self._his, x)
        while idx < len(self.parts) and self.parts[idx].lo <= x:
            if self.parts[idx].contains(x):
                return True
            idx += 1
        return False

    def parts_meeting(self, j: Interval) -> List[Interval]:
        """Parts whose closure meets the closure of ``j``, in order."""
        idx = bisect.bisect_left(self._his, j.lo)
        out: List[Interval] = []
        while idx < len(self.parts) and self.parts[idx].lo <= j.hi:
            out.append(self.parts[idx])
            idx += 1
        return out

    def intersect(self, j: Interval) -> "IntervalSet":
        pieces = []
        for part in self.parts_meeting(j):
            piece = intersect_intervals(part, j)
            if piece is not None:
                pieces.append(piece)
        return IntervalSet(tuple(pieces))

    def intersect_set(self, other: "IntervalSet") -> "IntervalSet":
        pieces: List[Interval] = []
        for part in other.parts:
            pieces.extend(self.intersect(part).parts)
        return normalize(pieces)

    def measure_in(self, j: Interval) -> Fraction:
        total = Fraction(0)
        for part in self.parts_meeting(j):
            total += part.overlap_length(j)
        return total

    def subtract(self, other: "IntervalSet") -> "IntervalSet":
        return subtract(self, other)

    def union(self, other: "IntervalSet") -> "IntervalSet":
        return normalize(list(self.parts) + list(other.parts))

    def endpoints(self) -> List[Fraction]:
        out: List[Fraction] = []
        for part in self.parts:
            out.append(part.lo)
            out.append(part.hi)
        return out

    def hull(self) -> Optional[Interval]:
        if not self.parts:
            return None
        first, last = self.parts[0], self.parts[-1]
        return Interval(first.lo, last.hi, first.lo_open, last.hi_open)

    def to_list(self) -> List[Dict[str, Any]]:
        return [p.to_dict() for p in self.parts]

    @classmethod
    def from_list(cls, data: Iterable[Dict[str, Any]]) -> "IntervalSet":
        return normalize([Interval.from_dict(item) for item in data])

    def __str__(self) -> str:
        return "{" + ", ".join(str(p) for p in self.parts) + "}"


def normalize(raw: Iterable[Interval]) -> IntervalSet:
    """Canonical disjoint sorted merged form of ``raw``."""
    items = []
    for item in raw:
        if not isinstance(item, Interval):
            raise IntervalError(f"Expected Interval, got {type(item).__name__}")
        items.append(item)
    items.sort(key=_sort_key)

    merged: List[Interval] = []
    for nxt in items:
        if not merged:
            merged.append(nxt)
            continue
        cur = merged[-1]
        if nxt.lo < cur.hi:
            overlapping = True
        elif nxt.lo == cur.hi:
            overlapping = not cur.hi_open and not nxt.lo_open
        else:
            overlapping = False
        if not overlapping:
            merged.append(nxt)
            continue
        if nxt.hi > cur.hi:
            hi, hi_open = nxt.hi, nxt.hi_open
        elif nxt.hi < cur.hi:
            hi, hi_open = cur.hi, cur.hi_open
        else:
            hi, hi_open = cur.hi, cur.hi_open and nxt.hi_open
        merged[-1] = Interval(cur.lo, hi, cur.lo_open, hi_open)
    return IntervalSet(tuple(merged))


def measure(s: IntervalSet) -> Fraction:
    """Exact total length of a canonical set."""
    return s.measure()


def intersect(s: IntervalSet, j: Interval) -> IntervalSet:
    """Canonical intersection of a set with one interval."""
    return s.intersect(j)


def _carve(part: Interval, holes: Sequence[Interval]) -> List[Interval]:
    """Remove sorted disjoint ``holes`` from one interval."""
    pieces: List[Interval] = []
    cur_lo, cur_lo_open = part.lo, part.lo_open
    for hole in holes:
        # every hole meets ``part``; holes are disjoint and sorted
        piece = _make(cur_lo, hole.lo, cur_lo_open, not hole.lo_open)
        if piece is not None:
            pieces.append(piece)
        cur_lo, cur_lo_open = hole.hi, not hole.hi_open
        if cur_lo > part.hi:
            return pieces
    tail = _make(cur_lo, part.hi, cur_lo_open, part.hi_open)
    if tail is not None:
        pieces.append(tail)
    return pieces


def subtract(s: IntervalSet, t: IntervalSet) -> IntervalSet:
    """Canonical difference ``s \\ t`` with exact boundary flags."""
    if not t.parts:
        return s
    pieces: List[Interval] = []
    for part in s.parts:
        holes = [h for h in t.parts_meeting(part) if intersect_intervals(h, part) is not None]
        if not holes:
            pieces.append(part)
            continue
        pieces.extend(_carve(part, holes))
    return IntervalSet(tuple(pieces))


def subtract_disjoint(s: IntervalSet, holes: Sequence[Interval]) -> IntervalSet:
    """``subtract`` for holes already known to be pairwise non-mergeable.

    Skips the merge pass of :func:`normalize`; used for the removal families,
    whose closures are pairwise disjoint.
    """
    return subtract(s, IntervalSet(tuple(sorted(holes, key=_sort_key))))
