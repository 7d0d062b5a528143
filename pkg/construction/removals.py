"""Removal construction: the families I, J, K and truncations of the set E.

E = [-1, 1] minus the union over all addresses of the two open intervals

    I^L(addr) = (a - r/2, a - (1/2 - alpha_k) r)
    I^R(addr) = (a + (1/2 - alpha_k) r, a + r/2)

with a = a(addr), r = r(addr), k = depth(addr) and alpha_k = 10^-k.

Truncations apply only removals of length >= eps. Everything left out is
grouped into omitted blocks: for an enumerated parent p (or the root) and its
first non-enumerated child index n0, the children (p, n) with n >= n0 and all
their descendants. A block's removals lie in the hull
[a(successor of p), a(p, n0) + r(p, n0)/2] and total exactly
(640/159) * alpha_d * r(p, n0), d being the children's depth.
"""

import logging
from dataclasses import dataclass
from fractions import Fraction
from typing import Any, Dict, List, Optional, Tuple

from construction.addresses import (
    Address,
    a_value,
    child,
    parent_successor,
    r_value,
    value_order_key,
)
from construction.base import BaseConstruction, SlackRegion, TruncatedSet
from core.exceptions import ConstructionError
from core.intervals import Interval, IntervalSet, subtract_disjoint
from core.rationals import RationalLike, power_of_ten

logger = logging.getLogger(__name__)

BASE_INTERVAL = Interval.closed(-1, 1)
TOTAL_REMOVAL_MASS = Fraction(16, 159)
_BLOCK_FACTOR = Fraction(640, 159)
_TAIL_FACTOR = Fraction(2, 159)


def alpha(k: int) -> Fraction:
    """alpha_k = 10^-k."""
    if isinstance(k, bool) or not isinstance(k, int) or k < 1:
        raise ConstructionError(f"Depth k must be a positive integer, got {k!r}")
    return power_of_ten(-k)


def gamma(k: int) -> Fraction:
    """gamma_k = 1 - 10^-k."""
    return 1 - alpha(k)


@dataclass(frozen=True)
class RemovalPair:
    """The two open intervals removed at one address."""

    left: Interval
    right: Interval
    addr: Address

    @property
    def length(self) -> Fraction:
        """Length of each of the two intervals."""
        return self.left.length

    def intervals(self) -> Tuple[Interval, Interval]:
        return (self.left, self.right)


def removal_pair(addr: Address) -> RemovalPair:
    a, r, k = a_value(addr), r_value(addr), addr.depth
    inner = (Fraction(1, 2) - alpha(k)) * r
    half = r / 2
    return RemovalPair(
        left=Interval.open(a - half, a - inner),
        right=Interval.open(a + inner, a + half),
        addr=addr,
    )


def j_pair(addr: Address) -> Tuple[Interval, Interval]:
    """J^L = [a - r/2, a] and J^R = [a, a + r/2]."""
    a, r = a_value(addr), r_value(addr)
    return Interval.closed(a - r / 2, a), Interval.closed(a, a + r / 2)


def j_interval(addr: Address) -> Interval:
    """J^L ∪ J^R = [a - r/2, a + r/2]."""
    a, r = a_value(addr), r_value(addr)
    return Interval.closed(a - r / 2, a + r / 2)


def k_interval(addr: Address) -> Interval:
    """K = [a(successor), a(addr)], of length r."""
    return Interval.closed(a_value(parent_successor(addr)), a_value(addr))


def subtree_region(addr: Address) -> Interval:
    """Closed hull of the removals of ``addr`` and of all its descendants."""
    a, r = a_value(addr), r_value(addr)
    return Interval.closed(a_value(parent_successor(addr)), a + r / 2)


def total_removal_mass() -> Fraction:
    """Sum of the lengths of every removal interval: 16/159."""
    return TOTAL_REMOVAL_MASS


def subtree_tail_mass(addr: Address) -> Fraction:
    """Total removal length among the strict descendants of ``addr``."""
    return _TAIL_FACTOR * r_value(addr) * alpha(addr.depth)


def omitted_block(parent: Optional[Address], n0: int) -> SlackRegion:
    """Children (parent, n >= n0) with their subtrees, as one slack region."""
    first = child(parent, n0)
    r = r_value(first)
    lower = Fraction(0) if parent is None else a_value(parent_successor(parent))
    hull = Interval.closed(lower, a_value(first) + r / 2)
    label = f"{parent if parent is not None else '()'}+{n0}"
    return SlackRegion(hull=hull, mass=_BLOCK_FACTOR * alpha(first.depth) * r, label=label)


def _meets(a: Interval, b: Interval) -> bool:
    return a.lo <= b.hi and b.lo <= a.hi


def _walk(eps: Fraction, window: Optional[Interval]) -> Tuple[List[RemovalPair], List[SlackRegion]]:
    """Enumerate removals of length >= eps and the omitted blocks left over."""
    pairs: List[RemovalPair] = []
    blocks: List[SlackRegion] = []
    frontier: List[Optional[Address]] = [None]
    while frontier:
        parent = frontier.pop()
        n = 1
        while True:
            addr = child(parent, n)
            if alpha(addr.depth) * r_value(addr) < eps:
                block = omitted_block(parent, n)
                if window is None or _meets(block.hull, window):
                    blocks.append(block)
                break
            if window is not None:
                region = subtree_region(addr)
                if region.hi < window.lo:
                    # siblings further on sit lower still
                    break
                if region.lo > window.hi:
                    n += 1
                    continue
            if window is None or _meets(j_interval(addr), window):
                pairs.append(removal_pair(addr))
            frontier.append(addr)
            n += 1
    pairs.sort(key=lambda p: value_order_key(p.addr))
    return pairs, blocks


def enumerate_removals(eps: RationalLike, window: Optional[Interval] = None) -> List[RemovalPair]:
    """All removal pairs with alpha_k * r >= eps, depth-major then value-descending."""
    eps = BaseConstruction.validate_epsilon(eps)
    pairs, _ = _walk(eps, window)
    return pairs


def enumerated_mass(pairs: List[RemovalPair]) -> Fraction:
    return sum((2 * p.length for p in pairs), Fraction(0))


def check_disjoint_closures(pairs: List[RemovalPair]) -> List[Tuple[Interval, Interval]]:
    """Pairs of removal closures that touch or overlap; empty when all are disjoint."""
    closures = sorted(
        (i.closure() for p in pairs for i in p.intervals()), key=lambda i: (i.lo, i.hi)
    )
    clashes = []
    for prev, nxt in zip(closures, closures[1:]):
        if nxt.lo <= prev.hi:
            clashes.append((prev, nxt))
    return clashes


def truncate(eps: RationalLike, window: Optional[Interval] = None) -> TruncatedSet:
    """Over-approximation of E keeping every removal of length >= eps.

    Without a window the result covers [-1, 1] and ``omitted_mass`` is
    16/159 minus the enumerated removal length. With a window only removals
    meeting it are applied and ``omitted_mass`` bounds the unaccounted mass
    inside the window.
    """
    eps = BaseConstruction.validate_epsilon(eps)
    base = IntervalSet((BASE_INTERVAL,))
    if window is not None:
        base = base.intersect(window)
    pairs, blocks = _walk(eps, window)
    holes = [i for p in pairs for i in p.intervals()]
    upper = subtract_disjoint(base, holes)

    if window is None:
        omitted = TOTAL_REMOVAL_MASS - enumerated_mass(pairs)
        block_total = sum((b.mass for b in blocks), Fraction(0))
        if block_total != omitted:
            raise ConstructionError(
                f"Omitted-block accounting mismatch: {block_total} != {omitted}"
            )
    else:
        omitted = sum((b.bound_in(window) for b in blocks), Fraction(0))

    logger.debug(
        "Truncation built",
        extra={
            "epsilon": str(eps),
            "removals": len(pairs),
            "blocks": len(blocks),
            "windowed": window is not None,
        },
    )
    return TruncatedSet(
        upper=upper,
        omitted_mass=omitted,
        epsilon=eps,
        slack=tuple(blocks),
        window=window,
        removal_count=len(pairs),
    )


class RemovalConstruction(BaseConstruction):
    """The closed strongly one-sided dense set that is not of uniform density type."""

    name = "removal"

    def truncate(self, eps: RationalLike, window: Optional[Interval] = None) -> TruncatedSet:
        return truncate(eps, window)

    def describe(self) -> Dict[str, Any]:
        return {
            "construction": self.name,
            "base": BASE_INTERVAL.to_dict(),
            "total_removal_mass": str(TOTAL_REMOVAL_MASS),
        }
