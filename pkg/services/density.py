"""Certified one-sided density bounds over truncated sets.

Every query works on a :class:`TruncatedSet`: ``upper`` gives the upper
bounds exactly and the slack regions widen them into lower bounds. Query
intervals are closed; open and closed windows have the same measure.
"""

import bisect
import logging
from dataclasses import dataclass
from enum import Enum
from fractions import Fraction
from typing import Iterable, List, NamedTuple, Optional, Sequence, Tuple

from construction.addresses import Address, a_value, r_value
from construction.base import TruncatedSet
from construction.removals import alpha, k_interval
from core.exceptions import AddressError, DensityError, WindowError
from core.intervals import Interval
from core.rationals import RationalLike, to_rational

logger = logging.getLogger(__name__)

LIPSCHITZ_CONSTANT = 1
SMALL_RADIUS_FACTOR = 384


class Side(str, Enum):
    """Which one-sided window a density refers to."""

    LEFT = "left"
    RIGHT = "right"


class Mode(str, Enum):
    LEFT = "left"
    RIGHT = "right"
    MAX = "max"


class Tri(str, Enum):
    """Three-valued answer of a certified membership test."""

    YES = "yes"
    NO = "no"
    UNKNOWN = "unknown"


@dataclass(frozen=True)
class MeasureBound:
    """lo <= |E ∩ j| <= hi."""

    lo: Fraction
    hi: Fraction

    def __post_init__(self) -> None:
        if not 0 <= self.lo <= self.hi:
            raise DensityError(f"Invalid measure bound [{self.lo}, {self.hi}]")


@dataclass(frozen=True)
class DensityBound:
    """Certified enclosure [lo, hi] of a density value."""

    lo: Fraction
    hi: Fraction

    def __post_init__(self) -> None:
        if not 0 <= self.lo <= self.hi <= 1:
            raise DensityError(f"Invalid density bound [{self.lo}, {self.hi}]")

    @property
    def width(self) -> Fraction:
        return self.hi - self.lo

    def contains(self, value: Fraction) -> bool:
        return self.lo <= value <= self.hi


class SmallRadiusCertificate(NamedTuple):
    """Every r in (0, radius) has max one-sided density >= bound."""

    radius: Fraction
    bound: Fraction


@dataclass(frozen=True)
class ProfileRow:
    x: Fraction
    r: Fraction
    side: str
    bound: DensityBound


def _validate_radius(r: RationalLike) -> Fraction:
    r = to_rational(r)
    if r <= 0:
        raise DensityError(f"Radius must be positive, got {r}")
    return r


def side_window(x: Fraction, r: Fraction, side: Side) -> Interval:
    if Side(side) is Side.LEFT:
        return Interval.closed(x - r, x)
    return Interval.closed(x, x + r)


def measure_in(t: TruncatedSet, j: Interval) -> MeasureBound:
    """Two-sided bound on |E ∩ j|."""
    t.check_window(j)
    hi = t.upper.measure_in(j)
    lo = max(Fraction(0), hi - t.local_slack(j))
    return MeasureBound(lo=lo, hi=hi)


def one_sided_density(t: TruncatedSet, x: RationalLike, r: RationalLike, side: Side) -> DensityBound:
    x, r = to_rational(x), _validate_radius(r)
    m = measure_in(t, side_window(x, r, side))
    return DensityBound(lo=m.lo / r, hi=m.hi / r)


def max_one_sided_density(t: TruncatedSet, x: RationalLike, r: RationalLike) -> DensityBound:
    left = one_sided_density(t, x, r, Side.LEFT)
    right = one_sided_density(t, x, r, Side.RIGHT)
    return DensityBound(lo=max(left.lo, right.lo), hi=max(left.hi, right.hi))


def m_f(t: TruncatedSet, x: RationalLike, r: RationalLike) -> DensityBound:
    """sup_{|y-x|<=r} |f(y) - f(x)| / r for f the primitive of the indicator of E.

    f is non-decreasing, so the supremum sits at y = x - r or y = x + r and
    equals the larger one-sided average.
    """
    return max_one_sided_density(t, x, r)


class _Coverage:
    """Cumulative measure F(y) = |upper ∩ (-inf, y]| over a run of parts."""

    def __init__(self, parts: Sequence[Interval]):
        self._los = [p.lo for p in parts]
        self._his = [p.hi for p in parts]
        self._prefix = [Fraction(0)]
        for p in parts:
            self._prefix.append(self._prefix[-1] + p.length)

    def __call__(self, y: Fraction) -> Fraction:
        idx = bisect.bisect_right(self._los, y)
        total = self._prefix[idx]
        if idx and self._his[idx - 1] > y:
            total -= self._his[idx - 1] - y
        return total

    def endpoints(self) -> List[Fraction]:
        return self._los + self._his


def _crossing(r0: Fraction, r1: Fraction, d0: Fraction, d1: Fraction) -> Optional[Fraction]:
    # zero of the linear function through (r0, d0) and (r1, d1), strictly inside
    if (d0 < 0 < d1) or (d1 < 0 < d0):
        return r0 + d0 * (r1 - r0) / (d0 - d1)
    return None


def _hi_infimum(t: TruncatedSet, x: Fraction, r_lo: Fraction, r_hi: Fraction, mode: Mode) -> Tuple[Fraction, Fraction, Fraction]:
    """Exact minima over [r_lo, r_hi] of hi_L(r), hi_R(r) and max(hi_L, hi_R)(r).

    Each numerator is piecewise linear in r with slope 0 or 1, so the ratio
    to r is monotone on every piece and the minimum sits at a breakpoint,
    a range end, or a point where the two numerators cross.
    """
    reach = Interval.closed(x - r_hi, x + r_hi)
    cover = _Coverage(t.upper.parts_meeting(reach))
    fx = cover(x)

    def left(r: Fraction) -> Fraction:
        return fx - cover(x - r)

    def right(r: Fraction) -> Fraction:
        return cover(x + r) - fx

    candidates = {r_lo, r_hi}
    for p in cover.endpoints():
        d = abs(p - x)
        if r_lo < d < r_hi:
            candidates.add(d)
    ordered = sorted(candidates)
    if mode is Mode.MAX:
        for r0, r1 in zip(ordered, ordered[1:]):
            c = _crossing(r0, r1, left(r0) - right(r0), left(r1) - right(r1))
            if c is not None:
                candidates.add(c)
        ordered = sorted(candidates)

    inf_left = min(left(r) / r for r in ordered)
    inf_right = min(right(r) / r for r in ordered)
    inf_max = min(max(left(r), right(r)) / r for r in ordered)
    return inf_left, inf_right, inf_max


def inf_density_over_range(
    t: TruncatedSet, x: RationalLike, r_lo: RationalLike, r_hi: RationalLike, mode: Mode
) -> DensityBound:
    """Certified bound on inf_{r in [r_lo, r_hi]} of the chosen density."""
    x, r_lo, r_hi = to_rational(x), to_rational(r_lo), to_rational(r_hi)
    if r_lo <= 0 or r_lo > r_hi:
        raise DensityError(f"Degenerate radius range [{r_lo}, {r_hi}]")
    mode = Mode(mode)

    left_window = Interval.closed(x - r_hi, x)
    right_window = Interval.closed(x, x + r_hi)
    if mode is not Mode.RIGHT:
        t.check_window(left_window)
    if mode is not Mode.LEFT:
        t.check_window(right_window)

    inf_left, inf_right, inf_max = _hi_infimum(t, x, r_lo, r_hi, mode)
    # slack grows with the window, so the r_hi window bounds every radius
    slack_left = t.local_slack(left_window) / r_lo
    slack_right = t.local_slack(right_window) / r_lo

    if mode is Mode.LEFT:
        hi, lo = inf_left, inf_left - slack_left
    elif mode is Mode.RIGHT:
        hi, lo = inf_right, inf_right - slack_right
    else:
        hi = inf_max
        lo = max(
            inf_max - max(slack_left, slack_right),
            inf_left - slack_left,
            inf_right - slack_right,
        )
    return DensityBound(lo=min(max(lo, Fraction(0)), hi), hi=hi)


def full_side_certificate(t: TruncatedSet, x: RationalLike, rho: RationalLike) -> Optional[Side]:
    """A side whose whole window of length ``rho`` is certainly inside E.

    Such a side has density 1 at every r <= rho.
    """
    x, rho = to_rational(x), _validate_radius(rho)
    for side in (Side.LEFT, Side.RIGHT):
        try:
            m = measure_in(t, side_window(x, rho, side))
        except WindowError:
            continue
        if m.lo == rho:
            return side
    return None


def small_r_floor_certificate(chain: Sequence[Address], k: int) -> SmallRadiusCertificate:
    """Floor for the max one-sided density below the scale of the k-th chain link.

    ``chain`` lists nested addresses, each a child of the previous one. The
    returned bound 1 - 384 * alpha_k holds for points of the closure of the
    accumulation set inside K(chain[k-1]) at every radius below
    r(chain[k-1]); it is a known estimate for this construction and is not
    recomputed here.
    """
    if not chain:
        raise AddressError("Chain must be non-empty")
    for parent, nxt in zip(chain, chain[1:]):
        if not nxt.is_child_of(parent):
            raise AddressError(f"Chain is not nested: {nxt} is not a child of {parent}")
    if k < 1 or k > len(chain):
        raise AddressError(f"k={k} outside chain of length {len(chain)}")
    return SmallRadiusCertificate(
        radius=r_value(chain[k - 1]), bound=1 - SMALL_RADIUS_FACTOR * alpha(k)
    )


def in_E_gamma_delta(
    t: TruncatedSet,
    x: RationalLike,
    gamma: RationalLike,
    delta: RationalLike,
    r_floor: RationalLike,
    small_r_certificate: Optional[SmallRadiusCertificate] = None,
) -> Tri:
    """Is x in E^{gamma,delta}, i.e. max one-sided density >= gamma on (0, delta]?

    [r_floor, delta] is settled exactly on the truncation. (0, r_floor) needs
    either ``small_r_certificate`` or a one-sided window of length r_floor
    that lies inside E.
    """
    x, gamma = to_rational(x), to_rational(gamma)
    delta, r_floor = to_rational(delta), to_rational(r_floor)
    if not 0 < r_floor <= delta:
        raise DensityError(f"Need 0 < r_floor <= delta, got r_floor={r_floor}, delta={delta}")

    bound = inf_density_over_range(t, x, r_floor, delta, Mode.MAX)
    if bound.hi < gamma:
        return Tri.NO
    if bound.lo < gamma:
        return Tri.UNKNOWN

    if small_r_certificate is not None:
        covered = small_r_certificate.radius >= r_floor and small_r_certificate.bound >= gamma
    else:
        covered = full_side_certificate(t, x, r_floor) is not None
    return Tri.YES if covered else Tri.UNKNOWN


def lipschitz_shift(bound: DensityBound, shift: RationalLike, r: RationalLike, constant: int = LIPSCHITZ_CONSTANT) -> DensityBound:
    """Bound valid at x' with |x - x'| <= shift, given ``bound`` at x and radius r.

    A one-sided window moved by s changes its measure by at most s, and the
    larger of two sides moves no faster than either.
    """
    shift, r = abs(to_rational(shift)), _validate_radius(r)
    delta = constant * shift / r
    return DensityBound(
        lo=max(Fraction(0), bound.lo - delta), hi=min(Fraction(1), bound.hi + delta)
    )


def density_profile(
    t: TruncatedSet, x: RationalLike, radii: Iterable[RationalLike], sides: Iterable[str] = ("left", "right", "max")
) -> List[ProfileRow]:
    x = to_rational(x)
    rows = []
    for r in radii:
        r = _validate_radius(r)
        for side in sides:
            if side == "max":
                bound = max_one_sided_density(t, x, r)
            else:
                bound = one_sided_density(t, x, r, Side(side))
            rows.append(ProfileRow(x=x, r=r, side=side, bound=bound))
    return rows


def k_density_bound(t: TruncatedSet, addr: Address) -> DensityBound:
    """|E ∩ K(addr)| / |K(addr)|."""
    k = k_interval(addr)
    m = measure_in(t, k)
    return DensityBound(lo=m.lo / k.length, hi=m.hi / k.length)


def gamma_k_bound(t: TruncatedSet, addr: Address) -> DensityBound:
    """Max one-sided density at a(addr) for r = r(addr)/2, the J-interval scale."""
    return max_one_sided_density(t, a_value(addr), r_value(addr) / 2)
