"""Weakly dense set that is not strongly one-sided dense at 0.

The set is {0} together with the intervals [n^(-n-1/2), n^-n] for n >= 2.
Left endpoints are irrational except at perfect squares and are carried as
directed rational enclosures. The truncation keeps components n = 2..N and
covers everything beyond by the tail hull [0, (N+1)^-(N+1)].
"""

import logging
from dataclasses import dataclass
from fractions import Fraction
from math import isqrt
from typing import List, Tuple

from construction.base import BaseConstruction, SlackRegion, TruncatedSet
from core.exceptions import ConstructionError
from core.intervals import Interval, normalize
from core.rationals import RationalLike, to_rational

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class EnclosedInterval:
    """Interval whose endpoints are known only up to rational brackets."""

    lo_bounds: Tuple[Fraction, Fraction]
    hi_bounds: Tuple[Fraction, Fraction]

    def __post_init__(self) -> None:
        if self.lo_bounds[0] > self.lo_bounds[1] or self.hi_bounds[0] > self.hi_bounds[1]:
            raise ConstructionError("Enclosure brackets must satisfy lower <= upper")

    def outer(self) -> Interval:
        """Smallest interval certainly containing the true one."""
        return Interval.closed(self.lo_bounds[0], self.hi_bounds[1])

    @property
    def width(self) -> Fraction:
        return max(self.lo_bounds[1] - self.lo_bounds[0], self.hi_bounds[1] - self.hi_bounds[0])


def enclose_inverse_sqrt(n: int, tol: Fraction) -> Tuple[Fraction, Fraction]:
    """Rational bracket (lo, hi) of n^(-1/2) with hi - lo <= tol."""
    root = isqrt(n)
    if root * root == n:
        exact = Fraction(1, root)
        return exact, exact
    scale = 1
    while True:
        s = isqrt(n * scale * scale)
        # s/scale <= sqrt(n) < (s+1)/scale
        lo, hi = Fraction(scale, s + 1), Fraction(scale, s)
        if hi - lo <= tol:
            return lo, hi
        scale *= 2


def wd_component(n: int, tol: Fraction) -> EnclosedInterval:
    """[n^(-n-1/2), n^-n] with the left endpoint bracketed within ``tol``."""
    right = Fraction(1, n**n)
    inv_lo, inv_hi = enclose_inverse_sqrt(n, tol * n**n)
    return EnclosedInterval(lo_bounds=(right * inv_lo, right * inv_hi), hi_bounds=(right, right))


def wd_tail_hull(N: int) -> Interval:
    """Closed hull of {0} and every component beyond N."""
    return Interval.closed(0, Fraction(1, (N + 1) ** (N + 1)))


def wd_tail_majorant(N: int) -> Fraction:
    """Geometric majorant of sum_{m>N} m^-m, namely (N+1)^-N / N."""
    return Fraction(1, N * (N + 1) ** N)


def _validate(N: int, tol: RationalLike) -> Fraction:
    if isinstance(N, bool) or not isinstance(N, int) or N < 2:
        raise ConstructionError(f"N must be an integer >= 2, got {N!r}")
    tol = to_rational(tol)
    if tol <= 0:
        raise ConstructionError(f"tol must be positive, got {tol}")
    return tol


def wd_enclosures(N: int, tol: RationalLike) -> List[EnclosedInterval]:
    tol = _validate(N, tol)
    return [wd_component(n, tol) for n in range(2, N + 1)]


def wd_example(N: int, tol: RationalLike) -> TruncatedSet:
    """Truncation of the weakly dense example keeping components 2..N.

    ``upper`` is the union of the outer enclosures and the tail hull. The
    slack regions are the enclosure gaps at the left endpoints and the tail
    hull itself, so lower bounds only ever count the inner enclosures.
    """
    tol = _validate(N, tol)
    components = wd_enclosures(N, tol)
    tail = wd_tail_hull(N)

    slack = [SlackRegion(hull=tail, mass=tail.length, label="tail")]
    for n, comp in zip(range(2, N + 1), components):
        gap = comp.lo_bounds[1] - comp.lo_bounds[0]
        if gap > 0:
            slack.append(
                SlackRegion(
                    hull=Interval.closed(comp.lo_bounds[0], comp.lo_bounds[1]),
                    mass=gap,
                    label=f"n={n}",
                )
            )

    upper = normalize([c.outer() for c in components] + [tail])
    omitted = sum((s.mass for s in slack), Fraction(0))
    logger.debug("WD example built", extra={"N": N, "tol": str(tol), "omitted_mass": str(omitted)})
    return TruncatedSet(upper=upper, omitted_mass=omitted, epsilon=tol, slack=tuple(slack))


class WdConstruction(BaseConstruction):
    """The weakly dense example, truncated after ``components`` intervals."""

    name = "wd"

    def __init__(self, components: int = 8):
        self.components = components

    def truncate(self, eps: RationalLike, window=None) -> TruncatedSet:
        t = wd_example(self.components, self.validate_epsilon(eps))
        if window is None:
            return t
        return TruncatedSet(
            upper=t.upper.intersect(window),
            omitted_mass=t.local_slack(window),
            epsilon=t.epsilon,
            slack=t.slack,
            window=window,
        )

    def describe(self):
        return {"construction": self.name, "components": self.components}
