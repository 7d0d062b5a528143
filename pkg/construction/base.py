"""Base construction class and the truncated-set container."""

import logging
from abc import ABC, abstractmethod
from dataclasses import dataclass
from fractions import Fraction
from typing import Any, Dict, Optional, Sequence, Tuple

from core.exceptions import ConstructionError, WindowError
from core.intervals import Interval, IntervalSet
from core.rationals import RationalLike, format_rational, to_rational

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class SlackRegion:
    """Mass of the true set's complement not yet subtracted from ``upper``.

    All unaccounted removal mass tracked by this region lies inside ``hull``
    and totals at most ``mass``.
    """

    hull: Interval
    mass: Fraction
    label: str = ""

    def bound_in(self, j: Interval) -> Fraction:
        return min(self.mass, self.hull.overlap_length(j))

    def to_dict(self) -> Dict[str, Any]:
        return {"hull": self.hull.to_dict(), "mass": format_rational(self.mass), "label": self.label}

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "SlackRegion":
        return cls(Interval.from_dict(data["hull"]), to_rational(data["mass"]), data.get("label", ""))


@dataclass(frozen=True)
class TruncatedSet:
    """Finite over-approximation of a set with exact error accounting.

    ``upper`` contains the true set (inside ``window`` when one is set) and
    ``measure(upper) - omitted_mass`` is a lower bound for its measure there.
    """

    upper: IntervalSet
    omitted_mass: Fraction
    epsilon: Fraction
    slack: Tuple[SlackRegion, ...] = ()
    window: Optional[Interval] = None
    removal_count: int = 0

    def __post_init__(self) -> None:
        object.__setattr__(self, "slack", tuple(sorted(self.slack, key=lambda s: s.hull.lo)))
        if self.omitted_mass < 0:
            raise ConstructionError("omitted_mass must be non-negative")

    @classmethod
    def exact(cls, s: IntervalSet) -> "TruncatedSet":
        """A finite union known exactly: no slack at all."""
        return cls(upper=s, omitted_mass=Fraction(0), epsilon=Fraction(0))

    def check_window(self, j: Interval) -> None:
        if self.window is not None and not self.window.closure().contains_interval(j.closure()):
            raise WindowError(f"Query {j} lies outside the truncation window {self.window}")

    def local_slack(self, j: Interval) -> Fraction:
        """Upper bound on the unaccounted mass inside ``j``."""
        if not self.slack:
            return min(self.omitted_mass, j.length)
        total = Fraction(0)
        for region in self.slack:
            if region.hull.lo > j.hi:
                break
            if region.hull.hi >= j.lo:
                total += region.bound_in(j)
        return min(total, self.omitted_mass)

    def lower_measure(self) -> Fraction:
        return self.upper.measure() - self.omitted_mass

    def to_dict(self) -> Dict[str, Any]:
        data: Dict[str, Any] = {
            "epsilon": format_rational(self.epsilon),
            "omitted_mass": format_rational(self.omitted_mass),
            "upper": self.upper.to_list(),
            "slack": [s.to_dict() for s in self.slack],
            "removal_count": self.removal_count,
        }
        if self.window is not None:
            data["window"] = self.window.to_dict()
        return data

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "TruncatedSet":
        window = data.get("window")
        return cls(
            upper=IntervalSet.from_list(data["upper"]),
            omitted_mass=to_rational(data["omitted_mass"]),
            epsilon=to_rational(data["epsilon"]),
            slack=tuple(SlackRegion.from_dict(s) for s in data.get("slack", [])),
            window=Interval.from_dict(window) if window else None,
            removal_count=int(data.get("removal_count", 0)),
        )


class BaseConstruction(ABC):
    """Abstract base class for constructible example sets."""

    name: str

    @abstractmethod
    def truncate(
        self, eps: RationalLike, window: Optional[Interval] = None
    ) -> TruncatedSet:
        """
        Build a truncation at threshold ``eps``.
        With ``window`` set, only the part of the set inside it is represented.
        """
        pass

    @abstractmethod
    def describe(self) -> Dict[str, Any]:
        """Parameters identifying this construction."""
        pass

    @staticmethod
    def validate_epsilon(eps: RationalLike) -> Fraction:
        eps = to_rational(eps)
        if eps <= 0:
            raise ConstructionError(f"epsilon must be positive, got {eps}")
        return eps


def total_slack(regions: Sequence[SlackRegion]) -> Fraction:
    return sum((r.mass for r in regions), Fraction(0))
