"""Sequence specifications and the non-UDT witness search.

The search builds nested intervals I_1 ⊃ I_2 ⊃ ... around points of E where
the max one-sided density drops below the attacked gamma_k at a scale below
delta_k, so the common point avoids E^{gamma_k, delta_k} at every level.
"""

import logging
import re
from dataclasses import dataclass
from fractions import Fraction
from typing import List, Optional, Sequence, Tuple

from construction.addresses import Address, a_value, r_value
from construction.base import TruncatedSet
from construction.removals import alpha, gamma, truncate
from core.config import get_settings
from core.exceptions import (
    CapExceededError,
    NeedsFinerEpsilonError,
    RangeExhaustedError,
    SequenceError,
    WitnessError,
)
from core.intervals import Interval
from core.rationals import RationalLike, format_rational, to_rational
from schemas.certificates import (
    IntervalModel,
    SequenceModel,
    WitnessCertificateModel,
    WitnessLevelModel,
)
from services.density import lipschitz_shift, max_one_sided_density

logger = logging.getLogger(__name__)

_GEOM_RE = re.compile(r"^\s*geom:([^:]+):([^:]+)\s*$")
_TABLE_RE = re.compile(r"^\s*table:(.+)$")


@dataclass(frozen=True)
class Progression:
    """c * q^n (n >= 1), or an explicit finite table of values."""

    kind: str
    c: Fraction = Fraction(0)
    q: Fraction = Fraction(0)
    values: Tuple[Fraction, ...] = ()

    @classmethod
    def geometric(cls, c: RationalLike, q: RationalLike) -> "Progression":
        c, q = to_rational(c), to_rational(q)
        if c <= 0 or not 0 < q < 1:
            raise SequenceError(f"Geometric progression needs c > 0 and 0 < q < 1, got c={c}, q={q}")
        return cls(kind="geometric", c=c, q=q)

    @classmethod
    def table(cls, values: Sequence[RationalLike]) -> "Progression":
        values = tuple(to_rational(v) for v in values)
        if not values:
            raise SequenceError("Table must be non-empty")
        return cls(kind="table", values=values)

    @classmethod
    def parse(cls, text: str) -> "Progression":
        match = _GEOM_RE.match(text)
        if match:
            return cls.geometric(match.group(1).strip(), match.group(2).strip())
        match = _TABLE_RE.match(text)
        if match:
            return cls.table([v.strip() for v in match.group(1).split(",")])
        raise SequenceError(f"Expected 'geom:C:Q' or 'table:v1,v2,...', got {text!r}")

    @property
    def size(self) -> Optional[int]:
        return len(self.values) if self.kind == "table" else None

    def term(self, n: int) -> Fraction:
        if n < 1:
            raise SequenceError(f"Sequence index must be >= 1, got {n}")
        if self.kind == "geometric":
            return self.c * self.q**n
        if n > len(self.values):
            raise RangeExhaustedError(f"Index {n} beyond table of length {len(self.values)}")
        return self.values[n - 1]

    def to_text(self) -> str:
        if self.kind == "geometric":
            return f"geom:{format_rational(self.c)}:{format_rational(self.q)}"
        return "table:" + ",".join(format_rational(v) for v in self.values)


@dataclass(frozen=True)
class SequenceSpec:
    """A pair gamma_n -> 1, delta_n -> 0.

    A geometric gamma progression describes the deficit: gamma_n = 1 - c q^n.
    A gamma table lists the values themselves.
    """

    gamma_part: Progression
    delta_part: Progression

    def __post_init__(self) -> None:
        self._check_represented_range()

    @classmethod
    def parse(cls, gamma_text: str, delta_text: str) -> "SequenceSpec":
        return cls(Progression.parse(gamma_text), Progression.parse(delta_text))

    @classmethod
    def geometric(cls, gamma_c: RationalLike, gamma_q: RationalLike, delta_c: RationalLike, delta_q: RationalLike) -> "SequenceSpec":
        return cls(Progression.geometric(gamma_c, gamma_q), Progression.geometric(delta_c, delta_q))

    @classmethod
    def table(cls, gammas: Sequence[RationalLike], deltas: Sequence[RationalLike]) -> "SequenceSpec":
        return cls(Progression.table(gammas), Progression.table(deltas))

    @property
    def kind(self) -> str:
        if self.gamma_part.kind == self.delta_part.kind:
            return self.gamma_part.kind
        return "mixed"

    def gamma(self, n: int) -> Fraction:
        if self.gamma_part.kind == "geometric":
            return 1 - self.gamma_part.term(n)
        return self.gamma_part.term(n)

    def delta(self, n: int) -> Fraction:
        return self.delta_part.term(n)

    def to_model(self) -> SequenceModel:
        return SequenceModel(gamma=self.gamma_part.to_text(), delta=self.delta_part.to_text())

    @classmethod
    def from_model(cls, model: SequenceModel) -> "SequenceSpec":
        return cls.parse(model.gamma, model.delta)

    def _check_represented_range(self) -> None:
        if self.gamma_part.kind == "geometric":
            # gamma_1 = 1 - c q is the smallest term
            if self.gamma_part.term(1) >= 1:
                raise SequenceError(
                    f"Geometric gamma needs c q < 1 so that gamma_1 > 0, got gamma_1 = {self.gamma(1)}"
                )
        if self.gamma_part.kind == "table":
            gammas = self.gamma_part.values
            if any(not 0 < g < 1 for g in gammas):
                raise SequenceError("gamma values must lie in (0, 1)")
            if any(b <= a for a, b in zip(gammas, gammas[1:])):
                raise SequenceError("gamma table must be strictly increasing")
        if self.delta_part.kind == "table":
            deltas = self.delta_part.values
            if any(d <= 0 for d in deltas):
                raise SequenceError("delta values must be positive")
            if any(b > a for a, b in zip(deltas, deltas[1:])):
                raise SequenceError("delta table must be non-increasing")


def canonical_gamma(n: int) -> Fraction:
    """The construction's own grid gamma_n = 1 - 10^-n."""
    return gamma(n)


def derive_coarse_deltas(fine: SequenceSpec, n_max: int, cap: Optional[int] = None) -> List[Fraction]:
    """delta_n = min{ fine.delta(n') : fine.gamma(n') < 1 - 10^-(n+1) } for n = 1..n_max."""
    if n_max < 1:
        raise SequenceError(f"n_max must be >= 1, got {n_max}")
    cap = cap or get_settings().SEARCH_INDEX_CAP
    size = fine.gamma_part.size
    limit = min(cap, size) if size is not None else cap

    deltas: List[Fraction] = []
    for n in range(1, n_max + 1):
        threshold = canonical_gamma(n + 1)
        best: Optional[Fraction] = None
        n_prime = 1
        while True:
            if n_prime > limit:
                if size is not None and limit == size:
                    raise RangeExhaustedError(
                        f"Every gamma in the table lies below {threshold}; delta_{n} is undetermined"
                    )
                raise CapExceededError(f"Coarsening search for n={n} exceeded cap {cap}", cap=cap)
            if fine.gamma(n_prime) >= threshold:
                break
            d = fine.delta(n_prime)
            best = d if best is None else min(best, d)
            n_prime += 1
        if best is None:
            raise RangeExhaustedError(f"No fine index has gamma below {threshold} (n={n})")
        deltas.append(best)
    return deltas


@dataclass(frozen=True)
class WitnessLevel:
    k: int
    index: int
    address: Address
    x: Fraction
    r_x: Fraction
    rho: Fraction
    interval: Interval
    density_hi: Fraction
    gamma: Fraction
    delta: Fraction
    status: str
    epsilon: Fraction

    def to_model(self) -> WitnessLevelModel:
        return WitnessLevelModel(
            k=self.k,
            index=self.index,
            address=self.address.to_json(),
            x=self.x,
            r_x=self.r_x,
            rho=self.rho,
            interval=IntervalModel.from_interval(self.interval),
            density_hi=self.density_hi,
            gamma=self.gamma,
            delta=self.delta,
            status=self.status,
            epsilon=self.epsilon,
        )

    @classmethod
    def from_model(cls, m: WitnessLevelModel) -> "WitnessLevel":
        return cls(
            k=m.k,
            index=m.index,
            address=Address.from_json(m.address),
            x=m.x,
            r_x=m.r_x,
            rho=m.rho,
            interval=m.interval.to_interval(),
            density_hi=m.density_hi,
            gamma=m.gamma,
            delta=m.delta,
            status=m.status,
            epsilon=m.epsilon,
        )


@dataclass(frozen=True)
class WitnessCertificate:
    """Nested intervals avoiding E^{gamma_k, delta_k}, one per level."""

    sequence: SequenceSpec
    epsilon: Fraction
    levels: Tuple[WitnessLevel, ...]
    coarsen: bool = False

    @property
    def enclosure(self) -> Interval:
        return self.levels[-1].interval

    @property
    def chosen_indices(self) -> List[int]:
        return [level.index for level in self.levels]

    def to_model(self) -> WitnessCertificateModel:
        return WitnessCertificateModel(
            sequence=self.sequence.to_model(),
            coarsen=self.coarsen,
            epsilon=self.epsilon,
            levels=[level.to_model() for level in self.levels],
            enclosure=IntervalModel.from_interval(self.enclosure),
        )

    @classmethod
    def from_model(cls, m: WitnessCertificateModel) -> "WitnessCertificate":
        if not m.levels:
            raise WitnessError("Certificate has no levels")
        return cls(
            sequence=SequenceSpec.from_model(m.sequence),
            epsilon=m.epsilon,
            levels=tuple(WitnessLevel.from_model(level) for level in m.levels),
            coarsen=m.coarsen,
        )


def level_scales(addr: Address) -> Tuple[Fraction, Fraction, Fraction]:
    """(x, r_x, rho) for a level address: x = a, r_x = r/2, rho = alpha_k r_x / 2."""
    r_x = r_value(addr) / 2
    return a_value(addr), r_x, alpha(addr.depth) * r_x / 2


def vacuous_ceiling(k: int) -> Fraction:
    """Largest gamma_k a level cannot beat: 1 - 3 alpha_k / 2."""
    return 1 - Fraction(3, 2) * alpha(k)


def level_truncation(addr: Address, eps: Fraction, refinement: int) -> TruncatedSet:
    """Local truncation around a level point, fine enough to see its own removals."""
    x, r_x, _ = level_scales(addr)
    required = alpha(addr.depth) * r_value(addr)
    eps_level = max(eps, required / refinement)
    return truncate(eps_level, Interval.closed(x - r_x, x + r_x))


def level_address(previous: Sequence[int], n: int) -> Address:
    """(n_1 - 1, ..., n_{k-1} - 1, n): its points accumulate at the previous level point."""
    return Address(tuple(p - 1 for p in previous) + (n,))


def _level_targets(seq: SequenceSpec, levels: int, coarsen: bool) -> List[Tuple[Fraction, Fraction]]:
    if coarsen:
        deltas = derive_coarse_deltas(seq, levels)
        return [(canonical_gamma(k), deltas[k - 1]) for k in range(1, levels + 1)]
    return [(seq.gamma(k), seq.delta(k)) for k in range(1, levels + 1)]


def _choose_index(
    previous: Sequence[int], k: int, delta_k: Fraction, outer: Optional[Interval], cap: int
) -> Tuple[int, Address]:
    for n in range(2, cap + 1):
        addr = level_address(previous, n)
        x, r_x, rho = level_scales(addr)
        if r_x >= delta_k:
            continue
        if outer is not None and not (outer.lo < x - rho and x + rho < outer.hi):
            continue
        return n, addr
    raise CapExceededError(f"No admissible index at level {k} below cap {cap}", cap=cap)


def find_non_udt_witness(
    seq: SequenceSpec,
    levels: int,
    eps: RationalLike,
    coarsen: bool = False,
    cap: Optional[int] = None,
    refinement: Optional[int] = None,
) -> WitnessCertificate:
    """Run the nested-interval selection for ``levels`` levels.

    Level k picks the smallest n_k >= 2 with r_x < delta_k whose neighborhood
    [x - rho, x + rho] sits inside the interior of I_{k-1}. The level is
    certified when the density bound, widened by the Lipschitz shift over rho,
    stays below gamma_k, and marked vacuous when
    gamma_k <= 1 - 3 alpha_k / 2, which no level of this construction beats.
    """
    if levels < 1:
        raise WitnessError(f"levels must be >= 1, got {levels}")
    eps = to_rational(eps)
    if eps <= 0:
        raise WitnessError(f"epsilon must be positive, got {eps}")
    settings = get_settings()
    cap = cap or settings.SEARCH_INDEX_CAP
    refinement = refinement or settings.WITNESS_LEVEL_REFINEMENT

    targets = _level_targets(seq, levels, coarsen)
    chosen: List[int] = []
    outer: Optional[Interval] = None
    records: List[WitnessLevel] = []

    for k, (gamma_k, delta_k) in enumerate(targets, start=1):
        n, addr = _choose_index(chosen, k, delta_k, outer, cap)
        x, r_x, rho = level_scales(addr)
        t = level_truncation(addr, eps, refinement)
        bound = max_one_sided_density(t, x, r_x)
        density_hi = bound.hi

        # every point of [x - rho, x + rho] stays below gamma_k
        if lipschitz_shift(bound, rho, r_x).hi < gamma_k:
            status = "certified"
        elif gamma_k <= vacuous_ceiling(k):
            status = "vacuous"
        else:
            required = alpha(k) * r_value(addr)
            raise NeedsFinerEpsilonError(
                f"Level {k} at {addr} not certifiable at epsilon {eps}",
                level=k,
                epsilon=eps,
                required_epsilon=required,
            )

        interval = Interval.closed(x - rho, x + rho)
        records.append(
            WitnessLevel(
                k=k,
                index=n,
                address=addr,
                x=x,
                r_x=r_x,
                rho=rho,
                interval=interval,
                density_hi=density_hi,
                gamma=gamma_k,
                delta=delta_k,
                status=status,
                epsilon=t.epsilon,
            )
        )
        logger.info(
            "Witness level selected",
            extra={"level": k, "index": n, "address": str(addr), "status": status},
        )
        chosen.append(n)
        outer = interval

    return WitnessCertificate(sequence=seq, epsilon=eps, levels=tuple(records), coarsen=coarsen)
