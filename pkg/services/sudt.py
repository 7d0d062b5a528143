"""Strong uniform density type: the non-SUDT witness and the finite-union device.

The non-SUDT witness runs against the modified set E' whose own sequences are
gamma'_n = 1 - 2^-n and delta'_n = 2^-(100 n). It grows a chain of addresses
n'_1, n'_2, ... so that along the chain (a) the K-intervals sit inside
E'^{gamma'_{m'_j}, delta'_{m'_j}} and (b) the next K-interval misses the
attacked E'^{gamma_{m_j}, delta_{m_j}}.
"""

import logging
from dataclasses import dataclass
from fractions import Fraction
from typing import List, Optional, Tuple

from construction.addresses import Address, a_value, child, parent_successor, r_value
from construction.base import TruncatedSet
from construction.removals import alpha, k_interval, truncate
from core.config import get_settings
from core.exceptions import CapExceededError, UnsupportedSetError, VerificationError, WitnessError
from core.intervals import Interval, IntervalSet
from core.rationals import power_of_two
from schemas.certificates import (
    CheckResultModel,
    FiniteUnionCertificateModel,
    IntervalModel,
    SudtCertificateModel,
    SudtStepModel,
)
from services.checks import CheckResult, check, failures
from services.density import Tri, in_E_gamma_delta, max_one_sided_density, small_r_floor_certificate
from services.witness import SequenceSpec

logger = logging.getLogger(__name__)

BASE_M_PRIME = 1
BASE_K_PRIME = 10


def gamma_prime(n: int) -> Fraction:
    """gamma'_n = 1 - 2^-n."""
    return 1 - power_of_two(-n)


def delta_prime(n: int) -> Fraction:
    """delta'_n = 2^-(100 n)."""
    return power_of_two(-100 * n)


def kicsi_ceiling(k: int) -> Fraction:
    """Max one-sided density ceiling at radius 2 r on a depth-k K-interval."""
    return 1 - alpha(k) / 4


def nagy_floor(k: int) -> Fraction:
    return 1 - 384 * alpha(k)


def abar_sparsity_check(addr: Address) -> Fraction:
    """|[a(successor), a(child 1)]| / r(addr); always 1/16."""
    return (a_value(child(addr, 1)) - a_value(parent_successor(addr))) / r_value(addr)


def chain_links(chain: Address) -> List[Address]:
    """Every prefix of ``chain``, shortest first."""
    return [Address(chain.indices[:d]) for d in range(1, chain.depth + 1)]


def _to_models(results: List[CheckResult]) -> List[CheckResultModel]:
    return [CheckResultModel(**r.to_dict()) for r in results]


def _from_models(models: List[CheckResultModel]) -> Tuple[CheckResult, ...]:
    return tuple(CheckResult(m.name, m.passed, m.detail, dict(m.values)) for m in models)


@dataclass(frozen=True)
class SudtStep:
    """One induction step j of the chain construction."""

    j: int
    k_prime: int
    m_prime: int
    m: int
    n_prime: int
    i: int
    chain: Address
    check_a: Tuple[CheckResult, ...]
    check_b: Tuple[CheckResult, ...]

    @property
    def passed(self) -> bool:
        return not failures(self.check_a + self.check_b)

    def to_model(self) -> SudtStepModel:
        return SudtStepModel(
            j=self.j,
            k_prime=self.k_prime,
            m_prime=self.m_prime,
            m=self.m,
            n_prime=self.n_prime,
            i=self.i,
            chain=self.chain.to_json(),
            check_a=_to_models(list(self.check_a)),
            check_b=_to_models(list(self.check_b)),
        )

    @classmethod
    def from_model(cls, m: SudtStepModel) -> "SudtStep":
        return cls(
            j=m.j,
            k_prime=m.k_prime,
            m_prime=m.m_prime,
            m=m.m,
            n_prime=m.n_prime,
            i=m.i,
            chain=Address.from_json(m.chain),
            check_a=_from_models(m.check_a),
            check_b=_from_models(m.check_b),
        )


@dataclass(frozen=True)
class SudtCertificate:
    sequence: SequenceSpec
    base_checks: Tuple[CheckResult, ...]
    steps: Tuple[SudtStep, ...]

    @property
    def enclosure(self) -> Interval:
        """K-interval of the last chain; it contains the witness x'."""
        return k_interval(self.steps[-1].chain)

    @property
    def passed(self) -> bool:
        return not failures(self.base_checks) and all(step.passed for step in self.steps)

    def to_model(self) -> SudtCertificateModel:
        return SudtCertificateModel(
            sequence=self.sequence.to_model(),
            base_checks=_to_models(list(self.base_checks)),
            steps=[s.to_model() for s in self.steps],
            enclosure=IntervalModel.from_interval(self.enclosure),
        )

    @classmethod
    def from_model(cls, m: SudtCertificateModel) -> "SudtCertificate":
        if not m.steps:
            raise WitnessError("Certificate has no steps")
        return cls(
            sequence=SequenceSpec.from_model(m.sequence),
            base_checks=_from_models(m.base_checks),
            steps=tuple(SudtStep.from_model(s) for s in m.steps),
        )


def base_case_checks() -> Tuple[CheckResult, ...]:
    base_chain = Address.ones(BASE_K_PRIME)
    return (
        check(
            "base_delta",
            delta_prime(BASE_M_PRIME) < r_value(base_chain),
            "delta'_1 < r of ten ones",
            lhs=delta_prime(BASE_M_PRIME),
            rhs=r_value(base_chain),
        ),
        check(
            "base_gamma",
            gamma_prime(BASE_M_PRIME) < nagy_floor(BASE_K_PRIME),
            "gamma'_1 < 1 - 384 alpha_10",
            lhs=gamma_prime(BASE_M_PRIME),
            rhs=nagy_floor(BASE_K_PRIME),
        ),
    )


def condition_a_checks(chain: Address, m_prime: int) -> Tuple[CheckResult, ...]:
    """K(chain) ∩ E' lies in E'^{gamma'_{m'}, delta'_{m'}} by the small-radius floor."""
    cert = small_r_floor_certificate(chain_links(chain), chain.depth)
    return (
        check(
            "a_gamma",
            gamma_prime(m_prime) < cert.bound,
            f"gamma'_{m_prime} < 1 - 384 alpha_{chain.depth}",
            lhs=gamma_prime(m_prime),
            rhs=cert.bound,
        ),
        check(
            "a_delta",
            delta_prime(m_prime) < cert.radius,
            f"delta'_{m_prime} < r{chain}",
            lhs=delta_prime(m_prime),
            rhs=cert.radius,
        ),
    )


def condition_b_checks(
    addr: Address, gamma_m: Fraction, delta_m: Fraction, refinement: int, spot_check: bool = True
) -> Tuple[CheckResult, ...]:
    """K(addr) misses E'^{gamma_m, delta_m}: density at radius 2 r(addr) stays below gamma_m."""
    k = addr.depth
    r = r_value(addr)
    results = [
        check(
            "b_gamma",
            gamma_m > kicsi_ceiling(k),
            f"gamma_m > 1 - alpha_{k}/4",
            lhs=gamma_m,
            rhs=kicsi_ceiling(k),
        ),
        check("b_delta", 2 * r < delta_m, f"2 r{addr} < delta_m", lhs=2 * r, rhs=delta_m),
    ]
    if spot_check:
        x = a_value(addr)
        t = truncate(alpha(k) * r / refinement, Interval.closed(x - 2 * r, x + 2 * r))
        hi = max_one_sided_density(t, x, 2 * r).hi
        results.append(
            check(
                "b_spot",
                hi <= kicsi_ceiling(k),
                f"density at a{addr}, radius 2 r",
                density_hi=hi,
                ceiling=kicsi_ceiling(k),
            )
        )
    return tuple(results)


def _smallest_m(seq: SequenceSpec, after: int, k: int, cap: int) -> int:
    ceiling = kicsi_ceiling(k)
    for m in range(after + 1, after + cap + 1):
        if seq.gamma(m) > ceiling:
            return m
    raise CapExceededError(f"No m > {after} with gamma_m > {ceiling} below cap", cap=cap)


def _smallest_n(chain: Address, delta_m: Fraction, cap: int) -> int:
    for n in range(1, cap + 1):
        if 2 * r_value(child(chain, n)) < delta_m:
            return n
    raise CapExceededError(f"No child of {chain} with 2 r < {delta_m} below cap", cap=cap)


def _smallest_i(chain: Address, n_prime: int, k_prime: int, m_prime: int, cap: int) -> int:
    for i in range(1, cap + 1):
        extended = chain.extend((n_prime,) + (1,) * (i - 1))
        if gamma_prime(m_prime + i) < nagy_floor(k_prime + i) and delta_prime(m_prime + i) < r_value(extended):
            return i
    raise CapExceededError(f"No extension length i below cap {cap}", cap=cap)


def find_non_sudt_witness(
    seq: SequenceSpec,
    j_max: int,
    cap: Optional[int] = None,
    refinement: Optional[int] = None,
    spot_check: bool = True,
) -> SudtCertificate:
    """Build the chain for j = 1..j_max against the attacked ``seq``.

    Every choice takes the smallest qualifying integer. Condition (b) uses
    the K-interval at depth k'_j + 1, whose ceiling is 1 - alpha_{k'_j + 1}/4.
    """
    if j_max < 1:
        raise WitnessError(f"j_max must be >= 1, got {j_max}")
    settings = get_settings()
    cap = cap or settings.SEARCH_INDEX_CAP
    refinement = refinement or settings.WITNESS_LEVEL_REFINEMENT

    chain = Address.ones(BASE_K_PRIME)
    k_prime, m_prime, m_prev = BASE_K_PRIME, BASE_M_PRIME, 0
    steps: List[SudtStep] = []

    for j in range(1, j_max + 1):
        m = _smallest_m(seq, m_prev, k_prime + 1, cap)
        n_prime = _smallest_n(chain, seq.delta(m), cap)
        i = _smallest_i(chain, n_prime, k_prime, m_prime, cap)
        b_addr = child(chain, n_prime)
        next_chain = chain.extend((n_prime,) + (1,) * (i - 1))

        steps.append(
            SudtStep(
                j=j,
                k_prime=k_prime,
                m_prime=m_prime,
                m=m,
                n_prime=n_prime,
                i=i,
                chain=next_chain,
                check_a=condition_a_checks(next_chain, m_prime + i),
                check_b=condition_b_checks(b_addr, seq.gamma(m), seq.delta(m), refinement, spot_check),
            )
        )
        logger.info(
            "Chain step selected",
            extra={"j": j, "m": m, "n_prime": n_prime, "i": i, "k_prime": k_prime + i},
        )
        chain, k_prime, m_prime, m_prev = next_chain, k_prime + i, m_prime + i, m

    return SudtCertificate(sequence=seq, base_checks=base_case_checks(), steps=tuple(steps))


# ============== FINITE UNIONS ==============


@dataclass(frozen=True)
class FiniteUnionCertificate:
    components: IntervalSet
    gamma_text: str
    delta: Fraction
    deltas: Tuple[Fraction, ...]
    checks: Tuple[CheckResult, ...]

    @property
    def passed(self) -> bool:
        return not failures(self.checks)

    def to_model(self) -> FiniteUnionCertificateModel:
        return FiniteUnionCertificateModel(
            components=[IntervalModel.from_interval(p) for p in self.components],
            gamma=self.gamma_text,
            delta=self.delta,
            deltas=list(self.deltas),
            checks=_to_models(list(self.checks)),
        )


def _validate_finite_union(s: IntervalSet) -> None:
    if not s.parts:
        raise UnsupportedSetError("Set must have at least one component")
    for part in s.parts:
        if part.lo_open or part.hi_open:
            raise UnsupportedSetError(f"Component {part} is not closed")
        if part.is_degenerate:
            raise UnsupportedSetError(f"Degenerate component {part}")


def sample_points(part: Interval) -> List[Fraction]:
    """Endpoints, quarter points and midpoint of a component."""
    step = part.length / 4
    return [part.lo + i * step for i in range(5)]


def certify_finite_union(s: IntervalSet, gammas: SequenceSpec, n_max: int) -> FiniteUnionCertificate:
    """Certify s ⊆ s^{gamma_n, delta} for n = 1..n_max with delta = min length / 2.

    Every point of a component has a one-sided window of length half the
    component inside it, so one side has density 1 at every r <= delta.
    """
    _validate_finite_union(s)
    if n_max < 1:
        raise WitnessError(f"n_max must be >= 1, got {n_max}")
    delta = min(p.length for p in s.parts) / 2
    t = TruncatedSet.exact(s)

    results: List[CheckResult] = []
    for n in range(1, n_max + 1):
        gamma_n = gammas.gamma(n)
        for part in s.parts:
            for x in sample_points(part):
                verdict = in_E_gamma_delta(t, x, gamma_n, delta, delta)
                results.append(
                    check(f"n={n} x={x}", verdict is Tri.YES, "membership", gamma=gamma_n, verdict=verdict.value)
                )
    return FiniteUnionCertificate(
        components=s,
        gamma_text=gammas.gamma_part.to_text(),
        delta=delta,
        deltas=tuple(delta for _ in range(n_max)),
        checks=tuple(results),
    )


def sudt_deltas_finite_union(s: IntervalSet, gammas: SequenceSpec, n_max: int) -> List[Fraction]:
    cert = certify_finite_union(s, gammas, n_max)
    bad = failures(cert.checks)
    if bad:
        raise VerificationError("Finite-union certification failed", [b.name for b in bad])
    return list(cert.deltas)
