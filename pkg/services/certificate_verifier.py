"""Independent re-verification of certificates.

Only certificate fields are trusted as claims; every inequality is recomputed
from the address algebra and, for density values, from a fresh truncation.
Nothing from the search path is reused.
"""

import json
import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from fractions import Fraction
from pathlib import Path
from typing import Any, Dict, List, Optional, Tuple

from construction.addresses import Address, child, r_value
from construction.removals import k_interval, truncate
from core.config import get_settings
from core.exceptions import DensityCertError, VerificationError
from core.intervals import Interval
from schemas.certificates import (
    FiniteUnionCertificateModel,
    SudtCertificateModel,
    WitnessCertificateModel,
    intervals_to_set,
)
from services.checks import CheckResult, check, failures
from services.density import LIPSCHITZ_CONSTANT, lipschitz_shift, max_one_sided_density
from services.sudt import (
    SudtCertificate,
    base_case_checks,
    certify_finite_union,
    condition_a_checks,
    condition_b_checks,
)
from services.witness import (
    SequenceSpec,
    WitnessCertificate,
    WitnessLevel,
    canonical_gamma,
    derive_coarse_deltas,
    level_address,
    level_scales,
    vacuous_ceiling,
)

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class VerificationReport:
    kind: str
    checks: Tuple[CheckResult, ...]

    @property
    def passed(self) -> bool:
        return not failures(self.checks)

    def raise_for_failures(self) -> None:
        bad = failures(self.checks)
        if bad:
            raise VerificationError(
                f"{len(bad)} of {len(self.checks)} checks failed for {self.kind}",
                [b.name for b in bad],
            )


def _level_checks(
    level: WitnessLevel,
    previous: Optional[WitnessLevel],
    chosen: List[int],
    targets: Optional[Tuple[Fraction, Fraction]],
) -> List[CheckResult]:
    k = level.k
    tag = f"level{k}"
    results: List[CheckResult] = []

    expected_addr = level_address(chosen, level.index)
    results.append(check(f"{tag}.address", level.address == expected_addr, str(expected_addr)))
    results.append(check(f"{tag}.index", level.index >= 2, "n_k > 1", index=level.index))

    x, r_x, rho = level_scales(expected_addr)
    results.append(
        check(f"{tag}.scales", (level.x, level.r_x, level.rho) == (x, r_x, rho), "x, r_x, rho")
    )
    results.append(
        check(f"{tag}.interval", level.interval == Interval.closed(x - rho, x + rho), str(level.interval))
    )
    results.append(check(f"{tag}.scale_below_delta", r_x < level.delta, "r_x < delta_k", r_x=r_x, delta=level.delta))

    if targets is not None:
        results.append(
            check(f"{tag}.targets", (level.gamma, level.delta) == targets, "gamma_k, delta_k from sequence")
        )

    if previous is not None:
        outer = previous.interval
        results.append(
            check(
                f"{tag}.nested",
                outer.lo < level.interval.lo and level.interval.hi < outer.hi,
                "I_k inside the interior of I_(k-1)",
            )
        )
        results.append(
            check(
                f"{tag}.shrinks",
                level.interval.length <= outer.length / 2,
                "|I_k| <= |I_(k-1)| / 2",
            )
        )

    # fresh truncation at the recorded threshold around the level point
    t = truncate(level.epsilon, Interval.closed(x - r_x, x + r_x))
    bound = max_one_sided_density(t, x, r_x)
    density_hi = bound.hi
    results.append(
        check(
            f"{tag}.density",
            density_hi <= level.density_hi,
            "recomputed density_hi <= recorded",
            recomputed=density_hi,
            recorded=level.density_hi,
        )
    )
    if level.status == "certified":
        margin = LIPSCHITZ_CONSTANT * rho / r_x
        results.append(
            check(
                f"{tag}.gap",
                level.density_hi + margin < level.gamma and lipschitz_shift(bound, rho, r_x).hi < level.gamma,
                "density_hi + rho / r_x < gamma_k",
                density_hi=level.density_hi,
                gamma=level.gamma,
            )
        )
    else:
        results.append(
            check(
                f"{tag}.vacuous",
                level.gamma <= vacuous_ceiling(k),
                "gamma_k <= 1 - 3 alpha_k / 2",
                gamma=level.gamma,
            )
        )
    return results


def verify_witness_certificate(
    cert: WitnessCertificate,
    workers: Optional[int] = None,
    recorded_enclosure: Optional[Interval] = None,
) -> VerificationReport:
    """Recheck every level of a non-UDT certificate; levels run on a thread pool."""
    levels = cert.levels
    if cert.coarsen:
        deltas = derive_coarse_deltas(cert.sequence, len(levels))
        targets = [(canonical_gamma(k), deltas[k - 1]) for k in range(1, len(levels) + 1)]
    else:
        targets = [(cert.sequence.gamma(k), cert.sequence.delta(k)) for k in range(1, len(levels) + 1)]

    jobs = []
    chosen: List[int] = []
    for idx, level in enumerate(levels):
        previous = levels[idx - 1] if idx else None
        jobs.append((level, previous, list(chosen), targets[idx]))
        chosen.append(level.index)

    workers = workers or get_settings().PARALLEL_WORKERS
    with ThreadPoolExecutor(max_workers=workers) as executor:
        per_level = list(executor.map(lambda job: _level_checks(*job), jobs))

    results = [c for level_results in per_level for c in level_results]
    results.append(
        check(
            "ordering",
            [level.k for level in levels] == list(range(1, len(levels) + 1)),
            "levels numbered 1..K",
        )
    )
    if recorded_enclosure is not None:
        results.append(
            check("enclosure", recorded_enclosure == levels[-1].interval, "enclosure = I_last")
        )
    report = VerificationReport(kind="non-udt", checks=tuple(results))
    logger.info("Witness certificate verified", extra={"passed": report.passed, "checks": len(results)})
    return report


def verify_sudt_certificate(
    cert: SudtCertificate,
    refinement: Optional[int] = None,
    recorded_enclosure: Optional[Interval] = None,
) -> VerificationReport:
    """Recompute the chain arithmetic and both conditions for every step."""
    refinement = refinement or get_settings().WITNESS_LEVEL_REFINEMENT
    seq = cert.sequence
    results: List[CheckResult] = list(base_case_checks())

    chain = Address.ones(10)
    k_prime, m_prime, m_prev = 10, 1, 0
    for step in cert.steps:
        tag = f"step{step.j}"
        results.append(
            check(
                f"{tag}.indices",
                (step.k_prime, step.m_prime) == (k_prime, m_prime) and step.m > m_prev,
                "k'_j, m'_j carried forward and m_j increasing",
            )
        )
        expected_chain = chain.extend((step.n_prime,) + (1,) * (step.i - 1))
        results.append(check(f"{tag}.chain", step.chain == expected_chain, str(expected_chain)))
        results.append(check(f"{tag}.i", step.i >= 1, "i_j >= 1", i=step.i))

        for c in condition_a_checks(expected_chain, m_prime + step.i):
            results.append(CheckResult(f"{tag}.{c.name}", c.passed, c.detail, c.values))
        b_addr = child(chain, step.n_prime)
        for c in condition_b_checks(b_addr, seq.gamma(step.m), seq.delta(step.m), refinement):
            results.append(CheckResult(f"{tag}.{c.name}", c.passed, c.detail, c.values))

        chain, k_prime, m_prime, m_prev = expected_chain, k_prime + step.i, m_prime + step.i, step.m

    final_k = k_interval(chain)
    if recorded_enclosure is not None:
        results.append(
            check("enclosure", recorded_enclosure == final_k, "enclosure = K of the final chain")
        )
    results.append(check("enclosure_length", final_k.length == r_value(chain), "|K| = r(chain)"))
    return VerificationReport(kind="non-sudt", checks=tuple(results))


def verify_finite_union_certificate(model: FiniteUnionCertificateModel) -> VerificationReport:
    s = intervals_to_set(model.components)
    gammas = SequenceSpec.parse(model.gamma, "table:1")
    fresh = certify_finite_union(s, gammas, len(model.deltas))
    results = list(fresh.checks)
    results.append(check("delta", model.delta == fresh.delta, "delta = min length / 2", delta=fresh.delta))
    results.append(check("deltas", all(d == fresh.delta for d in model.deltas), "constant delta sequence"))
    return VerificationReport(kind="sudt-finite", checks=tuple(results))


def verify_payload(payload: Dict[str, Any]) -> VerificationReport:
    """Dispatch on the certificate ``type`` field."""
    kind = payload.get("type")
    if kind == "non-udt":
        model = WitnessCertificateModel.model_validate(payload)
        return verify_witness_certificate(
            WitnessCertificate.from_model(model), recorded_enclosure=model.enclosure.to_interval()
        )
    if kind == "non-sudt":
        model = SudtCertificateModel.model_validate(payload)
        return verify_sudt_certificate(
            SudtCertificate.from_model(model), recorded_enclosure=model.enclosure.to_interval()
        )
    if kind == "sudt-finite":
        return verify_finite_union_certificate(FiniteUnionCertificateModel.model_validate(payload))
    raise DensityCertError(f"Unknown certificate type {kind!r}")


def verify_certificate_file(path: Path) -> VerificationReport:
    with open(path, "r", encoding="utf-8") as f:
        payload = json.load(f)
    return verify_payload(payload)
