"""Verification suites for the construction's exact identities and inequalities.

Each suite returns a list of :class:`CheckResult`; the orchestrator runs a
selection of suites, sequentially or on a thread pool, and reports per suite.
"""

import logging
import random
import threading
import time
from concurrent.futures import ThreadPoolExecutor, as_completed
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from typing import Callable, Dict, List, Optional, Sequence, Tuple

from construction.addresses import (
    Address,
    a_value,
    address_value,
    child,
    iter_addresses,
    parent_successor,
    r_value,
)
from construction.base import TruncatedSet
from construction.removals import (
    TOTAL_REMOVAL_MASS,
    alpha,
    check_disjoint_closures,
    enumerate_removals,
    enumerated_mass,
    subtree_tail_mass,
    truncate,
)
from construction.wd_example import enclose_inverse_sqrt, wd_example, wd_tail_majorant
from core.config import get_settings
from core.exceptions import AddressError, ResourceLimitError
from core.intervals import Interval
from core.rationals import RationalLike, power_of_two, to_rational
from schemas.certificates import CheckResultModel, SuiteReportModel
from services.checks import CheckResult, check, failures
from services.density import (
    Side,
    gamma_k_bound,
    k_density_bound,
    m_f,
    max_one_sided_density,
    one_sided_density,
)
from services.sudt import abar_sparsity_check, base_case_checks

logger = logging.getLogger(__name__)

ALL_SUITES = (
    "calc",
    "structure",
    "disjoint",
    "lemma",
    "gamma",
    "kicsi",
    "base2",
    "mass",
    "sparsity",
    "wd",
    "mf",
)


@dataclass(frozen=True)
class SuiteOptions:
    """Caps and thresholds; None means the suite's own default."""

    max_depth: Optional[int] = None
    max_index: Optional[int] = None
    epsilon: Optional[Fraction] = None
    seed: int = 0


@dataclass
class SuiteReport:
    suite: str
    checks: List[CheckResult] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return bool(self.checks) and not failures(self.checks)

    def to_model(self) -> SuiteReportModel:
        return SuiteReportModel(
            suite=self.suite,
            passed=self.passed,
            checks=[CheckResultModel(**c.to_dict()) for c in self.checks],
        )


@lru_cache(maxsize=4)
def global_truncation(eps: Fraction) -> TruncatedSet:
    return truncate(eps)


def _pick(value: Optional[int], default: int) -> int:
    return default if value is None else value


def _count_check(name: str, violations: List[str], checked: int, detail: str) -> CheckResult:
    first = violations[0] if violations else ""
    return check(name, not violations, detail, checked=checked, violations=len(violations), first=first)


# ============== SUITES ==============


def suite_calc(opts: SuiteOptions) -> List[CheckResult]:
    expected = [
        (Address.of(1), "a", Fraction(1, 2)),
        (Address.of(2), "a", Fraction(1, 4)),
        (Address.of(1, 1), "a", Fraction(17, 64)),
        (Address.of(1, 2), "a", Fraction(33, 128)),
        (Address.of(1, 1), "r", Fraction(1, 128)),
        (Address.of(1), "r", Fraction(1, 4)),
        (Address.ones(10), "r", power_of_two(-47)),
    ]
    results = []
    for addr, what, value in expected:
        got = a_value(addr) if what == "a" else r_value(addr)
        results.append(check(f"{what}{addr}", got == value, "worked value", expected=value, got=got))
    return results


def suite_structure(opts: SuiteOptions) -> List[CheckResult]:
    depth, index = _pick(opts.max_depth, 4), _pick(opts.max_index, 8)
    nested, halving, limit, invalid = [], [], [], []
    checked = 0
    for addr in iter_addresses(depth, index):
        checked += 1
        try:
            value = address_value(addr)
        except AddressError:
            invalid.append(str(addr))
            continue
        a, r = value.a, value.r
        succ = parent_successor(addr)
        a_succ = a_value(succ)
        if r_value(succ) * 2 != r:
            halving.append(str(addr))
        for n in range(1, index + 1):
            a_child = a_value(child(addr, n))
            if not a_succ < a_child < a:
                nested.append(f"{addr}+{n}")
            if a_child - a_succ != power_of_two(-(n + 3)) * r:
                limit.append(f"{addr}+{n}")
    return [
        _count_check("children_between", nested, checked, "a(succ) < a(child) < a(addr)"),
        _count_check("successor_halves_gap", halving, checked, "r(succ) = r / 2"),
        _count_check("child_offset", limit, checked, "a(child n) - a(succ) = 2^-(n+3) r"),
        _count_check("address_value", invalid, checked, "recursion r = closed form r > 0 and 0 < a <= 1/2"),
    ]


def suite_disjoint(opts: SuiteOptions) -> List[CheckResult]:
    eps = opts.epsilon or power_of_two(-30)
    pairs = enumerate_removals(eps)
    clashes = check_disjoint_closures(pairs)
    outside = [
        str(p.addr)
        for p in pairs
        if not (p.left.lo > 0 and p.right.hi <= Fraction(5, 8))
    ]
    return [
        check(
            "closures_disjoint",
            not clashes,
            f"{len(pairs)} removal pairs at eps {eps}",
            clashes=len(clashes),
        ),
        _count_check("inside_unit_range", outside, len(pairs), "removals inside (0, 5/8]"),
        check("nonempty", bool(pairs), "enumeration produced removals", pairs=len(pairs)),
    ]


def suite_lemma(opts: SuiteOptions) -> List[CheckResult]:
    depth, index = _pick(opts.max_depth, 3), _pick(opts.max_index, 6)
    t = global_truncation(opts.epsilon or power_of_two(-40))
    violations, checked = [], 0
    for addr in iter_addresses(depth, index):
        checked += 1
        if k_density_bound(t, addr).lo < 1 - 2 * alpha(addr.depth):
            violations.append(str(addr))
    return [_count_check("k_density", violations, checked, "|E ∩ K| >= (1 - 2 alpha_k) |K|")]


def suite_gamma(opts: SuiteOptions) -> List[CheckResult]:
    depth, index = _pick(opts.max_depth, 3), _pick(opts.max_index, 6)
    t = global_truncation(opts.epsilon or power_of_two(-40))
    violations, checked = [], 0
    for addr in iter_addresses(depth, index):
        checked += 1
        if gamma_k_bound(t, addr).hi > 1 - 2 * alpha(addr.depth):
            violations.append(str(addr))
    return [_count_check("j_scale_density", violations, checked, "density at a, r/2 <= 1 - 2 alpha_k")]


def suite_kicsi(opts: SuiteOptions) -> List[CheckResult]:
    depth, index = _pick(opts.max_depth, 2), _pick(opts.max_index, 6)
    t = global_truncation(opts.epsilon or power_of_two(-40))
    violations, not_in_set, checked = [], [], 0
    for addr in iter_addresses(depth, index):
        r, ceiling = r_value(addr), 1 - alpha(addr.depth) / 4
        for x in (a_value(child(addr, 5)), a_value(addr)):
            checked += 1
            if not t.upper.contains(x):
                not_in_set.append(f"{addr}@{x}")
            if max_one_sided_density(t, x, 2 * r).hi > ceiling:
                violations.append(f"{addr}@{x}")
    return [
        _count_check("sample_in_upper", not_in_set, checked, "sample points lie in the truncation"),
        _count_check("k_scale_ceiling", violations, checked, "density at radius 2 r <= 1 - alpha_k / 4"),
    ]


def suite_base2(opts: SuiteOptions) -> List[CheckResult]:
    return list(base_case_checks())


def suite_mass(opts: SuiteOptions) -> List[CheckResult]:
    exponents = (10, 20, 30, 40)
    partial = [enumerated_mass(enumerate_removals(power_of_two(-e))) for e in exponents]
    final = global_truncation(power_of_two(-40))
    results = [
        check(
            "partial_sums_increase",
            all(a < b for a, b in zip(partial, partial[1:])),
            "enumerated removal mass grows as eps shrinks",
        ),
        check(
            "partial_sums_below_total",
            all(p < TOTAL_REMOVAL_MASS for p in partial),
            "every partial sum < 16/159",
        ),
        check(
            "gap_at_2^-40",
            TOTAL_REMOVAL_MASS - partial[-1] < Fraction(1, 10**6),
            "16/159 - partial sum < 10^-6",
            gap=TOTAL_REMOVAL_MASS - partial[-1],
        ),
        check(
            "measure_sandwich",
            final.lower_measure() <= Fraction(302, 159) <= final.upper.measure(),
            "|upper| - omitted <= 302/159 <= |upper|",
        ),
    ]
    inside = [
        p
        for p in enumerate_removals(power_of_two(-40))
        if p.addr.depth > 1 and p.addr.indices[0] == 1
    ]
    deep = enumerated_mass(inside)
    tail = subtree_tail_mass(Address.of(1))
    results.append(
        check(
            "subtree_tail",
            deep <= tail and tail - deep < Fraction(1, 10**6),
            "descendants of (1): enumerated mass approaches 1/3180",
            enumerated=deep,
            closed_form=tail,
        )
    )
    return results


def suite_sparsity(opts: SuiteOptions) -> List[CheckResult]:
    rng = random.Random(opts.seed)
    depth, index = _pick(opts.max_depth, 4), _pick(opts.max_index, 8)
    results = []
    for _ in range(20):
        addr = Address(tuple(rng.randint(1, index) for _ in range(rng.randint(1, depth))))
        ratio = abar_sparsity_check(addr)
        offset = a_value(child(addr, 1)) - a_value(parent_successor(addr))
        results.append(
            check(
                f"sparsity{addr}",
                ratio == Fraction(1, 16) and offset == r_value(addr) / 16,
                "bottom segment is 1/16 of K",
                ratio=ratio,
            )
        )
    return results


def suite_wd(opts: SuiteOptions) -> List[CheckResult]:
    N, tol = 8, Fraction(1, 10**15)
    t = wd_example(N, tol)
    results = []
    for n in range(2, 7):
        right_end = Fraction(1, n**n)
        inv_lo, inv_hi = enclose_inverse_sqrt(n, tol * n**n)
        ell_lo, ell_hi = right_end * inv_lo, right_end * inv_hi
        full = one_sided_density(t, 0, right_end, Side.RIGHT)
        floor = 1 - inv_hi - wd_tail_majorant(n) / right_end
        results.append(
            check(
                f"dense_at_n={n}",
                full.lo > floor,
                "right density over [0, n^-n] > 1 - n^-1/2 - tail",
                lo=full.lo,
                floor=floor,
            )
        )
        sparse = one_sided_density(t, 0, ell_lo, Side.RIGHT)
        ceiling = 2 * Fraction(1, (n + 1) ** (n + 1)) / ell_hi
        results.append(
            check(
                f"sparse_at_n={n}",
                sparse.hi < ceiling,
                "right density over [0, n^(-n-1/2)] < 2 (n+1)^-(n+1) / n^(-n-1/2)",
                hi=sparse.hi,
                ceiling=ceiling,
            )
        )
    left = one_sided_density(t, 0, Fraction(1, 4), Side.LEFT)
    results.append(check("empty_left", left.hi == 0, "nothing of the set lies left of 0"))
    return results


def _mass_by_membership(t: TruncatedSet, lo: Fraction, hi: Fraction) -> Fraction:
    """|upper ∩ [lo, hi]| from membership at midpoints between crossing points."""
    cuts = {lo, hi}
    for part in t.upper.parts_meeting(Interval.closed(lo, hi)):
        cuts.update(c for c in (part.lo, part.hi) if lo < c < hi)
    points = sorted(cuts)
    return sum(
        (b - a for a, b in zip(points, points[1:]) if t.upper.contains((a + b) / 2)),
        Fraction(0),
    )


def suite_mf(opts: SuiteOptions) -> List[CheckResult]:
    rng = random.Random(opts.seed)
    t = global_truncation(opts.epsilon or power_of_two(-20))
    grid = 256
    mismatches, crossing_misses, grid_misses = [], [], []
    for _ in range(50):
        x = Fraction(rng.randint(-2**20, 2**20), 2**20) * Fraction(3, 4)
        r = Fraction(rng.randint(1, 2**16), 2**18)
        bound = m_f(t, x, r)
        if bound != max_one_sided_density(t, x, r):
            mismatches.append(f"{x},{r}")
        crossing = max(_mass_by_membership(t, x - r, x), _mass_by_membership(t, x, x + r)) / r
        if crossing != bound.hi:
            crossing_misses.append(f"{x},{r}")
        # interior offsets only; f is 1-Lipschitz so the sup is within 1/grid
        values = []
        for i in range(-grid + 1, grid):
            y = x + r * i / grid
            values.append(t.upper.measure_in(Interval.closed(min(x, y), max(x, y))) / r)
        sup = max(values)
        if not (sup <= bound.hi and bound.hi - sup <= Fraction(1, grid)):
            grid_misses.append(f"{x},{r}")
    return [
        _count_check("mf_equals_max_side", mismatches, 50, "m_f = max one-sided density"),
        _count_check("crossing_oracle", crossing_misses, 50, "membership integral over crossing points matches m_f"),
        _count_check("grid_oracle", grid_misses, 50, "interior grid supremum agrees within 1/grid"),
    ]


SUITES: Dict[str, Callable[[SuiteOptions], List[CheckResult]]] = {
    "calc": suite_calc,
    "structure": suite_structure,
    "disjoint": suite_disjoint,
    "lemma": suite_lemma,
    "gamma": suite_gamma,
    "kicsi": suite_kicsi,
    "base2": suite_base2,
    "mass": suite_mass,
    "sparsity": suite_sparsity,
    "wd": suite_wd,
    "mf": suite_mf,
}


def validate_options(opts: SuiteOptions) -> None:
    """Refuse caps beyond the configured limits before any work starts."""
    settings = get_settings()
    if opts.max_depth is not None and not 0 <= opts.max_depth <= settings.VERIFY_MAX_DEPTH:
        raise ResourceLimitError(f"max_depth {opts.max_depth} exceeds limit {settings.VERIFY_MAX_DEPTH}")
    if opts.max_index is not None and not 1 <= opts.max_index <= settings.VERIFY_MAX_INDEX:
        raise ResourceLimitError(f"max_index {opts.max_index} exceeds limit {settings.VERIFY_MAX_INDEX}")
    if opts.epsilon is not None and opts.epsilon < power_of_two(-settings.VERIFY_MIN_EPSILON_EXP):
        raise ResourceLimitError(
            f"epsilon {opts.epsilon} below 2^-{settings.VERIFY_MIN_EPSILON_EXP}"
        )


class SuiteOrchestrator:
    """Runs verification suites and collects per-suite reports."""

    def __init__(self, parallel: bool = False, workers: Optional[int] = None, fail_on_error: bool = False):
        self.parallel = parallel
        self.workers = workers or get_settings().PARALLEL_WORKERS
        self.fail_on_error = fail_on_error
        self.reports: List[SuiteReport] = []
        self._lock = threading.Lock()

    def _run_suite(self, name: str, opts: SuiteOptions) -> SuiteReport:
        try:
            return SuiteReport(suite=name, checks=SUITES[name](opts))
        except Exception as e:
            logger.error(f"Suite {name} failed: {e}", exc_info=True)
            if self.fail_on_error:
                raise
            return SuiteReport(suite=name, checks=[check("error", False, str(e))])

    def run(self, names: Sequence[str], opts: Optional[SuiteOptions] = None) -> List[SuiteReport]:
        opts = opts or SuiteOptions()
        unknown = [n for n in names if n not in SUITES]
        if unknown:
            raise ValueError(f"Unknown suites: {', '.join(unknown)}")
        validate_options(opts)

        start = time.monotonic()
        logger.info("Starting verification", extra={"suites": list(names)})
        by_name: Dict[str, SuiteReport] = {}
        if self.parallel and len(names) > 1:
            with ThreadPoolExecutor(max_workers=self.workers) as executor:
                futures = {executor.submit(self._run_suite, n, opts): n for n in names}
                for future in as_completed(futures):
                    report = future.result()
                    with self._lock:
                        by_name[report.suite] = report
        else:
            for name in names:
                by_name[name] = self._run_suite(name, opts)

        # reports keep the requested order regardless of completion order
        self.reports = [by_name[n] for n in names]
        logger.info(
            "Verification completed",
            extra={
                "duration_seconds": round(time.monotonic() - start, 3),
                "passed": sum(1 for r in self.reports if r.passed),
                "failed": sum(1 for r in self.reports if not r.passed),
            },
        )
        return self.reports


def parse_suite_names(text: str) -> Tuple[str, ...]:
    """Comma-separated suite names; "all" selects every suite."""
    names = tuple(n.strip() for n in text.split(",") if n.strip())
    if names == ("all",):
        return ALL_SUITES
    return names


def suite_options(
    max_depth: Optional[int] = None,
    max_index: Optional[int] = None,
    epsilon: Optional[RationalLike] = None,
    seed: int = 0,
) -> SuiteOptions:
    return SuiteOptions(
        max_depth=max_depth,
        max_index=max_index,
        epsilon=to_rational(epsilon) if epsilon is not None else None,
        seed=seed,
    )
