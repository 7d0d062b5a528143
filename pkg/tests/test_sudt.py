"""Tests for the non-SUDT chain construction and the finite-union device."""

from fractions import Fraction

import pytest

from construction.addresses import Address
from construction.removals import k_interval
from core.exceptions import CapExceededError, UnsupportedSetError, WitnessError
from core.intervals import Interval, IntervalSet
from core.rationals import power_of_two
from schemas.certificates import SudtCertificateModel
from services.checks import failures
from services.sudt import (
    SudtCertificate,
    abar_sparsity_check,
    base_case_checks,
    certify_finite_union,
    chain_links,
    condition_a_checks,
    condition_b_checks,
    delta_prime,
    find_non_sudt_witness,
    gamma_prime,
    kicsi_ceiling,
    nagy_floor,
    sample_points,
    sudt_deltas_finite_union,
)
from services.witness import SequenceSpec


@pytest.fixture(scope="module")
def attacked() -> SequenceSpec:
    """gamma_n = 1 - 2^-n, delta_n = 2^-n."""
    return SequenceSpec.parse("geom:1:1/2", "geom:1:1/2")


@pytest.fixture(scope="module")
def chain_certificate(attacked) -> SudtCertificate:
    return find_non_sudt_witness(attacked, 2)


@pytest.fixture
def halving_gammas() -> SequenceSpec:
    return SequenceSpec.parse("geom:1:1/2", "table:1")


class TestModifiedSequences:
    """Test the modified set's own sequences and thresholds."""

    def test_values(self):
        assert gamma_prime(1) == Fraction(1, 2)
        assert delta_prime(1) == power_of_two(-100)
        assert kicsi_ceiling(11) == 1 - Fraction(1, 4 * 10**11)
        assert nagy_floor(10) == 1 - Fraction(384, 10**10)

    def test_base_case(self):
        checks = base_case_checks()
        assert [c.name for c in checks] == ["base_delta", "base_gamma"]
        assert not failures(checks)

    def test_sparsity(self):
        for addr in (Address.of(1), Address.of(3, 5), Address.of(2, 1, 7)):
            assert abar_sparsity_check(addr) == Fraction(1, 16)

    def test_chain_links(self):
        assert chain_links(Address.ones(3)) == [Address.of(1), Address.of(1, 1), Address.of(1, 1, 1)]


class TestConditions:
    def test_condition_a_holds_along_ones(self):
        assert not failures(condition_a_checks(Address.ones(11), 2))

    def test_condition_a_fails_at_shallow_depth(self):
        # 1 - 384 alpha_1 is negative
        checks = condition_a_checks(Address.of(1), 1)
        assert [c.name for c in failures(checks)] == ["a_gamma"]

    def test_condition_b(self):
        addr = Address.ones(11)
        checks = condition_b_checks(addr, 1 - power_of_two(-39), power_of_two(-39), 1024)
        assert [c.name for c in checks] == ["b_gamma", "b_delta", "b_spot"]
        assert not failures(checks)

    def test_condition_b_rejects_low_gamma(self):
        checks = condition_b_checks(Address.ones(11), 1 - power_of_two(-38), power_of_two(-39), 1024, spot_check=False)
        assert [c.name for c in failures(checks)] == ["b_gamma"]


class TestNonSudtWitness:
    """Test the chain search against gamma_n = 1 - 2^-n, delta_n = 2^-n."""

    def test_first_step(self, chain_certificate):
        step = chain_certificate.steps[0]
        assert (step.k_prime, step.m_prime) == (10, 1)
        assert step.m == 39
        assert step.n_prime == 1
        assert step.i == 1
        assert step.chain == Address.ones(11)

    def test_first_step_threshold_is_exact(self):
        threshold = Fraction(1, 4 * 10**11)
        assert power_of_two(-39) < threshold <= power_of_two(-38)

    def test_second_step(self, chain_certificate):
        step = chain_certificate.steps[1]
        assert (step.k_prime, step.m_prime) == (11, 2)
        assert step.m == 42
        assert step.chain == Address.ones(12)

    def test_certificate_passes(self, chain_certificate):
        assert chain_certificate.passed
        assert chain_certificate.enclosure == k_interval(Address.ones(12))

    def test_model_round_trip(self, chain_certificate):
        dumped = chain_certificate.to_model().model_dump(mode="json")
        assert dumped["type"] == "non-sudt"
        restored = SudtCertificate.from_model(SudtCertificateModel.model_validate(dumped))
        assert restored == chain_certificate

    def test_rejects_zero_steps(self, attacked):
        with pytest.raises(WitnessError):
            find_non_sudt_witness(attacked, 0)

    def test_cap(self, attacked):
        with pytest.raises(CapExceededError):
            find_non_sudt_witness(attacked, 1, cap=10, spot_check=False)


class TestFiniteUnion:
    """Test the finite-union SUDT device."""

    def test_two_components(self, halving_gammas):
        s = IntervalSet.closed((0, Fraction(1, 4)), (Fraction(1, 2), 1))
        cert = certify_finite_union(s, halving_gammas, 3)
        assert cert.delta == Fraction(1, 8)
        assert cert.deltas == (Fraction(1, 8),) * 3
        assert cert.passed
        assert len(cert.checks) == 3 * 2 * 5

    def test_single_interval(self, halving_gammas):
        s = IntervalSet.closed((0, 1))
        assert sudt_deltas_finite_union(s, halving_gammas, 2) == [Fraction(1, 2), Fraction(1, 2)]

    def test_sample_points(self):
        assert sample_points(Interval.closed(0, 1)) == [
            Fraction(0),
            Fraction(1, 4),
            Fraction(1, 2),
            Fraction(3, 4),
            Fraction(1),
        ]

    @pytest.mark.parametrize(
        "s",
        [
            IntervalSet.empty(),
            IntervalSet.of(Interval.open(0, 1)),
            IntervalSet.closed((Fraction(1, 2), Fraction(1, 2))),
        ],
    )
    def test_unsupported_sets(self, s, halving_gammas):
        with pytest.raises(UnsupportedSetError):
            certify_finite_union(s, halving_gammas, 1)

    def test_model(self, halving_gammas):
        cert = certify_finite_union(IntervalSet.closed((0, 1)), halving_gammas, 1)
        dumped = cert.to_model().model_dump(mode="json")
        assert dumped["type"] == "sudt-finite"
        assert dumped["delta"] == "1/2"
        assert dumped["gamma"] == "geom:1:1/2"
