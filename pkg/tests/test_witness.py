"""Tests for sequence specifications and the non-UDT witness search."""

from fractions import Fraction

import pytest

from construction.addresses import Address
from core.exceptions import (
    CapExceededError,
    NeedsFinerEpsilonError,
    RangeExhaustedError,
    SequenceError,
    WitnessError,
)
from core.intervals import Interval
from core.rationals import power_of_two
from schemas.certificates import WitnessCertificateModel
from services.density import DensityBound, lipschitz_shift
from services.witness import (
    Progression,
    SequenceSpec,
    WitnessCertificate,
    derive_coarse_deltas,
    find_non_udt_witness,
    level_address,
    level_scales,
    vacuous_ceiling,
)


@pytest.fixture(scope="module")
def attacked_sequence() -> SequenceSpec:
    """gamma_n = 1 - 10^-(n+1), delta_n = 4^-n."""
    return SequenceSpec.parse("geom:1/10:1/10", "geom:1:1/4")


@pytest.fixture(scope="module")
def witness(attacked_sequence) -> WitnessCertificate:
    return find_non_udt_witness(attacked_sequence, 3, power_of_two(-60))


class TestProgression:
    """Test sequence text forms and validation."""

    def test_geometric_terms(self):
        p = Progression.parse("geom:1:1/4")
        assert p.term(1) == Fraction(1, 4)
        assert p.term(3) == Fraction(1, 64)
        assert p.size is None

    def test_table_terms(self):
        p = Progression.parse("table:1/2, 3/4")
        assert p.size == 2
        assert p.term(2) == Fraction(3, 4)
        with pytest.raises(RangeExhaustedError):
            p.term(3)

    def test_text_round_trip(self):
        for text in ("geom:1/10:1/10", "table:1/2,3/4"):
            assert Progression.parse(text).to_text() == text

    @pytest.mark.parametrize("text", ["geom:1:1", "geom:0:1/2", "table:", "list:1,2", "geom:1:0.5"])
    def test_rejects_bad_text(self, text):
        with pytest.raises((SequenceError, ValueError)):
            Progression.parse(text)

    def test_rejects_index_zero(self):
        with pytest.raises(SequenceError):
            Progression.parse("geom:1:1/2").term(0)


class TestSequenceSpec:
    def test_geometric_gamma_is_deficit(self, attacked_sequence):
        assert attacked_sequence.gamma(1) == Fraction(99, 100)
        assert attacked_sequence.delta(2) == Fraction(1, 16)
        assert attacked_sequence.kind == "geometric"

    def test_table_gamma_is_value(self):
        seq = SequenceSpec.table(["1/2", "3/4"], ["1/4", "1/4"])
        assert seq.gamma(2) == Fraction(3, 4)
        assert seq.kind == "table"

    def test_mixed_kind(self):
        assert SequenceSpec.parse("table:1/2", "geom:1:1/2").kind == "mixed"

    @pytest.mark.parametrize(
        "gammas,deltas",
        [
            (["3/4", "1/2"], ["1/4"]),
            (["1/2", "1"], ["1/4"]),
            (["0", "1/2"], ["1/4"]),
            (["1/2"], ["0"]),
            (["1/2"], ["1/8", "1/4"]),
        ],
    )
    def test_rejects_unrepresentable_tables(self, gammas, deltas):
        with pytest.raises(SequenceError):
            SequenceSpec.table(gammas, deltas)

    @pytest.mark.parametrize("gamma_text", ["geom:3:1/2", "geom:2:1/2", "geom:10:1/10"])
    def test_rejects_geometric_gamma_outside_unit_interval(self, gamma_text):
        with pytest.raises(SequenceError):
            SequenceSpec.parse(gamma_text, "geom:1:1/4")

    def test_accepts_geometric_gamma_just_inside(self):
        assert SequenceSpec.parse("geom:19/10:1/2", "geom:1:1/4").gamma(1) == Fraction(1, 20)

    def test_model_round_trip(self, attacked_sequence):
        assert SequenceSpec.from_model(attacked_sequence.to_model()) == attacked_sequence


class TestCoarseDeltas:
    """Test conversion of an arbitrary sequence onto the gamma_n = 1 - 10^-n grid."""

    def test_geometric_fine_sequence(self):
        fine = SequenceSpec.parse("geom:1:1/2", "geom:1:1/2")
        assert derive_coarse_deltas(fine, 2) == [Fraction(1, 64), Fraction(1, 512)]

    def test_constant_delta_table(self):
        fine = SequenceSpec.table(["1/2", "3/4", "999/1000"], ["1/4", "1/4", "1/4"])
        assert derive_coarse_deltas(fine, 1) == [Fraction(1, 4)]

    def test_table_never_reaches_threshold(self):
        fine = SequenceSpec.table(["1/2", "3/4"], ["1/4", "1/8"])
        with pytest.raises(RangeExhaustedError):
            derive_coarse_deltas(fine, 1)

    def test_no_qualifying_index(self):
        fine = SequenceSpec.table(["999/1000", "9999/10000"], ["1/4", "1/8"])
        with pytest.raises(RangeExhaustedError):
            derive_coarse_deltas(fine, 1)

    def test_cap(self):
        fine = SequenceSpec.parse("geom:1/2:999/1000", "geom:1:1/2")
        with pytest.raises(CapExceededError) as exc:
            derive_coarse_deltas(fine, 1, cap=100)
        assert exc.value.cap == 100

    def test_rejects_empty_request(self):
        with pytest.raises(SequenceError):
            derive_coarse_deltas(SequenceSpec.parse("geom:1:1/2", "geom:1:1/2"), 0)


class TestLevelGeometry:
    def test_level_address(self):
        assert level_address([], 2) == Address.of(2)
        assert level_address([2, 4], 7) == Address.of(1, 3, 7)

    def test_level_scales(self):
        x, r_x, rho = level_scales(Address.of(2))
        assert (x, r_x, rho) == (Fraction(1, 4), Fraction(1, 16), Fraction(1, 320))

    def test_vacuous_ceiling(self):
        assert vacuous_ceiling(1) == Fraction(17, 20)


class TestNonUdtWitness:
    """Test the nested-interval witness search."""

    def test_chosen_indices(self, witness):
        assert witness.chosen_indices == [2, 4, 7]
        assert witness.levels[0].x == Fraction(1, 4)
        assert witness.levels[0].rho == Fraction(1, 320)

    def test_every_level_certified(self, witness):
        for level in witness.levels:
            assert level.status == "certified"
            assert level.r_x < level.delta
            assert level.density_hi + level.rho / level.r_x < level.gamma

    def test_levels_nest(self, witness):
        for outer, inner in zip(witness.levels, witness.levels[1:]):
            assert outer.interval.lo < inner.interval.lo
            assert inner.interval.hi < outer.interval.hi
            assert inner.interval.length <= outer.interval.length / 2
        assert witness.enclosure == witness.levels[-1].interval

    def test_level_epsilon_refines_to_own_removals(self, witness):
        level = witness.levels[2]
        assert level.epsilon < Fraction(1, 1000) * 2 * level.r_x

    def test_model_round_trip(self, witness):
        dumped = witness.to_model().model_dump(mode="json")
        assert dumped["type"] == "non-udt"
        assert dumped["levels"][0]["x"] == "1/4"
        restored = WitnessCertificate.from_model(WitnessCertificateModel.model_validate(dumped))
        assert restored == witness

    def test_coarse_epsilon_needs_refinement(self, attacked_sequence):
        with pytest.raises(NeedsFinerEpsilonError) as exc:
            find_non_udt_witness(attacked_sequence, 2, Fraction(1, 100))
        assert exc.value.level == 2
        assert exc.value.required_epsilon == Fraction(1, 100) * power_of_two(-10)

    def test_vacuous_levels(self):
        seq = SequenceSpec.parse("table:1/2,3/4,7/8", "geom:1:1/4")
        cert = find_non_udt_witness(seq, 3, power_of_two(-60))
        assert [level.status for level in cert.levels] == ["vacuous"] * 3

    def test_coarsened_targets(self):
        seq = SequenceSpec.parse("geom:1:1/2", "geom:1:1/2")
        cert = find_non_udt_witness(seq, 2, power_of_two(-60), coarsen=True)
        assert [level.gamma for level in cert.levels] == [Fraction(9, 10), Fraction(99, 100)]
        assert [level.delta for level in cert.levels] == derive_coarse_deltas(seq, 2)

    def test_index_cap(self, attacked_sequence):
        with pytest.raises(CapExceededError):
            find_non_udt_witness(attacked_sequence, 3, power_of_two(-60), cap=5)

    @pytest.mark.parametrize("levels,eps", [(0, Fraction(1, 2)), (1, Fraction(0))])
    def test_rejects_bad_arguments(self, attacked_sequence, levels, eps):
        with pytest.raises(WitnessError):
            find_non_udt_witness(attacked_sequence, levels, eps)

    def test_enclosure_is_interval(self, witness):
        assert isinstance(witness.enclosure, Interval)
        assert witness.enclosure.length == 2 * witness.levels[-1].rho

    def test_indices_survive_refinement(self, attacked_sequence, witness):
        finer = find_non_udt_witness(attacked_sequence, 3, power_of_two(-80))
        assert finer.chosen_indices == witness.chosen_indices
        for coarse, fine in zip(witness.levels, finer.levels):
            assert fine.density_hi <= coarse.density_hi

    def test_whole_interval_stays_below_gamma(self, witness):
        for level in witness.levels:
            shifted = lipschitz_shift(DensityBound(lo=Fraction(0), hi=level.density_hi), level.rho, level.r_x)
            assert shifted.hi < level.gamma
