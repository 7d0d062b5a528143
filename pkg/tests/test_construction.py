"""Tests for the removal construction and the weakly dense example."""

from fractions import Fraction

import pytest

from construction.addresses import Address, a_value, child, parent_successor, r_value
from construction.base import SlackRegion, TruncatedSet, total_slack
from construction.removals import (
    TOTAL_REMOVAL_MASS,
    RemovalConstruction,
    alpha,
    check_disjoint_closures,
    enumerate_removals,
    enumerated_mass,
    gamma,
    j_interval,
    j_pair,
    k_interval,
    omitted_block,
    removal_pair,
    subtree_region,
    subtree_tail_mass,
    total_removal_mass,
    truncate,
)
from construction.wd_example import (
    EnclosedInterval,
    WdConstruction,
    enclose_inverse_sqrt,
    wd_component,
    wd_example,
    wd_tail_hull,
    wd_tail_majorant,
)
from core.exceptions import ConstructionError
from core.intervals import Interval, IntervalSet
from core.rationals import power_of_two


class TestRemovalFamilies:
    """Test the I, J and K intervals of one address."""

    def test_top_removal_pair(self):
        pair = removal_pair(Address.of(1))
        assert pair.left == Interval.open(Fraction(3, 8), Fraction(2, 5))
        assert pair.right == Interval.open(Fraction(3, 5), Fraction(5, 8))
        assert pair.length == Fraction(1, 40)

    def test_removal_length_is_alpha_r(self):
        addr = Address.of(2, 3, 1)
        assert removal_pair(addr).length == alpha(3) * r_value(addr)

    def test_j_and_k_intervals(self):
        addr = Address.of(1)
        left, right = j_pair(addr)
        assert left == Interval.closed(Fraction(3, 8), Fraction(1, 2))
        assert right == Interval.closed(Fraction(1, 2), Fraction(5, 8))
        assert j_interval(addr) == Interval.closed(Fraction(3, 8), Fraction(5, 8))
        assert k_interval(addr) == Interval.closed(Fraction(1, 4), Fraction(1, 2))

    def test_removals_sit_inside_j(self):
        for addr in (Address.of(1), Address.of(3, 2), Address.of(1, 1, 4)):
            pair = removal_pair(addr)
            j = j_interval(addr)
            assert j.contains_interval(pair.left) and j.contains_interval(pair.right)

    def test_subtree_region(self):
        assert subtree_region(Address.of(1)) == Interval.closed(Fraction(1, 4), Fraction(5, 8))

    def test_alpha_gamma(self):
        assert alpha(2) == Fraction(1, 100)
        assert gamma(2) == Fraction(99, 100)
        with pytest.raises(ConstructionError):
            alpha(0)


class TestMassAccounting:
    """Test removal masses and omitted blocks."""

    def test_total_mass(self):
        assert TOTAL_REMOVAL_MASS == Fraction(16, 159)

    def test_total_mass_from_top_level_sums(self):
        # top-level pairs plus every strict subtree below them
        top = sum(2 * alpha(1) * r_value(Address.of(n)) for n in range(1, 200))
        tails = sum(subtree_tail_mass(Address.of(n)) for n in range(1, 200))
        gap = total_removal_mass() - top - tails
        assert 0 < gap < power_of_two(-190)

    def test_subtree_tail_mass(self):
        assert subtree_tail_mass(Address.of(1)) == Fraction(1, 3180)

    def test_root_block_carries_everything(self):
        block = omitted_block(None, 1)
        assert block.mass == Fraction(16, 159)
        assert block.hull == Interval.closed(0, Fraction(5, 8))

    def test_block_hull(self):
        block = omitted_block(None, 3)
        assert block.hull == Interval.closed(0, Fraction(5, 32))
        assert block.mass == Fraction(4, 159)

    def test_block_masses_close_the_gap(self):
        t = truncate(Fraction(1, 100))
        assert total_slack(t.slack) == TOTAL_REMOVAL_MASS - Fraction(3, 40)
        assert t.omitted_mass == Fraction(163, 6360)

    def test_enumerated_mass_approaches_total(self):
        previous = Fraction(0)
        for exponent in (8, 12, 16, 20):
            mass = enumerated_mass(enumerate_removals(power_of_two(-exponent)))
            assert previous <= mass < TOTAL_REMOVAL_MASS
            previous = mass


class TestTruncate:
    """Test global and windowed truncations."""

    def test_coarsest_truncation(self):
        t = truncate(1)
        assert t.removal_count == 0
        assert t.upper == IntervalSet.closed((-1, 1))
        assert t.omitted_mass == Fraction(16, 159)

    def test_first_removal_threshold(self):
        assert enumerate_removals(Fraction(1, 20)) == []
        addrs = [p.addr for p in enumerate_removals(Fraction(1, 100))]
        assert addrs == [Address.of(1), Address.of(2)]

    def test_upper_excludes_removals(self):
        t = truncate(Fraction(1, 100))
        assert t.upper.contains(Fraction(3, 8))
        assert not t.upper.contains(Fraction(31, 80))
        assert not t.upper.contains(Fraction(49, 80))
        assert t.upper.contains(Fraction(1, 2))

    def test_measure_sandwich(self, truncation_20):
        assert truncation_20.lower_measure() <= Fraction(302, 159) <= truncation_20.upper.measure()

    def test_closures_disjoint(self):
        assert check_disjoint_closures(enumerate_removals(power_of_two(-20))) == []

    def test_disjoint_check_reports_clash(self):
        pair = removal_pair(Address.of(1))
        assert len(check_disjoint_closures([pair, pair])) == 2

    def test_enumeration_order(self):
        pairs = enumerate_removals(power_of_two(-16))
        depths = [p.addr.depth for p in pairs]
        assert depths == sorted(depths)
        first_level = [a_value(p.addr) for p in pairs if p.addr.depth == 1]
        assert first_level == sorted(first_level, reverse=True)

    def test_windowed_matches_global(self, truncation_30):
        window = k_interval(Address.of(1, 1))
        local = truncate(power_of_two(-30), window)
        assert local.window == window
        assert local.upper.measure() == truncation_30.upper.measure_in(window)
        assert local.removal_count < truncation_30.removal_count

    def test_rejects_bad_epsilon(self):
        with pytest.raises(ConstructionError):
            truncate(0)
        with pytest.raises(ConstructionError):
            truncate(Fraction(-1, 2))

    def test_dict_round_trip(self):
        t = truncate(Fraction(1, 100))
        assert TruncatedSet.from_dict(t.to_dict()) == t

    def test_construction_class(self):
        construction = RemovalConstruction()
        assert construction.truncate(1).omitted_mass == Fraction(16, 159)
        assert construction.describe()["construction"] == "removal"


def _random_address(rng) -> Address:
    return Address(tuple(rng.randint(1, 6) for _ in range(rng.randint(1, 4))))


class TestNestingProperties:
    """Seeded checks of the K nesting, the removal masses and refinement."""

    def test_children_tile_bottom_sixteenth_of_k(self, rng):
        for _ in range(25):
            addr = _random_address(rng)
            k = k_interval(addr)
            r = r_value(addr)
            depth = rng.randint(1, 12)
            pieces = [k_interval(child(addr, n)) for n in range(1, depth + 1)]
            for piece in pieces:
                assert k.contains_interval(piece)
            assert sum(p.length for p in pieces) == r / 16 - power_of_two(-(depth + 4)) * r
            assert pieces[0].hi == k.lo + r / 16

    def test_first_stage_removal_mass(self, rng):
        for _ in range(25):
            addr = _random_address(rng)
            inside = removal_pair(addr).left.length + removal_pair(parent_successor(addr)).right.length
            assert inside == Fraction(3, 2) * alpha(addr.depth) * k_interval(addr).length

    def test_first_stage_removals_sit_in_k(self, rng):
        for _ in range(10):
            addr = _random_address(rng)
            k = k_interval(addr)
            assert k.contains_interval(removal_pair(addr).left)
            assert k.contains_interval(removal_pair(parent_successor(addr)).right)

    def test_upper_shrinks_under_refinement(self, truncation_20, truncation_30):
        assert not truncation_30.upper.subtract(truncation_20.upper)
        assert truncation_30.upper.measure() < truncation_20.upper.measure()
        assert truncation_30.omitted_mass < truncation_20.omitted_mass

    def test_random_points_of_finer_upper_lie_in_coarser(self, rng, truncation_20, truncation_30):
        for _ in range(200):
            x = Fraction(rng.randint(-(2**20), 2**20), 2**20)
            if truncation_30.upper.contains(x):
                assert truncation_20.upper.contains(x)


class TestSlackRegion:
    def test_bound_in_caps_by_overlap_and_mass(self):
        region = SlackRegion(hull=Interval.closed(0, 1), mass=Fraction(1, 10))
        assert region.bound_in(Interval.closed(0, Fraction(1, 20))) == Fraction(1, 20)
        assert region.bound_in(Interval.closed(0, 2)) == Fraction(1, 10)
        assert region.bound_in(Interval.closed(2, 3)) == 0

    def test_local_slack_without_regions(self):
        t = TruncatedSet(upper=IntervalSet.closed((0, 1)), omitted_mass=Fraction(1, 8), epsilon=Fraction(1))
        assert t.local_slack(Interval.closed(0, Fraction(1, 16))) == Fraction(1, 16)
        assert t.local_slack(Interval.closed(0, 1)) == Fraction(1, 8)

    def test_negative_omitted_mass_rejected(self):
        with pytest.raises(ConstructionError):
            TruncatedSet(upper=IntervalSet.empty(), omitted_mass=Fraction(-1), epsilon=Fraction(1))


class TestWeaklyDenseExample:
    """Test the weakly dense example and its enclosures."""

    def test_perfect_square_is_exact(self):
        assert enclose_inverse_sqrt(4, Fraction(1, 10**9)) == (Fraction(1, 2), Fraction(1, 2))

    def test_inverse_sqrt_bracket(self):
        tol = Fraction(1, 1000)
        lo, hi = enclose_inverse_sqrt(2, tol)
        assert hi - lo <= tol
        assert lo * lo * 2 <= 1 <= hi * hi * 2

    def test_component_enclosure(self):
        comp = wd_component(4, Fraction(1, 10**6))
        assert comp.outer() == Interval.closed(Fraction(1, 512), Fraction(1, 256))
        assert comp.width == 0

    def test_bad_enclosure_rejected(self):
        with pytest.raises(ConstructionError):
            EnclosedInterval(lo_bounds=(Fraction(1), Fraction(0)), hi_bounds=(Fraction(2), Fraction(2)))

    def test_tail_majorant_dominates(self):
        tail = sum(Fraction(1, m**m) for m in range(3, 12))
        assert tail < wd_tail_majorant(2)
        assert wd_tail_majorant(8) == Fraction(1, 8 * 9**8)

    def test_example_shape(self):
        t = wd_example(8, Fraction(1, 10**12))
        assert t.upper.contains(0)
        assert t.upper.contains(Fraction(1, 4))
        assert not t.upper.contains(Fraction(1, 2))
        assert any(s.label == "tail" for s in t.slack)
        assert t.omitted_mass == total_slack(t.slack)
        assert t.upper.parts[0] == wd_tail_hull(8)

    @pytest.mark.parametrize("N,tol", [(1, Fraction(1, 10)), (3, Fraction(0))])
    def test_example_rejects_bad_parameters(self, N, tol):
        with pytest.raises(ConstructionError):
            wd_example(N, tol)

    def test_construction_class(self):
        construction = WdConstruction(components=4)
        window = Interval.closed(Fraction(1, 8), Fraction(1, 4))
        t = construction.truncate(Fraction(1, 10**6), window)
        assert t.window == window
        assert t.upper.hull().lo >= Fraction(1, 8)
        assert construction.describe() == {"construction": "wd", "components": 4}
