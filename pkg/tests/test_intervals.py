"""Tests for the exact interval-set algebra."""

from fractions import Fraction

import pytest

from core.exceptions import IntervalError
from core.intervals import (
    Interval,
    IntervalSet,
    intersect,
    measure,
    normalize,
    subtract,
    subtract_disjoint,
)


class TestInterval:
    """Test single intervals."""

    def test_malformed_interval_rejected(self):
        with pytest.raises(IntervalError):
            Interval.closed(1, 0)

    def test_open_degenerate_rejected(self):
        with pytest.raises(IntervalError):
            Interval(Fraction(1), Fraction(1), True, False)

    def test_closed_point_allowed(self):
        point = Interval.closed(Fraction(1, 2), Fraction(1, 2))
        assert point.is_degenerate
        assert point.length == 0

    def test_contains_respects_flags(self):
        j = Interval.open(0, 1)
        assert not j.contains(0)
        assert j.contains(Fraction(1, 2))
        assert not j.contains(1)
        assert Interval.closed(0, 1).contains(1)

    def test_contains_interval(self):
        outer = Interval.open(0, 1)
        assert outer.contains_interval(Interval.open(0, 1))
        assert not outer.contains_interval(Interval.closed(0, Fraction(1, 2)))

    def test_overlap_length(self):
        a = Interval.closed(0, Fraction(1, 2))
        b = Interval.open(Fraction(1, 4), 1)
        assert a.overlap_length(b) == Fraction(1, 4)
        assert a.overlap_length(Interval.closed(2, 3)) == 0

    def test_intersection_flags(self):
        a = Interval.closed(0, 1)
        b = Interval.open(Fraction(1, 2), 2)
        piece = a.intersection(b)
        assert piece == Interval(Fraction(1, 2), Fraction(1), True, False)

    def test_touching_intersection_is_point_or_empty(self):
        a = Interval.closed(0, 1)
        assert a.intersection(Interval.closed(1, 2)) == Interval.closed(1, 1)
        assert a.intersection(Interval.open(1, 2)) is None

    def test_str(self):
        assert str(Interval(Fraction(3, 8), Fraction(2, 5), True, True)) == "(3/8, 2/5)"

    def test_dict_round_trip(self):
        j = Interval(Fraction(-1, 3), Fraction(5, 7), True, False)
        assert Interval.from_dict(j.to_dict()) == j


class TestNormalize:
    """Test canonical form."""

    def test_sorts_and_merges_overlaps(self):
        s = normalize([Interval.closed(2, 3), Interval.closed(0, 1), Interval.closed(Fraction(1, 2), 2)])
        assert s.parts == (Interval.closed(0, 3),)

    def test_merges_closed_touching(self):
        s = normalize([Interval.closed(0, 1), Interval.closed(1, 2)])
        assert s.parts == (Interval.closed(0, 2),)

    def test_open_closed_touching_stays_split(self):
        s = normalize([Interval(Fraction(0), Fraction(1), False, True), Interval.closed(1, 2)])
        assert len(s) == 2
        assert s.is_canonical()

    def test_rejects_non_interval(self):
        with pytest.raises(IntervalError):
            normalize([(0, 1)])

    def test_measure(self):
        s = IntervalSet.closed((0, Fraction(1, 4)), (Fraction(1, 2), 1))
        assert measure(s) == Fraction(3, 4)
        assert IntervalSet.empty().measure() == 0


class TestSetOperations:
    """Test intersection, subtraction and local measure."""

    def test_intersect_with_window(self):
        s = IntervalSet.closed((0, 1), (2, 3))
        piece = intersect(s, Interval.closed(Fraction(1, 2), Fraction(5, 2)))
        assert piece.parts == (
            Interval.closed(Fraction(1, 2), 1),
            Interval.closed(2, Fraction(5, 2)),
        )

    def test_subtract_open_hole_keeps_endpoints(self):
        s = IntervalSet.closed((0, 1))
        holed = subtract(s, IntervalSet.of(Interval.open(Fraction(1, 4), Fraction(1, 2))))
        assert holed.parts == (
            Interval.closed(0, Fraction(1, 4)),
            Interval.closed(Fraction(1, 2), 1),
        )
        assert holed.contains(Fraction(1, 4))
        assert not holed.contains(Fraction(3, 8))

    def test_subtract_closed_hole_opens_endpoints(self):
        s = IntervalSet.closed((0, 1))
        holed = subtract(s, IntervalSet.closed((Fraction(1, 4), Fraction(1, 2))))
        assert holed.parts == (
            Interval(Fraction(0), Fraction(1, 4), False, True),
            Interval(Fraction(1, 2), Fraction(1), True, False),
        )

    def test_subtract_hole_covering_part(self):
        s = IntervalSet.closed((0, 1), (2, 3))
        holed = subtract(s, IntervalSet.of(Interval.open(-1, Fraction(3, 2))))
        assert holed.parts == (Interval.closed(2, 3),)

    def test_subtract_hole_at_left_endpoint_leaves_point(self):
        s = IntervalSet.closed((0, 1))
        holed = subtract(s, IntervalSet.of(Interval.open(0, Fraction(1, 2))))
        assert holed.parts == (Interval.closed(0, 0), Interval.closed(Fraction(1, 2), 1))
        assert holed.measure() == Fraction(1, 2)

    def test_subtract_disjoint_matches_subtract(self):
        s = IntervalSet.closed((-1, 1))
        holes = [Interval.open(Fraction(3, 5), Fraction(5, 8)), Interval.open(Fraction(3, 8), Fraction(2, 5))]
        assert subtract_disjoint(s, holes) == subtract(s, normalize(holes))

    def test_measure_in(self):
        s = IntervalSet.closed((0, Fraction(1, 4)), (Fraction(1, 2), 1))
        assert s.measure_in(Interval.closed(Fraction(1, 8), Fraction(3, 4))) == Fraction(3, 8)
        assert s.measure_in(Interval.open(Fraction(1, 4), Fraction(1, 2))) == 0

    def test_union_and_hull(self):
        a = IntervalSet.closed((0, 1))
        b = IntervalSet.closed((2, 3))
        u = a.union(b)
        assert u.hull() == Interval.closed(0, 3)
        assert u.endpoints() == [0, 1, 2, 3]
        assert IntervalSet.empty().hull() is None

    def test_list_round_trip(self):
        s = IntervalSet.of(Interval.open(0, 1), Interval.closed(2, 3))
        assert IntervalSet.from_list(s.to_list()) == s


def _random_interval(rng) -> Interval:
    lo = Fraction(rng.randint(-40, 40), rng.randint(1, 8))
    hi = lo + Fraction(rng.randint(0, 24), rng.randint(1, 8))
    if lo == hi:
        return Interval.closed(lo, hi)
    return Interval(lo, hi, rng.random() < 0.3, rng.random() < 0.3)


def _random_set(rng, size: int) -> IntervalSet:
    return normalize([_random_interval(rng) for _ in range(size)])


class TestMeasureProperties:
    """Seeded random checks of the measure identities."""

    def test_normalize_measure_against_lengths(self, rng):
        for _ in range(200):
            raw = [_random_interval(rng) for _ in range(rng.randint(1, 6))]
            total = sum((i.length for i in raw), Fraction(0))
            overlap = sum(
                (a.overlap_length(b) for idx, a in enumerate(raw) for b in raw[idx + 1 :]),
                Fraction(0),
            )
            m = measure(normalize(raw))
            assert m <= total
            assert (m == total) == (overlap == 0)

    def test_inclusion_exclusion(self, rng):
        for _ in range(200):
            a, b = _random_set(rng, rng.randint(0, 5)), _random_set(rng, rng.randint(0, 5))
            both = a.intersect_set(b)
            assert a.union(b).measure() + both.measure() == a.measure() + b.measure()
            assert subtract(a, b).measure() == a.measure() - both.measure()

    def test_intersect_set_is_canonical_and_symmetric(self, rng):
        for _ in range(100):
            a, b = _random_set(rng, 4), _random_set(rng, 4)
            assert a.intersect_set(b).is_canonical()
            assert a.intersect_set(b) == b.intersect_set(a)

    def test_intersect_set_example(self):
        a = IntervalSet.closed((0, 2), (3, 5))
        b = IntervalSet.closed((1, 4))
        assert a.intersect_set(b) == IntervalSet.closed((1, 2), (3, 4))
