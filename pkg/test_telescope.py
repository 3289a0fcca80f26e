import threading
import unittest
from fractions import Fraction as F

from SERVICE.errors import DiameterViolation, NotInRangeSet, UnknownPoint
from SERVICE.space_service import restrict, revalidate, validate
from SERVICE.telescope_service import (
    INF_LABEL, BlockRule, RadiusRule, SequenceSpace, cauchy_no_limit_witness, distance, finite_prefix,
    offset_for, seq_distance, seq_window, telescope_build,
)
from SERVICE.values_service import AllRationals, GeometricGrid

HALF = RadiusRule.geometric(F(1, 2))


class TestRadii(unittest.TestCase):

    def test_rules(self):
        self.assertEqual(HALF.radius(3), F(1, 8))
        self.assertEqual(RadiusRule.harmonic().radius(4), F(1, 4))
        self.assertEqual(RadiusRule.from_range_set(GeometricGrid(F(3))).radius(2), F(1, 9))
        self.assertEqual(HALF.natural_range_set(), GeometricGrid(F(2)))
        with self.assertRaises(ValueError):
            RadiusRule.geometric(F(2))

    def test_offset_for(self):
        self.assertEqual(offset_for(HALF, F(1, 8)), 3)
        self.assertEqual(offset_for(HALF, F(1)), 0)
        self.assertEqual(offset_for(RadiusRule.harmonic(), F(1, 10)), 10)


class TestSequenceSpace(unittest.TestCase):

    def test_distances(self):
        sp = SequenceSpace(RadiusRule.harmonic())
        self.assertEqual(seq_distance(sp, 3, 7), F(1, 3))
        self.assertEqual(seq_distance(sp, 5, 5), F(0))
        with self.assertRaises(UnknownPoint):
            seq_distance(sp, 0, 1)
        revalidate(seq_window(sp, 1, 8))

    def test_cauchy_harmonic(self):
        report = cauchy_no_limit_witness(SequenceSpace(RadiusRule.harmonic()), F(1, 10))
        self.assertEqual(report.index, 11)
        self.assertEqual(report.tail_diameter, F(1, 11))
        self.assertTrue(report.cauchy)
        self.assertTrue(report.no_limit)
        self.assertEqual(report.infima[2], (3, F(1, 3)))

    def test_cauchy_geometric(self):
        sp = SequenceSpace(HALF)
        self.assertEqual(cauchy_no_limit_witness(sp, F(1, 8)).index, 4)
        self.assertEqual(cauchy_no_limit_witness(sp, F(1, 10)).index, 4)
        self.assertEqual(cauchy_no_limit_witness(sp, F(1, 100)).index, 7)


class TestTelescope(unittest.TestCase):

    @classmethod
    def setUpClass(cls):
        cls.t = telescope_build(BlockRule("equidistant-growing", start_size=2), HALF)

    def test_distances(self):
        t = self.t
        self.assertEqual(t.block_labels(1), ("1.0", "1.1"))
        self.assertEqual(distance(t, "1.0", INF_LABEL), F(1, 2))
        self.assertEqual(distance(t, "1.0", "1.1"), F(1, 2))
        self.assertEqual(distance(t, "1.0", "2.1"), F(1, 2))
        self.assertEqual(distance(t, "3.0", "3.3"), F(1, 8))
        self.assertEqual(distance(t, "3.0", "3.0"), F(0))
        self.assertEqual(t.diameter(), F(1, 2))
        with self.assertRaises(UnknownPoint):
            t.distance("1.7", INF_LABEL)
        with self.assertRaises(UnknownPoint):
            t.distance("x", INF_LABEL)

    def test_prefixes(self):
        p1 = finite_prefix(self.t, 1)
        self.assertEqual(p1.points, ("1.0", "1.1", INF_LABEL))
        self.assertTrue(all(p1.d(a, b) == F(1, 2) for a, b in p1.label_pairs()))
        p3 = revalidate(finite_prefix(self.t, 3))
        self.assertEqual(len(p3), 2 + 3 + 4 + 1)
        p2 = finite_prefix(self.t, 2)
        self.assertEqual(restrict(p3, p2.points), p2)

    def test_cauchy_distances_settle_in_range_set(self):
        """d(n.0, y) is eventually constant, equal to d(inf, y) and in S"""
        t = self.t
        for k in range(1, 6):
            for y in t.block_labels(k):
                tail = [t.distance(f"{n}.0", y) for n in range(k + 1, k + 8)]
                self.assertEqual(len(set(tail)), 1, y)
                self.assertEqual(tail[0], t.distance(INF_LABEL, y))
                self.assertTrue(t.range_set.contains(tail[0]))

    def test_offset_shrinks_diameter(self):
        t = telescope_build(BlockRule("constant", size=3), HALF, offset=2)
        self.assertEqual(t.diameter(), F(1, 8))
        self.assertEqual(len(t.block_labels(5)), 3)

    def test_cycle_blocks_checked_lazily(self):
        small = validate("ab", [[0, F(1, 4)], [F(1, 4), 0]], GeometricGrid(F(2)))
        t = telescope_build(BlockRule("cycle", spaces=(small,)), HALF)
        revalidate(finite_prefix(t, 2))
        with self.assertRaises(DiameterViolation) as ctx:
            finite_prefix(t, 3)
        self.assertEqual(ctx.exception.block, 3)

    def test_radius_outside_range_set(self):
        with self.assertRaises(NotInRangeSet):
            telescope_build(BlockRule("constant"), RadiusRule.harmonic(), range_set=GeometricGrid(F(2)),
                            eager_blocks=3)

    def test_concurrent_block_checks(self):
        t = telescope_build(BlockRule("equidistant-growing"), RadiusRule.harmonic(), range_set=AllRationals())
        seen = []

        def worker():
            seen.append(tuple(len(t.block_labels(i)) for i in range(1, 40)))

        threads = [threading.Thread(target=worker) for _ in range(4)]
        for th in threads:
            th.start()
        for th in threads:
            th.join()
        self.assertEqual(len(set(seen)), 1, "threads saw different blocks")


if __name__ == "__main__":
    unittest.main()
