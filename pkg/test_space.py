import itertools
import random
import unittest
from fractions import Fraction as F

from SERVICE.errors import (
    DuplicateLabel, MalformedMatrix, NotInRangeSet, TooSmall, TriangleViolation, UnknownPoint, ZeroOffDiagonal,
)
from SERVICE.space_service import (
    INFINITY, FiniteUltrametricSpace, UltrametricPair, d_distance, diameter, dlps_space, isosceles_witness,
    pointwise_max, realized_values, relabel, restrict, same_space, sup_product, truncate, u_s_distance,
    ud_distance, ud_distance_scan, validate,
)
from SERVICE.values_service import AllRationals, ExplicitFinite, GeometricGrid
from tools.space_factory import random_range_set, random_ultrametric


def triangle(ab, ac, bc, S=None):
    return validate("abc", [[0, ab, ac], [ab, 0, bc], [ac, bc, 0]], S or AllRationals())


class TestValidate(unittest.TestCase):

    def test_valid_triangle(self):
        """1, 2, 2 is an ultrametric"""
        X = triangle(1, 2, 2)
        self.assertEqual(X.d("b", "c"), F(2))
        self.assertEqual(diameter(X), F(2))
        self.assertEqual(realized_values(X), (F(1), F(2)))

    def test_triangle_violation_witness(self):
        with self.assertRaises(TriangleViolation) as ctx:
            triangle(1, 3, 2)
        self.assertEqual(ctx.exception.triple, ("a", "c", "b"), "first violating triple in label order")
        self.assertEqual(ctx.exception.witness["d_xy"], "3")

    def test_value_outside_range_set(self):
        with self.assertRaises(NotInRangeSet) as ctx:
            validate("ab", [[0, 3], [3, 0]], ExplicitFinite((F(1), F(5))))
        self.assertEqual(ctx.exception.value, F(3))
        self.assertEqual(ctx.exception.pair, ("a", "b"))

    def test_shape_errors(self):
        with self.assertRaises(ZeroOffDiagonal):
            validate("ab", [[0, 0], [0, 0]], AllRationals())
        with self.assertRaises(MalformedMatrix):
            validate("ab", [[0, 1], [2, 0]], AllRationals())
        with self.assertRaises(MalformedMatrix):
            validate("ab", [[0, 1]], AllRationals())
        with self.assertRaises(MalformedMatrix):
            validate("ab", [[1, 1], [1, 0]], AllRationals())
        with self.assertRaises(DuplicateLabel):
            validate("aa", [[0, 1], [1, 0]], AllRationals())
        with self.assertRaises(MalformedMatrix):
            validate("ab", [[0, 0.5], [0.5, 0]], AllRationals())
        with self.assertRaises(MalformedMatrix):
            validate("ab", [[0, -1], [-1, 0]], AllRationals())
        self.assertEqual(validate("ab", [[0, "1/2"], ["1/2", 0]], AllRationals()).d("a", "b"), F(1, 2))

    def test_zero_checked_before_triangle(self):
        with self.assertRaises(ZeroOffDiagonal):
            validate("abc", [[0, 0, 5], [0, 0, 1], [5, 1, 0]], AllRationals())

    def test_singleton_and_empty(self):
        self.assertEqual(len(validate(["x"], [[0]], AllRationals())), 1)
        self.assertEqual(len(validate([], [], AllRationals())), 0)

    def test_unknown_point(self):
        with self.assertRaises(UnknownPoint):
            triangle(1, 2, 2).d("a", "z")


class TestConstructions(unittest.TestCase):

    def test_dlps_space(self):
        X = dlps_space(ExplicitFinite((F(1), F(3))))
        self.assertEqual(X.points, ("0", "1", "3"))
        self.assertEqual(X.d("1", "3"), F(3))
        self.assertEqual(X.d("0", "1"), F(1))
        validate(X.points, X.dist, X.range_set)
        self.assertEqual(len(dlps_space(ExplicitFinite(()))), 1)

    def test_truncate(self):
        X = triangle(1, 4, 4)
        T = truncate(X, F(2))
        self.assertEqual([T.d("a", "b"), T.d("a", "c"), T.d("b", "c")], [F(1), F(2), F(2)])
        validate(T.points, T.dist, T.range_set)
        with self.assertRaises(NotInRangeSet):
            truncate(triangle(1, 4, 4, ExplicitFinite((F(1), F(4)))), F(2))

    def test_sup_product(self):
        X = validate("ab", [[0, 1], [1, 0]], AllRationals())
        Y = validate("cd", [[0, 3], [3, 0]], AllRationals())
        P = sup_product(X, Y)
        self.assertEqual(len(P), 4)
        self.assertEqual(P.d("(a,c)", "(b,d)"), F(3))
        self.assertEqual(P.d("(a,c)", "(b,c)"), F(1))
        validate(P.points, P.dist, P.range_set)

    def test_restrict_and_relabel(self):
        X = triangle(1, 2, 2)
        R = restrict(X, ["c", "a"])
        self.assertEqual(R.points, ("c", "a"))
        self.assertEqual(R.d("a", "c"), F(2))
        with self.assertRaises(TooSmall):
            restrict(X, [])
        Y = relabel(X, {"a": "z"})
        self.assertEqual(Y.d("z", "b"), F(1))
        with self.assertRaises(DuplicateLabel):
            relabel(X, {"a": "b"})

    def test_isosceles(self):
        self.assertIsNone(isosceles_witness(triangle(1, 2, 2)))
        broken = FiniteUltrametricSpace(("a", "b", "c"), [[0, 1, 3], [1, 0, 2], [3, 2, 0]])
        self.assertEqual(isosceles_witness(broken), ("a", "b", "c"))

    def test_random_spaces_validate(self):
        """cluster-merge spaces are ultrametric and isosceles"""
        rng = random.Random(11)
        for _ in range(200):
            S = random_range_set(rng)
            X = random_ultrametric(rng, rng.randint(1, 8), S)
            validate(X.points, X.dist, S)
            self.assertIsNone(isosceles_witness(X))


class TestDistances(unittest.TestCase):

    def test_ud_examples(self):
        d = validate("ab", [[0, 1], [1, 0]], AllRationals())
        e = validate("ab", [[0, 3], [3, 0]], AllRationals())
        pair = UltrametricPair.of(d, e)
        self.assertEqual(ud_distance(pair), F(3))
        self.assertEqual(d_distance(pair), F(2))
        pair = UltrametricPair.of(triangle(1, 2, 2), triangle(1, 5, 5))
        self.assertEqual(ud_distance(pair), F(5))
        self.assertEqual(d_distance(pair), F(3))
        self.assertEqual(ud_distance(UltrametricPair.of(d, d)), F(0))

    def test_pair_reorders_points(self):
        d = triangle(1, 2, 2)
        e = restrict(triangle(1, 5, 5), ["c", "b", "a"])
        self.assertEqual(ud_distance(UltrametricPair.of(d, e)), F(5))
        with self.assertRaises(UnknownPoint):
            UltrametricPair.of(d, validate("ab", [[0, 1], [1, 0]], AllRationals()))

    def test_scan_agrees_with_closed_form(self):
        rng = random.Random(5)
        for _ in range(200):
            S = random_range_set(rng)
            n = rng.randint(1, 6)
            d = random_ultrametric(rng, n, S)
            e = random_ultrametric(rng, n, S)
            pair = UltrametricPair.of(d, e)
            self.assertEqual(ud_distance_scan(pair), ud_distance(pair), f"scan differs on {d} / {e}")

    def test_ud_is_an_ultrametric_on_spaces(self):
        rng = random.Random(8)
        S = GeometricGrid(F(2), -4, 4)
        for _ in range(60):
            spaces = [random_ultrametric(rng, 4, S) for _ in range(3)]
            for a, b, c in itertools.permutations(spaces, 3):
                ab = ud_distance(UltrametricPair.of(a, b))
                self.assertLessEqual(ab, max(ud_distance(UltrametricPair.of(a, c)),
                                             ud_distance(UltrametricPair.of(c, b))))

    def test_u_s_distance(self):
        self.assertEqual(u_s_distance(F(2), F(2)), F(0))
        self.assertEqual(u_s_distance(F(1), F(3)), F(3))
        rng = random.Random(17)
        for _ in range(300):
            x, y, z = (F(rng.randint(0, 6), rng.randint(1, 3)) for _ in range(3))
            self.assertLessEqual(u_s_distance(x, z), max(u_s_distance(x, y), u_s_distance(y, z)))
            self.assertEqual(u_s_distance(x, y), u_s_distance(y, x))

    def test_d_distance_below_ud(self):
        rng = random.Random(23)
        for _ in range(200):
            S = random_range_set(rng)
            n = rng.randint(1, 7)
            pair = UltrametricPair.of(random_ultrametric(rng, n, S), random_ultrametric(rng, n, S))
            self.assertLessEqual(d_distance(pair), ud_distance(pair))

    def test_pointwise_max(self):
        M = pointwise_max(triangle(1, 2, 2), triangle(3, 3, 1))
        self.assertEqual([M.d("a", "b"), M.d("a", "c"), M.d("b", "c")], [F(3), F(3), F(2)])
        validate(M.points, M.dist, M.range_set)
        self.assertTrue(same_space(M, restrict(M, ["b", "c", "a"])))
        rng = random.Random(29)
        for _ in range(200):
            S = random_range_set(rng)
            n = rng.randint(1, 7)
            X, Y = random_ultrametric(rng, n, S), random_ultrametric(rng, n, S)
            M = pointwise_max(X, Y)
            validate(M.points, M.dist, S)
            for i, j in X.pairs():
                self.assertEqual(M.dist[i][j], max(X.dist[i][j], Y.dist[i][j]))

    def test_infinity_orders_last(self):
        self.assertLess(F(10) ** 9, INFINITY)
        self.assertEqual(str(INFINITY), "inf")
        self.assertEqual(max(F(3), INFINITY), INFINITY)


if __name__ == "__main__":
    unittest.main()
