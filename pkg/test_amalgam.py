import random
import unittest
from fractions import Fraction as F

from SERVICE.amalgam_service import (
    amalgam_disjoint, copy_amalgam, family_amalgam, glue_over_intersection, key_amalgam, one_point_extend,
)
from SERVICE.errors import BoundViolation, DisjointnessViolation, DuplicateLabel, HypothesisViolation
from SERVICE.space_service import diameter, restrict, revalidate, singleton, validate
from SERVICE.values_service import AllRationals
from tools.space_factory import random_family, random_range_set, random_ultrametric, sample_values

Q = AllRationals()


def pair_space(a, b, value):
    return validate([a, b], [[0, value], [value, 0]], Q)


class TestDisjointAmalgams(unittest.TestCase):

    def test_two_singletons(self):
        h = amalgam_disjoint(singleton("a", Q), singleton("b", Q), F(2)).space
        self.assertEqual(h.d("a", "b"), F(2))

    def test_cross_distances_use_base_points(self):
        h = amalgam_disjoint(pair_space("a", "b", F(5)), singleton("c", Q), F(1)).space
        self.assertEqual(h.d("a", "c"), F(1))
        self.assertEqual(h.d("b", "c"), F(5))
        revalidate(h)

    def test_one_point_extend(self):
        h = one_point_extend(pair_space("a", "b", F(3)), "o", F(1)).space
        self.assertEqual(h.d("a", "o"), F(1))
        self.assertEqual(h.d("b", "o"), F(3))
        with self.assertRaises(DuplicateLabel):
            one_point_extend(pair_space("a", "b", F(3)), "a", F(1))

    def test_family_amalgam(self):
        h = family_amalgam([singleton(p, Q) for p in "xyz"], F(1)).space
        self.assertEqual(h.points, ("x", "y", "z"))
        self.assertTrue(all(h.d(a, b) == 1 for a, b in h.label_pairs()))
        X = pair_space("a", "b", F(2))
        self.assertEqual(family_amalgam([X], F(1)).space, X)


class TestGlue(unittest.TestCase):

    def test_glue_examples(self):
        h = glue_over_intersection(pair_space("z", "x", F(1)), pair_space("z", "y", F(3)), F(1)).space
        self.assertEqual(h.d("x", "y"), F(3))
        h = glue_over_intersection(pair_space("z", "x", F(1)), pair_space("z", "y", F(1)), F(1)).space
        self.assertEqual(h.d("x", "y"), F(1))
        revalidate(h)

    def test_glue_over_whole_space(self):
        X = pair_space("z", "x", F(1))
        h = glue_over_intersection(X, singleton("z", Q), F(1)).space
        self.assertEqual(h, X)

    def test_glue_hypotheses(self):
        with self.assertRaises(HypothesisViolation) as ctx:
            glue_over_intersection(pair_space("z", "w", F(1)), pair_space("z", "w", F(2)), F(1))
        self.assertEqual(ctx.exception.which, "agreement")
        with self.assertRaises(HypothesisViolation) as ctx:
            glue_over_intersection(pair_space("z", "x", F(2)), pair_space("z", "y", F(1)), F(1))
        self.assertEqual(ctx.exception.which, "equidistance")
        with self.assertRaises(HypothesisViolation) as ctx:
            glue_over_intersection(singleton("a", Q), singleton("b", Q), F(1))
        self.assertEqual(ctx.exception.which, "nonempty")


class TestCopyAmalgam(unittest.TestCase):

    def test_copy_example(self):
        res = copy_amalgam(pair_space("a", "b", F(1)), pair_space("a", "b", F(3)), F(3))
        h = res.space
        self.assertEqual(res.copy_map, {"a": "a'", "b": "b'"})
        self.assertEqual(h.d("a", "b'"), F(3))
        self.assertEqual(h.d("a", "a'"), F(3))
        self.assertEqual(h.d("a'", "b'"), F(3))
        revalidate(h)

    def test_copy_bound(self):
        with self.assertRaises(BoundViolation):
            copy_amalgam(pair_space("a", "b", F(1)), pair_space("a", "b", F(3)), F(2))

    def test_copy_of_same_metric(self):
        X = validate("abc", [[0, 1, 4], [1, 0, 4], [4, 4, 0]], Q)
        h = copy_amalgam(X, X, F(2)).space
        for x in X.points:
            for y in X.points:
                self.assertEqual(h.d(x, y + "'"), max(X.d(x, y), F(2)))

    def test_copy_of_singleton(self):
        h = copy_amalgam(singleton("a", Q), singleton("a", Q), F(1)).space
        self.assertEqual(h.points, ("a", "a'"))
        self.assertEqual(h.d("a", "a'"), F(1))

    def test_copy_avoids_taken_labels(self):
        res = copy_amalgam(singleton("a", Q), singleton("a", Q), F(1), taken=["a'"])
        self.assertEqual(res.copy_map["a"], "a''")


class TestKeyAmalgam(unittest.TestCase):

    def test_five_point_example(self):
        X = validate("abc", [[0, 1, 2], [1, 0, 2], [2, 2, 0]], Q)
        e = pair_space("a", "b", F(4))
        res = key_amalgam(X, [(("a", "b"), e)], F(4))
        h = res.space
        self.assertEqual(len(h), 5)
        self.assertEqual(h.d("a'", "b'"), F(4))
        self.assertEqual(h.d("a", "a'"), F(4))
        self.assertEqual(h.d("a", "c"), F(2))
        revalidate(h)

    def test_empty_family(self):
        X = pair_space("a", "b", F(1))
        self.assertEqual(key_amalgam(X, [], F(1)).space, X)

    def test_overlapping_family(self):
        X = validate("abc", [[0, 1, 2], [1, 0, 2], [2, 2, 0]], Q)
        family = [(("a", "b"), pair_space("a", "b", F(1))), (("b", "c"), pair_space("b", "c", F(2)))]
        with self.assertRaises(DisjointnessViolation):
            key_amalgam(X, family, F(2))


class TestRandomAmalgams(unittest.TestCase):
    """Every amalgam of random inputs validates and keeps its pieces isometric."""

    @classmethod
    def setUpClass(cls):
        cls.rng = random.Random(2024)

    def _space(self, S, prefix):
        return random_ultrametric(self.rng, self.rng.randint(1, 5), S, prefix)

    def test_random_disjoint_and_glue(self):
        for _ in range(150):
            S = random_range_set(self.rng)
            X, Y = self._space(S, "x"), self._space(S, "y")
            r = sample_values(self.rng, S, 1)[0]
            h = revalidate(amalgam_disjoint(X, Y, r).space)
            self.assertEqual(restrict(h, X.points), X)
            self.assertEqual(restrict(h, Y.points), Y)
            s = sample_values(self.rng, S, 1)[0]
            ext = one_point_extend(X, "o", s).space
            piece = one_point_extend(singleton(X.points[0], S), "q", s).space
            glued = revalidate(glue_over_intersection(piece, ext, s).space)
            self.assertEqual(restrict(glued, ext.points), ext)

    def test_random_copy_and_key(self):
        for _ in range(150):
            S = random_range_set(self.rng)
            X = self._space(S, "p")
            family = random_family(self.rng, X)
            top = max([diameter(X)] + [diameter(e) for _, e in family])
            if top == 0:
                continue
            eta = S.round_up(top)
            subset, e = family[0]
            copy = revalidate(copy_amalgam(restrict(X, subset), e, eta).space)
            self.assertEqual(len(copy), 2 * len(subset))
            h = revalidate(key_amalgam(X, family, eta).space)
            self.assertEqual(restrict(h, X.points), X)


if __name__ == "__main__":
    unittest.main()
