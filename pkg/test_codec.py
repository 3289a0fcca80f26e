import json
import random
import unittest
from fractions import Fraction as F

from DAL import codec
from DAL.json_store import JsonStore, digest
from SERVICE.embed_service import embed_finite
from SERVICE.errors import MalformedMatrix
from SERVICE.values_service import GeometricGrid
from tools.space_factory import random_range_set, random_ultrametric


class TestCodec(unittest.TestCase):

    @classmethod
    def setUpClass(cls):
        cls.store = JsonStore({"indent": 2})

    def test_spaces_survive_json(self):
        """space -> JSON text -> space gives back the same exact matrix and range set"""
        rng = random.Random(3)
        for _ in range(100):
            X = random_ultrametric(rng, rng.randint(1, 7), random_range_set(rng))
            back = codec.space_from_json(json.loads(self.store.dumps(codec.space_to_json(X))))
            self.assertEqual(back, X)

    def test_vectors_survive_json(self):
        X = random_ultrametric(random.Random(9), 5, GeometricGrid(F(2), -4, 4))
        for f in embed_finite(X).images.values():
            self.assertEqual(codec.vector_from_json(json.loads(json.dumps(codec.vector_to_json(f)))), f)

    def test_same_input_same_digest(self):
        X = random_ultrametric(random.Random(12), 6, GeometricGrid(F(3)))
        first = self.store.dumps(codec.space_to_json(X))
        second = self.store.dumps(codec.space_to_json(codec.space_from_json(json.loads(first))))
        self.assertEqual(first, second)
        self.assertEqual(self.store.read(first)[1], self.store.read(second)[1])
        self.assertEqual(self.store.read(first)[1], digest(first))
        self.assertEqual(len(digest(first)), 64)

    def test_inexact_values_rejected(self):
        for bad in (0.5, "0.5", "1e3", "-2"):
            with self.assertRaises(MalformedMatrix):
                codec.value_from_json(bad)
        self.assertEqual(codec.value_from_json("3/6"), F(1, 2))


if __name__ == "__main__":
    unittest.main()
