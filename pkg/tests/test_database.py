"""Database generation, persistence and the brute-force oracle."""

import os
import tempfile
import unittest

import numpy as np

from mcp_pfr.database import Database, DecodedStream, db_generate, db_oracle
from mcp_pfr.errors import FieldError, ValidationError
from mcp_pfr.field import field_make

W1 = [1, 0, 1, 1, 0, 0, 1, 0]
W2 = [0, 1, 1, 0, 1, 0, 0, 1]


def example_db() -> Database:
    """Two 8-layer binary files with one element per layer."""
    cells = np.array([W1, W2], dtype=np.int64)[:, :, None]
    return Database(field_make(2), cells)


class TestDatabase(unittest.TestCase):

    def test_shape_accessors(self):
        db = example_db()
        self.assertEqual((db.K, db.L, db.S), (2, 8, 1))
        self.assertEqual(db.file(2).values[:, 0].tolist(), W2)

    def test_cells_are_read_only(self):
        db = example_db()
        with self.assertRaises(ValueError):
            db.cells[0, 0, 0] = 1

    def test_rejects_out_of_field_cells(self):
        with self.assertRaises(FieldError):
            Database(field_make(2), np.full((1, 2, 1), 2, dtype=np.int64))

    def test_rejects_bad_shape(self):
        with self.assertRaises(ValidationError):
            Database(field_make(2), np.zeros((2, 8), dtype=np.int64))
        with self.assertRaises(ValidationError):
            Database(field_make(2), np.zeros((2, 0, 1), dtype=np.int64))


class TestGenerate(unittest.TestCase):

    def test_reproducible(self):
        f = field_make(2)
        a = db_generate(f, 2, 8, 1, seed=7)
        b = db_generate(f, 2, 8, 1, seed=7)
        self.assertEqual(a, b)
        self.assertEqual(a.cells.size, 16)
        self.assertEqual(a.digest(), b.digest())

    def test_dimensions(self):
        db = db_generate(field_make(3), 2, 132, 4, seed=1)
        self.assertEqual(db.cells.size, 1056)
        self.assertTrue(0 <= db.cells.min() and db.cells.max() < 3)

    def test_seeds_differ(self):
        f = field_make(5)
        self.assertNotEqual(db_generate(f, 3, 20, 4, seed=1), db_generate(f, 3, 20, 4, seed=2))

    def test_rejects_empty_dimensions(self):
        for K, L, S in ((2, 0, 1), (0, 4, 1), (2, 4, 0)):
            with self.assertRaises(ValidationError):
                db_generate(field_make(2), K, L, S, seed=1)


class TestOracle(unittest.TestCase):

    def test_xor_example(self):
        out = db_oracle(example_db(), (1, 1))
        self.assertEqual(out.values[:, 0].tolist(), [1, 1, 0, 1, 1, 0, 1, 1])

    def test_unit_vectors_copy_files(self):
        db = db_generate(field_make(3), 3, 10, 2, seed=4)
        for k in range(1, 4):
            e = tuple(int(i == k - 1) for i in range(3))
            self.assertEqual(db_oracle(db, e), db.file(k))

    def test_wrong_length(self):
        with self.assertRaises(ValidationError):
            db_oracle(example_db(), (1, 1, 0))

    def test_linearity(self):
        f = field_make(5)
        db = db_generate(f, 3, 12, 3, seed=9)
        rng = np.random.default_rng(3)
        for _ in range(20):
            a, b = (int(x) for x in rng.integers(0, 5, 2))
            u = tuple(int(x) for x in rng.integers(0, 5, 3))
            v = tuple(int(x) for x in rng.integers(0, 5, 3))
            combo = tuple(int(x) for x in f.array(u) * a + f.array(v) * b)
            lhs = db_oracle(db, combo).values
            rhs = f.array(db_oracle(db, u).values) * a + f.array(db_oracle(db, v).values) * b
            np.testing.assert_array_equal(lhs, np.asarray(rhs, dtype=np.int64))

    def test_stream_equality_and_digest(self):
        a = DecodedStream(np.array([[1], [0]]))
        b = DecodedStream(np.array([[1], [0]]))
        self.assertEqual(a, b)
        self.assertEqual(a.digest(), b.digest())
        self.assertNotEqual(a, DecodedStream(np.array([[0], [1]])))
        with self.assertRaises(ValidationError):
            DecodedStream(np.array([1, 0]))


class TestPersistence(unittest.TestCase):

    def test_roundtrip_bytes(self):
        for p, m in ((2, 1), (3, 1), (2, 4), (3, 2)):
            db = db_generate(field_make(p, m), 3, 7, 5, seed=p * 10 + m)
            data = db.to_bytes()
            self.assertEqual(data[:4], b"PFRD")
            back = Database.from_bytes(data)
            self.assertEqual(back, db)
            self.assertEqual(back.to_bytes(), data)

    def test_roundtrip_file(self):
        db = db_generate(field_make(3), 2, 132, 4, seed=1)
        with tempfile.TemporaryDirectory() as tmp:
            path = db.save(os.path.join(tmp, "db.pfrd"))
            self.assertEqual(Database.load(path), db)

    def test_rejects_bad_files(self):
        data = example_db().to_bytes()
        with self.assertRaises(ValidationError):
            Database.from_bytes(b"XXXX" + data[4:])
        with self.assertRaises(ValidationError):
            Database.from_bytes(data[:-1])
        with self.assertRaises(ValidationError):
            Database.from_bytes(data[:5])
        with self.assertRaises(ValidationError):
            Database.from_bytes(data[:4] + b"\x09" + data[5:])


if __name__ == "__main__":
    unittest.main()
