"""Two-server binary scheme: planning shape, decoding against the oracle, counts."""

import unittest
from collections import Counter
from fractions import Fraction

import numpy as np

from mcp_pfr.database import db_generate, db_oracle
from mcp_pfr.engine import answer_query
from mcp_pfr.errors import DecodeError, ValidationError
from mcp_pfr.field import field_make
from mcp_pfr.messages import Answer
from mcp_pfr.projspace import enum_canonical, theta_vector
from mcp_pfr.rates import binary_capacity
from mcp_pfr.scheme_binary import DIRECT, PAIR, PHASE1, binary_layers, decode_binary, plan_binary
from tests.test_database import example_db


def run(db, K, theta, seed):
    q1, q2, plan = plan_binary(K, theta, seed)
    return decode_binary(plan, answer_query(db, q1), answer_query(db, q2))


class TestPlanBinary(unittest.TestCase):

    def test_request_counts(self):
        for K, expected in ((1, 2), (2, 6), (3, 14)):
            for theta in range(1, 2**K):
                q1, q2, plan = plan_binary(K, theta, seed=theta)
                self.assertEqual(len(q1.requests), expected)
                self.assertEqual(len(q2.requests), expected)
                self.assertEqual(plan.L, binary_layers(K))
                self.assertEqual(plan.request_counts, [expected, expected])

    def test_k1_degenerate(self):
        q1, q2, plan = plan_binary(1, 1, seed=0)
        self.assertEqual(plan.L, 4)
        self.assertEqual([r.coeffs for r in q1.requests], [((1,),), ((1,),)])

    def test_every_vector_requested_twice(self):
        for K in (2, 3, 4):
            vectors = enum_canonical(2, K)
            for theta in range(1, 2**K):
                for query in plan_binary(K, theta, seed=5)[:2]:
                    counts = Counter(r.coeffs[0] for r in query.requests)
                    self.assertEqual(counts, Counter({v: 2 for v in vectors}))

    def test_k2_theta1_coefficients(self):
        q1, _, _ = plan_binary(2, 1, seed=3)
        counts = Counter(r.coeffs[0] for r in q1.requests)
        self.assertEqual(counts, Counter({(0, 1): 2, (1, 0): 2, (1, 1): 2}))

    def test_single_term_distinct_layers(self):
        for K in (1, 2, 3, 4):
            q1, q2, plan = plan_binary(K, 1, seed=K)
            for query in (q1, q2):
                self.assertTrue(all(len(r.layers) == 1 for r in query.requests))
                touched = query.layers_touched()
                self.assertEqual(len(touched), 2 ** (K + 1) - 2)
                self.assertTrue(touched <= set(range(1, plan.L + 1)))

    def test_layer_permutation_is_valid(self):
        _, _, plan = plan_binary(3, 5, seed=1)
        self.assertEqual(sorted(plan.layer_perm), list(range(1, 17)))

    def test_identity_layout_without_randomness(self):
        K, theta = 2, 2
        q1, q2, plan = plan_binary(K, theta, randomize=False)
        n = 2**K - 1
        self.assertEqual(plan.layer_perm, tuple(range(1, plan.L + 1)))
        roles = [p.role for p in plan.provenance[0]]
        self.assertEqual(roles, [PHASE1] * n + [DIRECT] + [PAIR] * (n - 1))
        self.assertEqual([r.layers[0] for r in q1.requests[:n]], list(range(1, n + 1)))
        self.assertEqual(q1.requests[n].layers, (2 * n + 1,))
        self.assertEqual(q2.requests[n].layers, (2 * n + 2,))

    def test_seed_determinism(self):
        a = plan_binary(3, 4, seed=99)
        b = plan_binary(3, 4, seed=99)
        self.assertEqual(a[0], b[0])
        self.assertEqual(a[1], b[1])
        self.assertEqual(a[2].layer_perm, b[2].layer_perm)

    def test_invalid_arguments(self):
        with self.assertRaises(ValidationError):
            plan_binary(2, 4)
        with self.assertRaises(ValidationError):
            plan_binary(2, 0)
        with self.assertRaises(ValidationError):
            plan_binary(0, 1)
        with self.assertRaises(ValidationError):
            plan_binary(2, 1, mutation="swap_servers")

    def test_mutations_change_request_counts(self):
        q1, _, _ = plan_binary(3, 2, seed=1, mutation="drop_pairs")
        self.assertEqual(len(q1.requests), 8)
        q1, _, _ = plan_binary(3, 2, seed=1, mutation="drop_direct")
        self.assertEqual(len(q1.requests), 13)

    def test_planned_rate_equals_capacity(self):
        for K in range(1, 11):
            q1, q2, plan = plan_binary(K, 1, seed=K)
            Q = len(q1.requests) + len(q2.requests)
            self.assertEqual(Q, 4 * (2**K - 1))
            self.assertEqual(Fraction(plan.L, Q), binary_capacity(K))


class TestDecodeBinary(unittest.TestCase):

    def test_example_database(self):
        db = example_db()
        out = run(db, 2, 3, seed=17)
        self.assertEqual(out.values[:, 0].tolist(), [1, 1, 0, 1, 1, 0, 1, 1])

    def test_unit_vector_retrieves_file(self):
        db = db_generate(field_make(2), 3, 16, 4, seed=2)
        for k in range(1, 4):
            e = tuple(int(i == k - 1) for i in range(3))
            theta = enum_canonical(2, 3).index(e) + 1
            self.assertEqual(run(db, 3, theta, seed=k), db.file(k))

    def test_matches_oracle(self):
        f = field_make(2)
        for K in (1, 2, 3, 4):
            for theta in range(1, 2**K):
                v = theta_vector(theta, 2, K)
                for trial in range(20):
                    db = db_generate(f, K, 2 ** (K + 1), 4, seed=1000 * K + 50 * theta + trial)
                    self.assertEqual(run(db, K, theta, seed=trial), db_oracle(db, v), f"K={K} theta={theta}")

    def test_misaligned_answers(self):
        db = db_generate(field_make(2), 2, 8, 2, seed=1)
        q1, q2, plan = plan_binary(2, 1, seed=1)
        a1, a2 = answer_query(db, q1), answer_query(db, q2)
        with self.assertRaises(DecodeError):
            decode_binary(plan, a1, Answer(a2.values[:-1]))
        with self.assertRaises(DecodeError):
            decode_binary(plan, a1, Answer(np.zeros((6, 3), dtype=np.int64)))

    def test_missing_role_is_a_decode_error(self):
        db = db_generate(field_make(2), 2, 8, 2, seed=1)
        q1, q2, plan = plan_binary(2, 1, seed=1, mutation="drop_direct")
        with self.assertRaises(DecodeError):
            decode_binary(plan, answer_query(db, q1), answer_query(db, q2))


if __name__ == "__main__":
    unittest.main()
