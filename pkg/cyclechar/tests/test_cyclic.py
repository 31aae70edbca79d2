import unittest

import numpy as np

from cyclechar import cyclic
from cyclechar.cyclic import (BBCochain, KClass, basis_tuples, bb, chern_idempotent, chern_unitary,
                              cyclic_group_algebra, diagonal_algebra, dual_numbers, hochschild_b, matrix_algebra,
                              pair, random_cochain, reduced_check, residual_report, shift_S, strict_upper, tensor,
                              unitize)
from cyclechar.errors import BackendMismatchError, ConventionError, ExactnessError


class TestAlgebras(unittest.TestCase):
    def test_matrix_algebra(self):
        A = matrix_algebra(2)
        E01, E10 = A.basis_vector(1), A.basis_vector(2)
        self.assertTrue(A.is_zero(A.mul(E01, E10) - A.basis_vector(0)))
        self.assertTrue(A.is_zero(A.mul(A.unit(), E10) - E10))
        self.assertEqual(A.represent(E01)[0, 1], 1)

    def test_non_associative_structure_rejected(self):
        c = np.zeros((2, 2, 2), dtype=object)
        c[1, 1, 0] = 1
        c[0, 1, 1] = 1
        with self.assertRaises(ConventionError):
            cyclic.FiniteAlgebra(c, "exact", None, None, None, "broken")

    def test_unitize(self):
        N = strict_upper(3)
        self.assertFalse(N.unital)
        P = unitize(N)
        self.assertEqual(P.dim, N.dim + 1)
        self.assertEqual(P.unit_index, 0)
        self.assertTrue(P.is_zero(P.mul(P.basis_vector(0), P.basis_vector(2)) - P.basis_vector(2)))

    def test_tensor(self):
        T = tensor(diagonal_algebra(2), dual_numbers())
        self.assertEqual(T.dim, 4)
        self.assertTrue(T.unital)
        with self.assertRaises(BackendMismatchError):
            tensor(diagonal_algebra(2), diagonal_algebra(2, "float"))

    def test_group_algebra_star(self):
        A = cyclic_group_algebra(3)
        g = A.basis_vector(1)
        self.assertTrue(A.is_zero(A.mul(g, A.star(g)) - A.unit()))


class TestBicomplex(unittest.TestCase):
    def setUp(self):
        self.A = matrix_algebra(2)
        self.rng = np.random.default_rng(1)

    def test_b_squared(self):
        phi = random_cochain(self.A, 1, self.rng)
        bbphi = hochschild_b(hochschild_b(phi))
        report = residual_report(BBCochain(self.A, 3, {3: bbphi}), label="b^2")
        self.assertEqual(report.max_residual, 0.0)
        self.assertTrue(report.exhaustive)

    def test_total_differential_squares_to_zero(self):
        phi = BBCochain(self.A, 2, {0: random_cochain(self.A, 0, self.rng),
                                    2: random_cochain(self.A, 2, self.rng, normalized=True)})
        report = residual_report(bb(bb(phi)), label="(b+B)^2")
        self.assertTrue(report.passed)
        self.assertTrue(report.exact_zero)

    def test_component_parity(self):
        with self.assertRaises(ConventionError):
            BBCochain(self.A, 2, {1: random_cochain(self.A, 1, self.rng)})

    def test_shift(self):
        phi = BBCochain(self.A, 1, {1: random_cochain(self.A, 1, self.rng)})
        S = shift_S(phi)
        self.assertEqual(S.degree, 3)
        self.assertEqual(S.component(1).on_basis((1, 2)), phi.component(1).on_basis((1, 2)))

    def test_lazy_matches_dense(self):
        phi = random_cochain(self.A, 1, self.rng)
        lazy = phi.lazy()
        for idx in [(0, 0), (1, 2), (3, 3)]:
            self.assertEqual(lazy.on_basis(idx), phi.on_basis(idx))

    def test_sampling_over_budget(self):
        tuples, exhaustive = basis_tuples(10, 4, budget=100, samples=7, seed=3)
        self.assertFalse(exhaustive)
        self.assertEqual(len(tuples), 7)
        self.assertEqual(tuples, basis_tuples(10, 4, budget=100, samples=7, seed=3)[0])


class TestPairing(unittest.TestCase):
    def test_trace_pairs_with_rank(self):
        A = matrix_algebra(2)
        tr = cyclic.Cochain(A, 0, lambda a: A.kernel.trace(A.represent(a[0])))
        phi = BBCochain(A, 0, {0: tr})
        E00 = A.basis_vector(0)
        e = KClass.idempotent(A, [[E00]])
        self.assertEqual(pair(phi, chern_idempotent(e)), A.kernel.one())

    def test_parity_mismatch(self):
        A = matrix_algebra(1)
        phi = BBCochain(A, 1, {1: random_cochain(A, 1, np.random.default_rng(0))})
        with self.assertRaises(ConventionError):
            pair(phi, chern_idempotent(KClass.idempotent(A, [[A.unit()]])))

    def test_not_idempotent(self):
        A = matrix_algebra(2)
        with self.assertRaises(ConventionError):
            KClass.idempotent(A, [[A.basis_vector(1)]])

    def test_odd_character_needs_float(self):
        A = cyclic_group_algebra(3)
        u = KClass.unitary(A, [[A.basis_vector(1)]])
        with self.assertRaises(ExactnessError):
            chern_unitary(u)


class TestReduced(unittest.TestCase):
    def test_normalized_cochain_is_reduced(self):
        P = unitize(strict_upper(2))
        rng = np.random.default_rng(4)
        phi = BBCochain(P, 2, {2: random_cochain(P, 2, rng, normalized=True)})
        self.assertTrue(reduced_check(phi).passed)
        raw = BBCochain(P, 2, {2: random_cochain(P, 2, rng)})
        self.assertFalse(reduced_check(raw).passed)

    def test_needs_unitization(self):
        A = matrix_algebra(1)
        with self.assertRaises(ConventionError):
            reduced_check(BBCochain(A, 0, {0: random_cochain(A, 0, np.random.default_rng(0))}))


class TestSignInjection(unittest.TestCase):
    def tearDown(self):
        cyclic.set_sign_injection(False)

    def test_convention_record(self):
        self.assertEqual(cyclic.conventions()["B_sign"], 1)
        cyclic.set_sign_injection(True)
        self.assertEqual(cyclic.conventions()["B_sign"], -1)


if __name__ == "__main__":
    unittest.main()
