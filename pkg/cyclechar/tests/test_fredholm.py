import unittest

import numpy as np

from cyclechar.cyclic import compare, is_bb_cocycle, matrix_algebra, represented
from cyclechar.errors import AmbiguityError, ConventionError, ExactnessError
from cyclechar.fredholm import (OperatorHomotopy, amplify, ch_even, ch_odd, commuting_pairing, connes_homotopy,
                                cross_check_transgression, fredholm_index, index_pairing, module_trace, odd_module,
                                omega_character, prime_module, random_even_module, random_odd_module, random_unitary,
                                rank_one_module, sf_pairing, spectral_flow, tilde_module, transgression_even,
                                transgression_odd, unit_class, unitary_spectral_flow, verify_theorem_coin,
                                verify_transgression, winding_reference)
from cyclechar.scalars import get_kernel

HOMOTOPY = [[0, 0, 0], [0, 0, 0.5], [0, 0.5, 0]]


class TestRankOne(unittest.TestCase):
    def test_index(self):
        M = rank_one_module()
        result = fredholm_index(M, unit_class(M))
        self.assertEqual(result.index, 1)
        self.assertEqual((result.plus_dim, result.minus_dim), (2, 1))
        self.assertEqual((result.kernel_dim, result.cokernel_dim), (1, 0))

    def test_pairing_matches_index(self):
        M = rank_one_module("float")
        for m in (1, 2):
            self.assertAlmostEqual(abs(complex(index_pairing(M, unit_class(M), m)) - 1), 0.0, places=9)

    def test_character_routes_agree(self):
        M = rank_one_module()
        ch = ch_even(M, 1)
        self.assertTrue(compare(omega_character(M, 1), ch).passed)
        self.assertTrue(is_bb_cocycle(ch).passed)

    def test_odd_module_has_no_index(self):
        M = rank_one_module()
        with self.assertRaises(ConventionError):
            fredholm_index(odd_module(M.algebra, M.F), unit_class(M))


class TestRandomModules(unittest.TestCase):
    def setUp(self):
        self.rng = np.random.default_rng(12)

    def test_index_pairing(self):
        for r in (1, 2):
            M = random_even_module(self.rng, r, 2, 1, scale=0.5)
            e = unit_class(M)
            index = fredholm_index(M, e).index
            self.assertEqual(index, r)
            self.assertLess(abs(complex(index_pairing(M, e, 1)) - index), 1e-8)

    def test_spectral_flow_vanishes_in_finite_dimensions(self):
        M = random_odd_module(self.rng, 2, 2)
        u = random_unitary(self.rng, M.algebra)
        self.assertEqual(unitary_spectral_flow(M, u).value, 0)
        self.assertLess(abs(sf_pairing(M, u, 0)), 1e-8)

    def test_odd_character_is_a_cocycle(self):
        M = random_odd_module(self.rng, 2, 2)
        ch = ch_odd(M, 1)
        self.assertEqual(ch.degree, 3)
        self.assertTrue(is_bb_cocycle(ch, 1e-8).passed)
        with self.assertRaises(ConventionError):
            ch_odd(rank_one_module("float"), 1)


class TestSpectralFlow(unittest.TestCase):
    def test_single_crossing(self):
        path = OperatorHomotopy.linear(np.diag([-1.0, 2.0]), np.diag([1.0, 2.0]))
        result = spectral_flow(path)
        self.assertEqual(result.value, 1)
        self.assertEqual(len(result.crossings), 1)

    def dip(self):
        # lambda(t) = (t - 0.53)^2 - 1e-4: below zero on (0.52, 0.54), inside one grid cell
        return OperatorHomotopy([np.diag([0.2808, 1.0]), np.diag([-1.06, 0.0]), np.diag([1.0, 0.0])])

    def test_cancelling_pair_inside_one_cell(self):
        result = spectral_flow(self.dip())
        self.assertEqual(result.value, 0)
        self.assertEqual([c for _, _, c in result.crossings], [-1, 1])
        (a0, b0, _), (a1, b1, _) = result.crossings
        self.assertTrue(a0 <= 0.52 <= b0)
        self.assertTrue(a1 <= 0.54 <= b1)

    def test_near_miss_is_not_a_crossing(self):
        path = OperatorHomotopy([np.diag([0.2501, 1.0]), np.diag([-1.0, 0.0]), np.diag([1.0, 0.0])])
        result = spectral_flow(path)
        self.assertEqual(result.value, 0)
        self.assertEqual(result.crossings, [])

    def test_refinement_budget(self):
        with self.assertRaises(AmbiguityError):
            spectral_flow(self.dip(), max_evaluations=40)

    def test_winding(self):
        report = winding_reference(4, 0)
        self.assertEqual(report.modes, 9)
        self.assertEqual(report.total_flow, 0)
        self.assertEqual(abs(report.window_flow), 1)
        self.assertLess(abs(report.pairing), 1e-8)

    def test_non_selfadjoint_path(self):
        with self.assertRaises(ConventionError):
            OperatorHomotopy([np.array([[0, 1], [0, 0]])])


class TestTransgression(unittest.TestCase):
    def setUp(self):
        self.M = rank_one_module("float")
        self.h = OperatorHomotopy([self.M.F, HOMOTOPY], self.M.gamma)

    def test_coboundary(self):
        for m in (1, 2):
            self.assertTrue(verify_transgression(self.M, self.h, m, 1e-7).passed, m)

    def test_against_interval_chain(self):
        self.assertTrue(cross_check_transgression(self.M, self.h, 1, 1e-7).passed)

    def test_parity_entry_points(self):
        self.assertEqual(transgression_even(self.M, self.h, 1).degree, 1)
        with self.assertRaises(ConventionError):
            transgression_odd(self.M, self.h, 1)


class TestDoubledModules(unittest.TestCase):
    def setUp(self):
        self.M = rank_one_module("float")

    def test_tilde_is_an_involution(self):
        T = tilde_module(self.M)
        self.assertEqual(T.dim, 2 * self.M.dim)
        self.assertLess(np.max(np.abs(T.F @ T.F - np.eye(T.dim))), 1e-9)

    def test_prime_is_block_diagonal(self):
        P = prime_module(self.M)
        n = self.M.dim
        self.assertLess(np.max(np.abs(P.F[:n, n:])), 1e-12)
        self.assertLess(np.max(np.abs(P.F[:n, :n] + P.F[n:, n:])), 1e-12)

    def test_amplify(self):
        big = amplify(rank_one_module(), 2)
        self.assertEqual(big.dim, 6)
        self.assertEqual(fredholm_index(big, unit_class(big)).index, 2)


class TestCoincidence(unittest.TestCase):
    def test_rank_one(self):
        M = rank_one_module("float")
        report = verify_theorem_coin(M, 1, [unit_class(M)])
        self.assertTrue(report.passed)
        self.assertEqual(len(report.pairings), 1)

    def test_connes_homotopy_endpoint(self):
        M = rank_one_module("float")
        e = unit_class(M)
        big, h = connes_homotopy(M, e)
        E = np.asarray(e.represent(), dtype=complex)
        F1 = h.at(1.0)
        self.assertLess(np.max(np.abs(F1 @ E - E @ F1)), 1e-12)
        self.assertEqual(big.dim, 3)
        self.assertAlmostEqual(abs(commuting_pairing(M, e, 1) - 1), 0.0, places=9)

    def test_odd_module_refused(self):
        M = rank_one_module("float")
        with self.assertRaises(ConventionError):
            verify_theorem_coin(odd_module(M.algebra, M.F), 1)


class TestOddTrace(unittest.TestCase):
    def test_exact_kernel_refused(self):
        K = get_kernel("exact")
        A = represented(matrix_algebra(1, K), [K.identity(2)])
        M = odd_module(A, [[1, 0], [0, -1]])
        with self.assertRaises(ExactnessError):
            module_trace(M, 0)


if __name__ == "__main__":
    unittest.main()
