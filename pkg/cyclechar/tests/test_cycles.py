import unittest
from fractions import Fraction

import numpy as np

from cyclechar import cyclic
from cyclechar.cycles import (boundary, character, character_exponential, check_chain, connection_variation_chain,
                              connes_cycle_character, cycle, matrix_form_cycle, product, rho_from_images,
                              simplex_monomial_integral, trivial_cycle, verify_theorem_comp, verify_theorem_one)
from cyclechar.cyclic import BBCochain, compare, is_bb_cocycle, reduced_check, strict_upper
from cyclechar.errors import ConventionError
from cyclechar.graded import MatrixForms, Multiplier, connection_derivation, torus_trace


class TestCharacter(unittest.TestCase):
    def setUp(self):
        self.rng = np.random.default_rng(2)
        self.C = matrix_form_cycle(2, 2, rng=self.rng)

    def tearDown(self):
        cyclic.set_sign_injection(False)

    def test_chain_axioms(self):
        self.assertTrue(check_chain(self.C).passed)

    def test_character_is_a_cocycle(self):
        ch = character(self.C)
        self.assertEqual(sorted(ch.components), [0, 2])
        report = is_bb_cocycle(ch)
        self.assertTrue(report.passed)
        self.assertTrue(report.exhaustive)

    def test_negated_B_breaks_the_cocycle(self):
        cyclic.set_sign_injection(True)
        self.assertFalse(is_bb_cocycle(character(self.C)).passed)

    def test_exponential_form_agrees(self):
        ch = character(self.C)
        for alpha in (1, -1, 2, -3, Fraction(1, 2)):
            self.assertTrue(compare(character_exponential(self.C, alpha), ch).passed, alpha)
        for bad in (0, 0.5, "2", True):
            with self.assertRaises(ConventionError):
                character_exponential(self.C, bad)

    def test_plain_character_needs_flat_cycle(self):
        with self.assertRaises(ConventionError):
            connes_cycle_character(self.C)
        flat = matrix_form_cycle(1, 2, connection=MatrixForms(1, 2).zero())
        self.assertTrue(compare(connes_cycle_character(flat), character(flat)).passed)


class TestSimplex(unittest.TestCase):
    def test_values(self):
        self.assertEqual(simplex_monomial_integral((0,)), 1)
        self.assertEqual(simplex_monomial_integral((1, 1)), Fraction(1, 6))
        self.assertEqual(simplex_monomial_integral((0, 0, 0)), Fraction(1, 2))
        self.assertEqual(simplex_monomial_integral((2, 0)), Fraction(1, 3))

    def test_negative_exponent(self):
        with self.assertRaises(ConventionError):
            simplex_monomial_integral((1, -1))


class TestTheorems(unittest.TestCase):
    def test_connection_variation(self):
        rng = np.random.default_rng(8)
        for d, N in ((1, 2), (2, 1)):
            C = matrix_form_cycle(d, N, rng=rng)
            chain = connection_variation_chain(C, C.omega.random_element(rng, 1))
            self.assertFalse(chain.is_cycle)
            self.assertEqual(chain.degree, d + 1)
            self.assertTrue(verify_theorem_one(chain).passed, (d, N))

    def test_boundary_is_a_cycle_one_degree_down(self):
        C = matrix_form_cycle(1, 2, rng=np.random.default_rng(9))
        edge = boundary(connection_variation_chain(C, C.omega.random_element(np.random.default_rng(10), 1)))
        self.assertTrue(edge.is_cycle)
        self.assertEqual(edge.degree, 1)
        self.assertEqual(boundary(C).degree, 0)

    def test_boundary_of_a_boundary_is_zero(self):
        C = matrix_form_cycle(1, 2, rng=np.random.default_rng(9))
        edge = boundary(connection_variation_chain(C, C.omega.random_element(np.random.default_rng(10), 1)))
        twice = boundary(edge)
        self.assertTrue(twice.is_zero)
        self.assertFalse(edge.is_zero)
        self.assertEqual(twice.degree, 0)
        self.assertTrue(compare(character(twice), BBCochain(C.algebra, 0)).passed)
        self.assertTrue(boundary(twice).is_zero)

    def test_variation_must_be_degree_one(self):
        C = matrix_form_cycle(2, 1)
        with self.assertRaises(ConventionError):
            connection_variation_chain(C, C.omega.dx(0) * C.omega.dx(1))

    def test_x_construction_cobounds(self):
        C = matrix_form_cycle(2, 1, rng=np.random.default_rng(4))
        self.assertTrue(verify_theorem_comp(C).passed)


class TestNonunital(unittest.TestCase):
    def test_character_lands_on_the_unitization(self):
        forms = MatrixForms(2, 2, "exact")
        A = strict_upper(2)
        images = [forms.constant(R) for R in A.representation]
        connection = forms.random_element(np.random.default_rng(6), 1)
        C = cycle(forms, A, rho_from_images(images), connection_derivation(forms, connection),
                  Multiplier.from_element(connection * connection), torus_trace(forms), images, unital=False)
        ch = character(C)
        self.assertEqual(ch.algebra.dim, A.dim + 1)
        self.assertTrue(reduced_check(ch).passed)
        self.assertTrue(is_bb_cocycle(ch).passed)


class TestProduct(unittest.TestCase):
    def test_point_is_a_unit(self):
        C = matrix_form_cycle(1, 1, rng=np.random.default_rng(0))
        P = product(trivial_cycle(), C)
        self.assertEqual(P.degree, 1)
        self.assertEqual(P.algebra.dim, 1)
        self.assertTrue(is_bb_cocycle(character(P)).passed)


if __name__ == "__main__":
    unittest.main()
