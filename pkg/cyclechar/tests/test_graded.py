import unittest
from fractions import Fraction

import numpy as np

from cyclechar.errors import BackendMismatchError, ConventionError, ExactnessError
from cyclechar.graded import (MatrixForms, Multiplier, OperatorForms, TorusForms, apply_derivation,
                              check_graded_trace, check_multiplier, connection_derivation, graded_commutator,
                              torus_trace, trace_eval, wedge_sign)


def _same(x, y):
    return (x - y).is_zero()


class TestWedge(unittest.TestCase):
    def test_sign_and_collision(self):
        self.assertEqual(wedge_sign((1,), (0,)), (-1, (0, 1)))
        self.assertEqual(wedge_sign((0,), (1, 2)), (1, (0, 1, 2)))
        self.assertEqual(wedge_sign((1,), (1,)), (0, ()))


class TestTorusForms(unittest.TestCase):
    def setUp(self):
        self.forms = TorusForms(2, 2, "exact")
        self.rng = np.random.default_rng(7)

    def test_d_squared_is_zero(self):
        for degree in (0, 1):
            x = self.forms.random_element(self.rng, degree)
            self.assertTrue(self.forms.d_form(self.forms.d_form(x)).is_zero())

    def test_leibniz(self):
        d = self.forms.d_form
        x = self.forms.random_element(self.rng, 1)
        y = self.forms.random_element(self.rng, 0)
        self.assertTrue(_same(d(x * y), d(x) * y - x * d(y)))

    def test_stokes(self):
        x = self.forms.random_element(self.rng, 1, max_freq=2)
        self.assertEqual(self.forms.integrate(self.forms.d_form(x)), 0)

    def test_integral_is_matrix_trace_of_constant_top_term(self):
        forms = self.forms
        top = forms.constant(forms.kernel.matrix([[2, 0], [0, 3]]), (0, 1))
        wavy = forms.term((1, 0), (0, 1), 5)
        self.assertEqual(forms.integrate(top + wavy), forms.kernel.scalar(5))
        self.assertEqual(forms.integrate(forms.constant(1, (1, 0))), forms.kernel.scalar(-2))

    def test_graded_trace(self):
        samples = [self.forms.random_element(self.rng, k) for k in (0, 1, 1, 2)]
        report = check_graded_trace(torus_trace(self.forms), samples, None)
        self.assertTrue(report.passed)
        self.assertGreater(report.pairs, 0)

    def test_translation_phase(self):
        forms = TorusForms(1, 1, "exact")
        x = forms.term((1,), (), 1)
        moved = forms.transform(x, np.eye(1, dtype=int), [Fraction(1, 4)])
        self.assertTrue(_same(moved, x.scale(forms.kernel.phase(Fraction(1, 4)))))

    def test_linear_pullback_of_dx(self):
        forms = TorusForms(2, 1, "exact")
        swap = np.array([[0, 1], [1, 0]])
        moved = forms.transform(forms.dx(0), swap, [0, 0])
        self.assertTrue(_same(moved, forms.dx(1)))

    def test_tagged_top_degree_refused(self):
        forms = TorusForms(1, 1, "exact")
        E = forms.exp_tag({(1,): 1})
        with self.assertRaises(ExactnessError):
            forms.integrate(E * forms.dx(0))

    def test_bad_index(self):
        with self.assertRaises(ConventionError):
            self.forms.term((0, 0), (0, 0))
        with self.assertRaises(ConventionError):
            self.forms.term((0,), ())

    def test_backend_mismatch(self):
        other = TorusForms(3, 2, "exact")
        with self.assertRaises(BackendMismatchError):
            self.forms.one() + other.one()


class TestMatrixForms(unittest.TestCase):
    def setUp(self):
        self.forms = MatrixForms(2, 2, "exact")
        rng = np.random.default_rng(11)
        self.A = self.forms.random_element(rng, 1)
        self.samples = [self.forms.random_element(rng, k) for k in (0, 0, 1, 2)]

    def test_constant_coefficients_only(self):
        with self.assertRaises(ConventionError):
            self.forms.term((1, 0), ())

    def test_connection_squares_to_curvature(self):
        nabla = connection_derivation(self.forms, self.A)
        theta = self.A * self.A
        for x in self.samples:
            self.assertTrue(_same(nabla(nabla(x)), theta * x - x * theta))

    def test_curvature_is_a_multiplier(self):
        nabla = connection_derivation(self.forms, self.A)
        theta = Multiplier.from_element(self.A * self.A)
        self.assertEqual(check_multiplier(theta, nabla, torus_trace(self.forms), self.samples), 0.0)

    def test_graded_commutator_sign(self):
        x, y = self.forms.dx(0), self.forms.dx(1)
        self.assertTrue(_same(graded_commutator(x, y), x * y + y * x))
        self.assertTrue(_same(graded_commutator(self.A, self.A), (self.A * self.A).scale(2)))

    def test_apply_and_trace(self):
        nabla = connection_derivation(self.forms, self.A)
        x = self.samples[2]
        self.assertTrue(_same(apply_derivation(nabla, x), nabla(x)))
        top = self.forms.dx(0) * self.forms.dx(1)
        self.assertEqual(trace_eval(torus_trace(self.forms), top), self.forms.kernel.scalar(2))

    def test_curvature_degree(self):
        with self.assertRaises(ConventionError):
            Multiplier.from_element(self.A)


class TestOperatorForms(unittest.TestCase):
    def test_degrees_add(self):
        ops = OperatorForms(2, "float")
        a = ops.op(np.eye(2), 1)
        b = ops.op(np.array([[0, 1], [1, 0]]), 2)
        self.assertEqual((a * b).degrees(), [3])

    def test_shape_checked(self):
        with self.assertRaises(ConventionError):
            OperatorForms(2).op(np.eye(3))


if __name__ == "__main__":
    unittest.main()
