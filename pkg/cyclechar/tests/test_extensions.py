import unittest
from fractions import Fraction

import numpy as np

from cyclechar.equivariant import rotation_action
from cyclechar.errors import BackendMismatchError, ConventionError
from cyclechar.extensions import (AbelianGroup, CrossedProductAlgebra, DirectSum, IntervalAlgebra, UnitizedAlgebra,
                                  XMatrixAlgebra, graded_tensor_product, interval_extend)
from cyclechar.graded import MatrixForms, Multiplier, TorusForms, torus_trace


def _same(x, y):
    return (x - y).is_zero()


class TestAbelianGroup(unittest.TestCase):
    def test_mixed_orders(self):
        G = AbelianGroup((3, 0))
        self.assertEqual(G.mul((2, 5), (2, -1)), (1, 4))
        self.assertEqual(G.inv((1, 2)), (2, -2))
        self.assertTrue(G.is_identity((3, 0)))
        self.assertEqual(G.describe(), "Z/3 x Z")
        self.assertEqual(len(G.ball(1)), 9)

    def test_negative_order(self):
        with self.assertRaises(ConventionError):
            AbelianGroup((-1,))


class TestCrossedProduct(unittest.TestCase):
    def setUp(self):
        self.forms = TorusForms(1, 1, "exact")
        self.action = rotation_action(1, 4, [Fraction(1, 4)])
        self.crossed = CrossedProductAlgebra(self.forms, self.action.group, self.action.act)
        rng = np.random.default_rng(5)
        self.samples = [self.crossed.elem(self.forms.random_element(rng, k), (g,))
                        for k, g in ((0, 1), (1, 2), (0, 3))]

    def test_associative(self):
        x, y, z = self.samples
        self.assertTrue(_same((x * y) * z, x * (y * z)))

    def test_conjugation_is_the_action(self):
        a = self.forms.term((1,), (), 1)
        moved = self.crossed.apply((1,), self.crossed.elem(a))
        self.assertTrue(_same(moved, self.crossed.elem(self.action.act((1,), a))))

    def test_trace_sees_identity_component_only(self):
        T = self.crossed.trace(torus_trace(self.forms))
        dx = self.forms.dx(0)
        self.assertEqual(T(self.crossed.elem(dx)), self.forms.kernel.one())
        self.assertEqual(T(self.crossed.elem(dx, (2,))), 0)


class TestInterval(unittest.TestCase):
    def setUp(self):
        self.forms = TorusForms(1, 1, "exact")

    def test_trace_orientation(self):
        base = torus_trace(self.forms)
        for orientation, expected in (("positive", 2), ("graded", -2)):
            I = interval_extend(self.forms, 2, orientation)
            x = I.embed(self.forms.dx(0), 1, dt=True)
            self.assertEqual(I.trace(base)(x), self.forms.kernel.scalar(expected))

    def test_dt_anticommutes_with_odd_forms(self):
        I = interval_extend(self.forms)
        w = I.embed(self.forms.dx(0))
        self.assertTrue(_same(w * I.dt(), -(I.embed(self.forms.dx(0), 0, True))))
        self.assertTrue((I.dt() * I.dt()).is_zero())

    def test_d_interval_and_evaluate(self):
        I = interval_extend(self.forms, Fraction(1, 2))
        a = self.forms.term((1,), (), 3)
        x = I.embed(a, 2)
        self.assertTrue(_same(I.d_interval(x), I.embed(a.scale(2), 1, True)))
        self.assertTrue(_same(I.evaluate(x, Fraction(1, 2)), a.scale(Fraction(1, 4))))

    def test_bad_parameters(self):
        with self.assertRaises(ConventionError):
            interval_extend(self.forms, 1, "sideways")
        with self.assertRaises(ConventionError):
            interval_extend(self.forms, 0)


class TestXMatrix(unittest.TestCase):
    def test_x_squared(self):
        forms = MatrixForms(2, 2, "exact")
        A = forms.random_element(np.random.default_rng(3), 1)
        X = XMatrixAlgebra(forms, Multiplier.from_element(A * A))
        x = X.x_symbol()
        self.assertEqual(x.degrees(), [1])
        self.assertTrue(_same(x * x, -X.curvature().element))


class TestUnitized(unittest.TestCase):
    def test_products_and_trace(self):
        forms = MatrixForms(2, 1, "exact")
        theta = forms.dx(0) * forms.dx(1)
        U = UnitizedAlgebra(forms, Multiplier.from_element(theta))
        a = forms.constant(3)
        self.assertTrue(_same(U.one() * U.embed(a), U.embed(a)))
        self.assertTrue(_same(U.theta_power(1) * U.embed(a), U.embed(theta * a)))
        T = U.trace(torus_trace(forms))
        self.assertEqual(T(U.theta_power(1, 5)), 0)
        self.assertEqual(T(U.embed(theta)), forms.kernel.one())


class TestDirectSum(unittest.TestCase):
    def test_componentwise(self):
        f1, f2 = MatrixForms(1, 1, "exact"), MatrixForms(2, 1, "exact")
        S = DirectSum(f1, f2)
        x = S.pair(f1.dx(0), f2.dx(1))
        y = S.pair(f1.one(), f2.dx(0))
        prod = x * y
        self.assertTrue(_same(S.component(prod, 0), f1.dx(0)))
        self.assertTrue(_same(S.component(prod, 1), f2.dx(1) * f2.dx(0)))


class TestTensorProduct(unittest.TestCase):
    def test_koszul_sign(self):
        f1, f2 = TorusForms(1, 1, "exact"), TorusForms(1, 2, "exact")
        P = graded_tensor_product(f1, f2)
        a, b = f1.dx(0), f2.dx(0)
        self.assertTrue(_same(P.right(b) * P.left(a), -P.pure(a, b)))
        self.assertEqual(P.algebra.d, 2)
        self.assertEqual(P.algebra.N, 2)

    def test_interval_times_torus(self):
        f1, f2 = TorusForms(1, 1, "exact"), TorusForms(1, 1, "exact")
        I = interval_extend(f1, 2, "positive")
        P = graded_tensor_product(I, f2)
        self.assertIsInstance(P.algebra, IntervalAlgebra)
        self.assertEqual(P.algebra.length, 2)
        self.assertEqual(P.algebra.base.d, 2)
        b = f2.dx(0)
        self.assertTrue(_same(P.right(b) * P.left(I.dt()), -P.pure(I.dt(), b)))
        a = I.embed(f1.dx(0), 1, dt=True)
        self.assertTrue(_same(P.right(b) * P.left(a), P.pure(a, b)))
        trace = P.algebra.trace(torus_trace(P.inner.algebra))
        self.assertEqual(trace(P.pure(a, b)), f1.kernel.scalar(2))

    def test_torus_times_interval(self):
        f1, f2 = TorusForms(1, 1, "exact"), TorusForms(1, 1, "exact")
        I = interval_extend(f2, 1, "positive")
        P = graded_tensor_product(f1, I)
        a = f1.dx(0)
        moved = P.algebra.embed(P.inner.left(a), 0, True)
        self.assertTrue(_same(P.pure(a, I.dt()), -moved))

    def test_two_intervals_refused(self):
        I = interval_extend(TorusForms(1, 1, "exact"))
        with self.assertRaises(BackendMismatchError):
            graded_tensor_product(I, interval_extend(TorusForms(1, 1, "exact")))

    def test_kernel_mismatch(self):
        with self.assertRaises(BackendMismatchError):
            graded_tensor_product(TorusForms(1, 1, "exact"), TorusForms(1, 1, "float"))


if __name__ == "__main__":
    unittest.main()
