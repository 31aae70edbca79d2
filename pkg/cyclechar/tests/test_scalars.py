import math
import unittest
from fractions import Fraction

from cyclechar.errors import ExactnessError
from cyclechar.scalars import EXACT, FLOAT, factorial_fraction, get_kernel


class TestExactKernel(unittest.TestCase):
    def test_gaussian_arithmetic(self):
        i = EXACT.scalar((0, 1))
        self.assertEqual(i * i, EXACT.scalar(-1))
        self.assertEqual(EXACT.scalar("3/7") + EXACT.scalar(Fraction(4, 7)), EXACT.one())

    def test_tau_is_two_pi_i(self):
        z = EXACT.to_complex(EXACT.scalar(2) * EXACT.tau())
        self.assertAlmostEqual(z.imag, 4 * math.pi)
        self.assertAlmostEqual(z.real, 0.0)

    def test_conj_flips_tau(self):
        x = EXACT.scalar((1, 2)) * EXACT.tau()
        self.assertAlmostEqual(EXACT.to_complex(EXACT.conj(x)), EXACT.to_complex(x).conjugate())

    def test_phase_quarter_turns(self):
        self.assertEqual(EXACT.phase(Fraction(1, 4)), EXACT.scalar((0, -1)))
        self.assertEqual(EXACT.phase(Fraction(1, 2)), EXACT.scalar(-1))
        self.assertEqual(EXACT.phase(Fraction(3)), EXACT.one())

    def test_phase_outside_gaussian_rationals(self):
        with self.assertRaises(ExactnessError):
            EXACT.phase(Fraction(1, 3))

    def test_inexact_literal_rejected(self):
        with self.assertRaises(ExactnessError):
            EXACT.scalar(0.5)

    def test_matrix_adjoint_and_trace(self):
        M = EXACT.matrix([[1, (0, 1)], [2, 3]])
        A = EXACT.adjoint(M)
        self.assertEqual(A[1, 0], EXACT.scalar((0, -1)))
        self.assertEqual(EXACT.trace(M), EXACT.scalar(4))


class TestFloatKernel(unittest.TestCase):
    def test_phase(self):
        self.assertAlmostEqual(FLOAT.phase(Fraction(1, 4)), -1j)

    def test_rational_strings(self):
        self.assertEqual(FLOAT.scalar("1/4"), 0.25 + 0j)
        self.assertEqual(FLOAT.scalar(("1/2", "-1")), 0.5 - 1j)

    def test_total_is_order_independent(self):
        values = [1e16 + 1j, 1.0, -1e16 - 1j, 1.0, 1e-3j]
        self.assertEqual(FLOAT.total(values), 2 + 1e-3j)
        self.assertEqual(FLOAT.total(reversed(values)), FLOAT.total(values))
        self.assertEqual(EXACT.total([EXACT.scalar(Fraction(1, 2))] * 4), EXACT.scalar(2))


class TestHelpers(unittest.TestCase):
    def test_get_kernel(self):
        self.assertIs(get_kernel("exact"), EXACT)
        self.assertIs(get_kernel(FLOAT), FLOAT)
        with self.assertRaises(ValueError):
            get_kernel("quad")

    def test_factorial_fraction(self):
        self.assertEqual(factorial_fraction([2, 3], [5]), Fraction(12, 120))


if __name__ == "__main__":
    unittest.main()
