import math
import unittest
from fractions import Fraction

from check_utils.decorators import number
from errors import BudgetError
from moments import (W33_COEFFICIENTS, a_kl, c_k, polynomial_identity_checks, g_k, gamma_kl, leading_coefficient_Q4,
                     w_kl)


class TestLeadingOrderPolynomials(unittest.TestCase):

    @number("7.1")
    def test_gamma_two_two(self):
        self.assertEqual([gamma_kl(2, 2, n) for n in range(4)], [2, 4, 8, 14])
        with self.assertRaises(ValueError):
            gamma_kl(2, 2, -1)

    @number("7.2")
    def test_w22(self):
        self.assertEqual(w_kl(2, 2).coefficients(), [-1, 8, -24, 32, -14])

    @number("7.3")
    def test_w33_and_w44(self):
        w33 = w_kl(3, 3)
        self.assertEqual(tuple(w33.coefficients()), W33_COEFFICIENTS)
        self.assertEqual(sum(w33.coefficients()), int(w33(1)))
        self.assertEqual(w_kl(4, 4)(2), 24024)
        self.assertEqual(w33(Fraction(3, 2)) + w33(Fraction(3, 2)), 42)

    @number("7.4")
    def test_budget(self):
        with self.assertRaises(BudgetError):
            w_kl(7, 2)
        with self.assertRaises(BudgetError):
            a_kl(2, 7)

    @number("7.5")
    def test_g_k(self):
        self.assertEqual([g_k(k) for k in (1, 2, 3, 4)], [1, 2, 42, 24024])

    @number("7.6")
    def test_identity_report(self):
        report = polynomial_identity_checks(strict=True)
        self.assertTrue(report.passed)
        self.assertEqual(report.failed, [])
        self.assertEqual(len(report.checks), 6)

    @number("7.7")
    def test_q4_leading(self):
        q4 = leading_coefficient_Q4()
        self.assertAlmostEqual(q4.float_factor, 1 / (4 * math.pi**2), places=15)
        self.assertAlmostEqual(q4.evaluate(1.0, 1.0), q4.float_factor, places=15)

    @number("7.8")
    def test_arithmetic_factors(self):
        self.assertAlmostEqual(a_kl(1, 1).value.real, 1.0, places=9)
        result = c_k(2)
        self.assertEqual(result.value.imag, 0.0)
        self.assertLess(abs(result.value.real - 6 / math.pi**2), result.tail_estimate)
