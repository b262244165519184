import unittest
from fractions import Fraction

import numpy as np
import sympy

from check_utils.decorators import number
from errors import BudgetError, NearCoincidenceError
from sympoly import (SymPolynomial, complete_sym, elem_sym, f_direct, q_coefficients, q_values,
                     verify_comb_identity)


class TestSymmetricFunctions(unittest.TestCase):

    @number("4.1")
    def test_elementary(self):
        e = elem_sym([Fraction(1, 2), 2, 3])
        self.assertEqual(e, [1, Fraction(11, 2), Fraction(17, 2), 3])

    @number("4.2")
    def test_complete(self):
        h = complete_sym([1.0, 2.0], 3)
        np.testing.assert_allclose(h.real, [1, 3, 7, 15])


class TestQCoefficients(unittest.TestCase):

    @number("4.3")
    def test_small_cases(self):
        q = q_coefficients(1, 2)
        self.assertEqual(q[0], SymPolynomial.generator(1, 2))
        self.assertEqual(q[1], -SymPolynomial.generator(2, 2))
        self.assertEqual(q_coefficients(1, 1), [SymPolynomial.generator(1, 1)])

    @number("4.4")
    def test_homogeneous_degrees(self):
        for a in range(1, 5):
            for m in range(1, 5):
                for j, q in enumerate(q_coefficients(a, m)):
                    if not q.is_zero():
                        self.assertEqual(q.degrees(), {a + j}, f"q_{a},{j} with m={m}")

    @number("4.5")
    def test_exact_against_rational_function(self):
        Y = sympy.symbols("Y1:4")
        Z = sympy.Symbol("Z")
        for a in (1, 2, 4):
            F = sum(Y[i] ** a * sympy.prod([(1 - Z * Y[l]) / (1 - Y[l] / Y[i]) for l in range(3) if l != i])
                    for i in range(3))
            poly = sympy.Poly(sympy.cancel(sympy.together(F)), Z)
            expected = {j: poly.coeff_monomial(Z**j) for j in range(3)}
            for j, q in enumerate(q_coefficients(a, 3)):
                self.assertEqual(sympy.expand(q.substitute(Y) - expected[j]), 0, f"a={a} j={j}")

    @number("4.6")
    def test_numeric_evaluation_agrees(self):
        Y = [0.7 + 0.2j, -1.1 + 0.4j, 1.5j]
        Z = 0.3 - 0.8j
        exact = sum(q.substitute(Y) * Z**j for j, q in enumerate(q_coefficients(3, 3)))
        self.assertLess(abs(complex(q_values(3, Y, Z)) - exact), 1e-12)
        self.assertLess(abs(f_direct(3, Y, Z) - exact), 1e-12)

    @number("4.7")
    def test_random_identity(self):
        report = verify_comb_identity(3, 4, trials=20, seed=5)
        self.assertTrue(report.passed, f"discrepancy {report.max_discrepancy:.2e}")
        self.assertTrue(verify_comb_identity(2, 3, trials=10, zero_z=True).passed)

    @number("4.8")
    def test_guards(self):
        with self.assertRaises(BudgetError):
            q_coefficients(9, 2)
        with self.assertRaises(NearCoincidenceError):
            f_direct(2, [1.0, 1.0 + 1e-8], 0.5)
        with self.assertRaises(NearCoincidenceError):
            f_direct(2, [0, 1.0], 0.5)
