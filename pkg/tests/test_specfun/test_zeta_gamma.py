import math
import unittest

import mpmath
import numpy as np

from check_utils.decorators import number
from errors import PoleError, RegimeError
from specfun import (EvalControl, functional_equation_residual, gamma, gamma_quotient_sum, log_gamma,
                     stirling_large_height_ratio, stirling_validation, zeta, zeta_many)


class TestZeta(unittest.TestCase):

    @number("2.1")
    def test_special_values(self):
        self.assertAlmostEqual(abs(zeta(2) - math.pi**2 / 6), 0.0, places=11)
        self.assertAlmostEqual(abs(zeta(0) + 0.5), 0.0, places=11)
        self.assertAlmostEqual(abs(zeta(-1) + 1 / 12), 0.0, places=11)
        self.assertAlmostEqual(abs(zeta(4) - math.pi**4 / 90), 0.0, places=11)

    @number("2.2")
    def test_first_zero(self):
        self.assertLess(abs(zeta(0.5 + 14.134725141734693j)), 1e-9)

    @number("2.3")
    def test_against_mpmath(self):
        rng = np.random.default_rng(3)
        points = rng.uniform(-0.5, 2.5, 40) + 1j * rng.uniform(-300, 300, 40)
        values = zeta_many(points)
        for s, value in zip(points, values):
            expected = complex(mpmath.zeta(mpmath.mpc(s.real, s.imag)))
            self.assertLess(abs(value - expected), 1e-9 * max(1.0, abs(expected)), f"zeta({s})")

    @number("2.4")
    def test_shape_preserved(self):
        s = np.array([[1.5, 2.0], [0.5 + 3j, -2.0]])
        self.assertEqual(zeta_many(s).shape, (2, 2))

    @number("2.5")
    def test_pole_and_height(self):
        with self.assertRaises(PoleError):
            zeta(1)
        with self.assertRaises(RegimeError):
            zeta(0.5 + 2e6j)
        with self.assertRaises(ValueError):
            EvalControl(target_tol=1e-16)

    @number("2.6")
    def test_functional_equation(self):
        for z in (0.3 + 2j, 0.7 - 5j, 0.5 + 20j):
            self.assertLess(functional_equation_residual(z), 1e-9)


class TestGamma(unittest.TestCase):

    @number("2.7")
    def test_values_and_poles(self):
        self.assertAlmostEqual(abs(gamma(5) - 24), 0.0, places=10)
        self.assertAlmostEqual(abs(gamma(0.5) - math.sqrt(math.pi)), 0.0, places=12)
        self.assertAlmostEqual(abs(log_gamma(10) - math.log(362880)), 0.0, places=10)
        for s in (0, -1, -7):
            with self.assertRaises(PoleError):
                gamma(s)

    @number("2.8")
    def test_quotient_sum_merges(self):
        s1, s2, a, b = 0.3 + 1j, 0.1 - 2j, 0.01, 0.005
        for t in (1e3, 1e4):
            exact, merged = gamma_quotient_sum(s1, s2, a, b, t)
            scale = (1 + abs(s1) ** 2 + abs(s2) ** 2) / t
            self.assertLess(abs(exact - merged), 10 * scale * abs(merged))

    @number("2.9")
    def test_stirling_constant_stable(self):
        fits = stirling_validation(ts=(1e3, 1e4), trials=20, seed=1)
        self.assertEqual([f.t for f in fits], [1e3, 1e4])
        for fit in fits:
            self.assertTrue(math.isfinite(fit.constant))
            self.assertGreater(fit.constant, 0.0)
        ratio = fits[1].constant / fits[0].constant
        self.assertTrue(0.5 <= ratio <= 2.0, f"constants drift by a factor {ratio:.3g}")

    @number("2.10")
    def test_large_height_ratio_stays_bounded(self):
        t = 100.0
        for height in (150.0, 400.0, 1500.0, -1500.0):
            ratio = stirling_large_height_ratio(0.1 + 1j * height, 0.2 + 0j, 0.01, 0.02, t)
            self.assertTrue(math.isfinite(ratio))
            self.assertLess(ratio, 10.0)
        with self.assertRaises(ValueError):
            stirling_large_height_ratio(0.1 + 50j, 0.2 + 0j, 0.01, 0.02, t)
