import math
import unittest

import numpy as np

from check_utils.decorators import number
from errors import PoleError
from quadrature import panels, vertical_contour
from weights import (OmegaWeight, PhiCutoff, WeightProfile, derivative_bound_constants, mellin_phi,
                     mellin_phi_many, omega_eval, omega_hat, omega_hat_many, omega_mellin, phi2, phi2_many, phi_eval,
                     omega_hat_decay_ratios, partition_of_unity_defect, phi_laurent_constant, phi_residue_probe,
                     smoothstep, w0, w0_partition)


class TestSmoothstep(unittest.TestCase):

    @number("3.1")
    def test_symmetry(self):
        x = np.linspace(-0.5, 1.5, 41)
        np.testing.assert_allclose(smoothstep(x) + smoothstep(1 - x), 1.0, atol=1e-15)
        self.assertEqual(smoothstep(0.5), 0.5)
        self.assertEqual(smoothstep(0.0), 0.0)
        self.assertEqual(smoothstep(1.0), 1.0)


class TestOmega(unittest.TestCase):

    def setUp(self):
        self.w = OmegaWeight.standard(200.0)

    @number("3.2")
    def test_validation(self):
        with self.assertRaises(ValueError):
            OmegaWeight(200.0, 10.0)
        with self.assertRaises(ValueError):
            OmegaWeight(200.0, 150.0)
        with self.assertRaises(ValueError):
            OmegaWeight.standard(200.0, c1=2.0, c2=1.0)

    @number("3.3")
    def test_shape(self):
        lo, hi = self.w.support
        self.assertEqual(omega_eval(self.w, lo), 0.0)
        self.assertEqual(omega_eval(self.w, self.w.center), 1.0)
        self.assertEqual(omega_eval(self.w, hi + 1), 0.0)

    @number("3.4")
    def test_mass(self):
        total = (self.w.c2 - self.w.c1) * self.w.T - self.w.T0
        self.assertAlmostEqual(omega_hat_many(self.w, 0.0)[0].real, total, places=8)
        self.assertAlmostEqual(WeightProfile(self.w).omega_hat0, total, delta=1e-7 * total)
        self.assertAlmostEqual(abs(omega_mellin(self.w, 0.0)[0] - total), 0.0, delta=1e-7 * total)
        doubled = self.w.scaled(2.0)
        self.assertAlmostEqual(omega_hat_many(doubled, 0.0)[0].real, 2 * total, places=7)

    @number("3.5")
    def test_fast_transform_matches_quadrature(self):
        scale = self.w.T
        for u in (1e-4, 3e-3, 0.02, 0.1):
            fast = omega_hat_many(self.w, u)[0]
            slow = omega_hat(self.w, u)
            self.assertLess(abs(fast - slow), 1e-7 * scale, f"u={u}")

    @number("3.6")
    def test_conjugate_symmetry(self):
        u = np.array([0.003, 0.05, 0.4])
        np.testing.assert_allclose(omega_hat_many(self.w, -u), omega_hat_many(self.w, u).conj(), atol=1e-10)

    @number("3.7")
    def test_mellin_against_direct_quadrature(self):
        lo, hi = self.w.support
        t, weights = panels(lo, hi, 400, 16)
        for z in (0.3, 0.05 + 2j, 0.5 - 10j):
            direct = np.sum(weights * omega_eval(self.w, t) * np.exp(-z * np.log(t)))
            value = omega_mellin(self.w, z)[0]
            self.assertLess(abs(value - direct), 1e-7 * max(1.0, abs(direct)), f"z={z}")
        with self.assertRaises(PoleError):
            omega_mellin(self.w, 1.0)


class TestPhi(unittest.TestCase):

    def setUp(self):
        self.p = PhiCutoff(0.1)

    @number("3.8")
    def test_cutoff_shape(self):
        self.assertEqual(phi_eval(self.p, 0.5), 1.0)
        self.assertEqual(phi_eval(self.p, 1.2), 0.0)
        self.assertAlmostEqual(phi_eval(self.p, 1.05), 0.5)
        with self.assertRaises(ValueError):
            PhiCutoff(0.0)

    @number("3.9")
    def test_mellin_at_one(self):
        # integral of phi is 1 + rho/2 since the ramp is symmetric about its midpoint
        self.assertAlmostEqual(abs(mellin_phi(self.p, 1.0) - 1.05), 0.0, places=9)
        self.assertAlmostEqual(abs(mellin_phi_many(self.p, 1.0)[0] - 1.05), 0.0, places=8)

    @number("3.10")
    def test_vectorized_matches_adaptive(self):
        for s in (0.5 + 3j, 0.1 - 40j, 2.0):
            self.assertLess(abs(mellin_phi_many(self.p, s)[0] - mellin_phi(self.p, s)), 1e-8)
            self.assertLess(abs(phi2_many(self.p, s)[0] - phi2(self.p, s)), 1e-8)

    @number("3.11")
    def test_residue_at_zero(self):
        self.assertAlmostEqual(phi_residue_probe(self.p), 1.0, delta=1e-6)
        self.assertAlmostEqual(phi_residue_probe(self.p, squared=True), 1.0, delta=1e-6)
        with self.assertRaises(PoleError):
            phi2_many(self.p, [0.0])

    @number("3.14")
    def test_laurent_constant(self):
        # Jensen: S' is a density on [0, 1] symmetric about 1/2
        value = phi_laurent_constant(PhiCutoff(0.1))
        self.assertLess(value, math.log1p(0.05))
        self.assertGreater(value, 0.045)
        self.assertLess(phi_laurent_constant(PhiCutoff(0.05)), value)

    @number("3.15")
    def test_derivative_bounds(self):
        constants = derivative_bound_constants(np.sin, 0.0, 2 * math.pi, 1.0, orders=2)
        np.testing.assert_allclose(constants, [1.0, 1.0], rtol=1e-3)
        scaled = derivative_bound_constants(np.sin, 0.0, 2 * math.pi, 2.0, orders=2)
        np.testing.assert_allclose(scaled, [2.0, 4.0], rtol=1e-3)

    @number("3.20")
    def test_phi2_is_a_mellin_convolution(self):
        # Phi_2(s) = (1/2 pi i) int_(1) Phi(s1) Phi(s - s1) ds1
        s = 2 + 3j
        contour = vertical_contour(1.0, 200.0, 1.0, 16, False)
        values = mellin_phi_many(self.p, contour.s) * mellin_phi_many(self.p, s - contour.s)
        self.assertLess(abs(contour.integrate(values) - phi2(self.p, s)), 1e-5)


class TestDyadicPartition(unittest.TestCase):

    @number("3.12")
    def test_partition_of_unity(self):
        ks = np.arange(-10, 80)
        for x in (1.5, 3.0, 10.0, 1234.5, 1e6):
            total = float(np.sum(w0(x / 2.0 ** (ks / 2))))
            self.assertAlmostEqual(total, 1.0, places=12, msg=f"x={x}")

    @number("3.13")
    def test_partition_weights(self):
        parts = w0_partition(37.0)
        self.assertTrue(1 <= len(parts) <= 2)
        self.assertAlmostEqual(sum(weight for _, weight in parts), 1.0, places=14)
        for M, _ in parts:
            self.assertTrue(1 < 37.0 / M < 2)

    @number("3.19")
    def test_partition_defect_up_to_1e8(self):
        rng = np.random.default_rng(0)
        x = np.exp(rng.uniform(0.0, math.log(1e8), 10_000))
        self.assertGreater(x.max(), 1e7)
        self.assertLessEqual(partition_of_unity_defect(x), 1e-12)
        with self.assertRaises(ValueError):
            partition_of_unity_defect([0.5, 2.0])


class TestOmegaScaling(unittest.TestCase):

    @number("3.21")
    def test_derivative_constants_do_not_depend_on_T(self):
        left, right = [], []
        for T in (1e2, 1e3, 1e4):
            w = OmegaWeight.standard(T)
            lo, hi = w.support
            f = lambda t, w=w: omega_eval(w, t)
            left.append(derivative_bound_constants(f, lo, lo + w.T0, w.T0, orders=3, samples=2001))
            right.append(derivative_bound_constants(f, hi - w.T0, hi, w.T0, orders=3, samples=2001))
        for row in left[1:]:
            np.testing.assert_allclose(row, left[0], rtol=1e-4)
        np.testing.assert_allclose(right, left, rtol=1e-4)
        self.assertTrue(all(c > 0.1 for c in left[0]))

    @number("3.22")
    def test_omega_hat_decay_per_doubling(self):
        ratios = omega_hat_decay_ratios(OmegaWeight.standard(1000.0), windows=2)
        self.assertEqual(len(ratios), 2)
        for r in ratios:
            self.assertLessEqual(r, 1 / 8)
