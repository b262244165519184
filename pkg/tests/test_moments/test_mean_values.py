import math
import unittest

import numpy as np

from check_utils.decorators import budget, number, slow
from arithcore import ShiftSet, sieve_sigma
from config import TruncationPolicy
from errors import BudgetError, CoincidentShiftError, PoleError
from moments import (MomentConfig, MomentReport, consistency_report, contour_height, diag_direct,
                     direct_moment, gamma_quotient_sum_check, m0_contour, m1_contour, residual_trend,
                     swap_symmetry_check, asymptotic_range_lint)
from weights import OmegaWeight, PhiCutoff, omega_hat_many, phi_eval


def _report(T: float, direct: complex, residual: complex) -> MomentReport:
    return MomentReport(T, 0.2, direct, direct, 0j, 0j, residual, {}, {})


class TestMomentConfig(unittest.TestCase):

    @number("8.1")
    def test_validation(self):
        I, J = ShiftSet.of(0.01), ShiftSet.of(0.02)
        with self.assertRaises(ValueError):
            MomentConfig(I, J, 1.0, 0.2)
        with self.assertRaises(ValueError):
            MomentConfig(I, J, 100.0, -0.1)
        with self.assertRaises(ValueError):
            MomentConfig(I, J, 100.0, 0.2, OmegaWeight.standard(200.0))
        with self.assertRaises(ValueError):
            MomentConfig(ShiftSet.of(0.5), J, 100.0, 0.2, log_regime=True)

    @number("8.2")
    def test_standard_regime(self):
        cfg = MomentConfig.standard(2, 3, 1000.0, 0.2)
        self.assertEqual((cfg.I.k, cfg.J.k), (2, 3))
        self.assertAlmostEqual(cfg.K, 1000.0**1.2)
        self.assertEqual(cfg.K_prime, math.floor(1.1 * 1000.0**1.2))
        self.assertLessEqual(cfg.delta, 1 / math.log(1000.0))

    @number("8.3")
    def test_height_change_rescales_shifts(self):
        cfg = MomentConfig.standard(2, 2, 500.0, 0.2).with_T(2000.0)
        expected = ShiftSet.log_regime(2, 2000.0)
        for a, b in zip(cfg.I, expected):
            self.assertAlmostEqual(abs(a - b), 0.0, places=14)
        self.assertEqual(cfg.omega.T, 2000.0)

    @number("8.4")
    def test_swapped(self):
        cfg = MomentConfig(ShiftSet.of(0.01 + 0.002j, 0.02), ShiftSet.of(0.015, -0.01j), 200.0, 0.2)
        other = cfg.swapped()
        self.assertEqual(other.I.shifts, (0.015 + 0j, 0.01j))
        self.assertEqual(other.J.shifts, (0.01 - 0.002j, 0.02 + 0j))


class TestDirectMoment(unittest.TestCase):

    def setUp(self):
        self.cfg = MomentConfig.standard(2, 2, 200.0, 0.2)

    @number("8.5")
    def test_zero_window_is_diagonal(self):
        result = direct_moment(self.cfg, log_window=1e-12)
        self.assertEqual(result.pairs, 0)
        self.assertEqual(result.off_diagonal, 0j)
        self.assertAlmostEqual(abs(result.value - diag_direct(self.cfg)), 0.0, delta=1e-12 * abs(result.value))

    @number("8.6")
    def test_against_full_double_sum(self):
        cfg = MomentConfig.standard(2, 2, 50.0, 0.2)
        Kp = cfg.K_prime
        idx = np.arange(1, Kp + 1)
        a = sieve_sigma(cfg.I, Kp).values[1:] * phi_eval(cfg.phi, idx / cfg.K) / np.sqrt(idx)
        b = sieve_sigma(cfg.J, Kp).values[1:] * phi_eval(cfg.phi, idx / cfg.K) / np.sqrt(idx)
        u = np.log(np.divide.outer(idx, idx).astype(float)) / (2 * math.pi)
        hat = omega_hat_many(cfg.omega, u.ravel()).reshape(u.shape)
        full = complex(a @ hat @ b)
        everything = direct_moment(cfg, log_window=10.0)
        self.assertLess(abs(everything.value - full), 1e-10 * abs(full))
        windowed = direct_moment(cfg)
        self.assertLess(abs(windowed.value - full), windowed.truncation_bound)

    @number("8.7")
    def test_conjugate_symmetry(self):
        cfg = MomentConfig(ShiftSet.of(0.01 + 0.003j, 0.02), ShiftSet.of(0.015, 0.025 - 0.004j), 200.0, 0.2)
        x = direct_moment(cfg).value
        y = direct_moment(cfg.swapped()).value
        self.assertLess(abs(y - x.conjugate()), 1e-10 * abs(x))

    @number("8.8")
    def test_linear_in_window_amplitude(self):
        doubled = MomentConfig(self.cfg.I, self.cfg.J, self.cfg.T, self.cfg.eta, self.cfg.omega.scaled(2.0),
                               self.cfg.phi, self.cfg.policy)
        x = direct_moment(self.cfg).value
        self.assertLess(abs(direct_moment(doubled).value - 2 * x), 1e-10 * abs(x))

    @number("8.9")
    def test_sieve_budget(self):
        cfg = MomentConfig.standard(2, 2, 200.0, 0.2, policy=TruncationPolicy(sieve_cap=100))
        with self.assertRaises(BudgetError):
            direct_moment(cfg)


class TestContours(unittest.TestCase):

    def setUp(self):
        self.policy = TruncationPolicy(contour_height=40.0, prime_cutoff=1000)
        self.cfg = MomentConfig.standard(2, 2, 200.0, 0.2, policy=self.policy)

    @number("8.10")
    def test_abscissa_checked(self):
        with self.assertRaises(PoleError):
            m0_contour(self.cfg, abscissa=0.0)
        with self.assertRaises(PoleError):
            m1_contour(self.cfg, abscissa=1.5)

    @number("8.11")
    def test_coincident_shifts_rejected(self):
        cfg = MomentConfig(ShiftSet.of(0.01, 0.01), ShiftSet.of(0.015, 0.025), 200.0, 0.2, policy=self.policy)
        with self.assertRaises(CoincidentShiftError):
            m1_contour(cfg)
        with self.assertRaises(CoincidentShiftError):
            consistency_report([cfg])

    @number("8.12")
    def test_real_shifts_give_real_terms(self):
        m0 = m0_contour(self.cfg)
        m1 = m1_contour(self.cfg)
        self.assertEqual(m0.height, 40.0)
        self.assertEqual(m0.value.imag, 0.0)
        self.assertEqual(m1.value.imag, 0.0)
        self.assertEqual(set(m1.per_swap_terms), {(0, 0), (0, 1), (1, 0), (1, 1)})
        self.assertGreater(m0.contour_tail, 0.0)

    @number("8.13")
    def test_height_from_decay(self):
        phi = PhiCutoff(0.1)
        height = contour_height(phi, 0.1, TruncationPolicy())
        self.assertTrue(4.0 <= height <= TruncationPolicy.MAX_CONTOUR_HEIGHT)
        looser = contour_height(phi, 0.1, TruncationPolicy(target_tol=1e-4))
        self.assertLessEqual(looser, height)

    @slow()
    @budget(300)
    @number("8.14")
    def test_diagonal_identity(self):
        cfg = MomentConfig.standard(2, 2, 2000.0, 0.2)
        gap = abs(diag_direct(cfg) - m0_contour(cfg).value) / abs(diag_direct(cfg))
        self.assertLess(gap, 1e-4)

    @slow()
    @budget(300)
    @number("8.15")
    def test_swap_symmetry_of_main_terms(self):
        cfg = MomentConfig(ShiftSet.of(0.01 + 0.002j, 0.02), ShiftSet.of(0.015, 0.025 - 0.003j), 500.0, 0.2)
        gaps = swap_symmetry_check(cfg)
        self.assertLess(gaps["m0"], 1e-8)
        self.assertLess(gaps["m1"], 1e-8)

    @slow()
    @budget(1200)
    @number("8.16")
    def test_residual_shrinks_with_height(self):
        configs = [MomentConfig.standard(2, 2, T, 0.2) for T in (500.0, 1000.0, 2000.0)]
        ratios, decreasing = residual_trend(consistency_report(configs))
        self.assertTrue(decreasing, ratios)
        self.assertLess(ratios[-1], 0.15)


class TestDiagnostics(unittest.TestCase):

    @number("8.17")
    def test_residual_trend(self):
        reports = [_report(1000.0, 10.0, 0.5), _report(500.0, 10.0, 1.0), _report(2000.0, 10.0, 0.2)]
        ratios, decreasing = residual_trend(reports)
        np.testing.assert_allclose(ratios, [0.1, 0.05, 0.02])
        self.assertTrue(decreasing)
        self.assertFalse(residual_trend([_report(500.0, 10.0, 0.1), _report(1000.0, 10.0, 0.2)])[1])

    @number("8.18")
    def test_range_lint(self):
        cfg = MomentConfig.standard(2, 2, 1000.0, 0.2)
        self.assertTrue(asymptotic_range_lint(cfg, theta=0.5, C=0.0).in_range)
        self.assertFalse(asymptotic_range_lint(cfg).in_range)
        flat = asymptotic_range_lint(MomentConfig.standard(2, 2, 1000.0, 0.0), theta=0.5, C=0.0)
        self.assertFalse(flat.in_range)
        self.assertTrue(any("eta" in m for m in flat.messages))
        wide = asymptotic_range_lint(MomentConfig.standard(2, 2, 1000.0, 0.5), theta=0.5, C=0.0)
        self.assertTrue(any("1/3" in m for m in wide.messages))

    @number("8.19")
    def test_gamma_merge_improves_with_height(self):
        gaps = gamma_quotient_sum_check(trials=10)
        self.assertLess(gaps[1e4], gaps[1e3])
