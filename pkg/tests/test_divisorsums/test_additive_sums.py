import unittest

from check_utils.decorators import budget, number, slow
from arithcore import ShiftSet, sigma_shift
from errors import CoincidentShiftError, TailTooLargeError
from divisorsums import (AdcHypothesis, BoxKernel, KernelSpec, adc_main_term, adc_sweep, brute_D,
                         brute_D_partitioned, kernel_derivative_check, kernel_eval, q_series_adaptive,
                         q_series_direct, q_series_euler, shift_constant)
from weights import OmegaWeight, w0

I2 = ShiftSet.of(0.01, 0.02)
J2 = ShiftSet.of(0.015, 0.025)


class TestBruteForce(unittest.TestCase):

    @number("6.1")
    def test_against_naive_loop(self):
        X, r = 60.0, 3
        expected = 0j
        for n in range(1, 2 * int(X) + 2):
            weight = float(w0((n + r) / X)) * float(w0(n / X))
            if weight:
                expected += sigma_shift(I2, n + r) * sigma_shift(J2, n) * weight
        self.assertLess(abs(brute_D(BoxKernel(X), I2, J2, r) - expected), 1e-10 * abs(expected))

    @number("6.2")
    def test_negative_shift_and_empty_support(self):
        X = 200.0
        value = brute_D(BoxKernel(X), I2, J2, -5)
        self.assertNotEqual(value, 0j)
        self.assertEqual(brute_D(BoxKernel(X), I2, J2, 500), 0j)

    @number("6.3")
    def test_partition_recovers_total(self):
        kernel = BoxKernel(500.0)
        total = brute_D(kernel, I2, J2, 4)
        split, pieces = brute_D_partitioned(kernel, I2, J2, 4)
        self.assertGreater(len(pieces), 1)
        self.assertLess(abs(split - total), 1e-12 * abs(total))


class TestMainTerm(unittest.TestCase):

    @number("6.4")
    def test_q_series_forms_agree(self):
        for i1, i2 in ((0, 0), (1, 0)):
            direct = q_series_direct(I2, J2, i1, i2, 6, 20_000)
            euler = q_series_euler(I2, J2, i1, i2, 6)
            self.assertLess(abs(direct.value - euler.value), direct.tail_estimate + euler.tail_estimate)

    @number("6.5")
    def test_adaptive_gives_up(self):
        with self.assertRaises(TailTooLargeError) as ctx:
            q_series_adaptive(I2, J2, 0, 0, 6, 1e-12, Q_start=100, Q_cap=400)
        self.assertGreater(ctx.exception.tail, 1e-12)

    @number("6.6")
    def test_shift_constant(self):
        with self.assertRaises(CoincidentShiftError):
            shift_constant(ShiftSet.of(0.01, 0.01), J2, 0, 0)
        self.assertEqual(shift_constant(ShiftSet.of(0.01), ShiftSet.of(0.02), 0, 0), 1 + 0j)

    @number("6.7")
    def test_rejects_diagonal_and_bad_method(self):
        with self.assertRaises(ValueError):
            adc_main_term(BoxKernel(100.0), I2, J2, 0)
        with self.assertRaises(ValueError):
            adc_main_term(BoxKernel(100.0), I2, J2, 1, method="guess")

    @number("6.8")
    def test_sweep_arguments(self):
        with self.assertRaises(ValueError):
            adc_sweep(I2, J2, [1000.0], [0, 1])
        with self.assertRaises(ValueError):
            adc_sweep(I2, J2, [100.0], range(1, 20))
        with self.assertRaises(ValueError):
            AdcHypothesis(theta=1.0)
        empty = adc_sweep(I2, J2, [1000.0], [])
        self.assertEqual(empty.comparisons, [])

    @number("6.9")
    def test_sweep_order(self):
        sweep = adc_sweep(I2, J2, [400.0, 200.0], [2, 1])
        self.assertEqual([(c.X, c.r) for c in sweep.comparisons],
                         [(200.0, 1), (200.0, 2), (400.0, 1), (400.0, 2)])
        self.assertEqual([s.X for s in sweep.summaries], [400.0, 200.0])

    @slow()
    @budget(600)
    @number("6.10")
    def test_main_term_tracks_brute_force(self):
        sweep = adc_sweep(I2, J2, [1e4], range(1, 11))
        self.assertLess(sweep.summaries[0].relative_discrepancy, 0.25)


class TestKernel(unittest.TestCase):

    def setUp(self):
        self.spec = KernelSpec(M=400.0, N=400.0, K=700.0, r=3, omega=OmegaWeight.standard(1000.0))

    @number("6.11")
    def test_support(self):
        self.assertEqual(kernel_eval(self.spec, 300.0, 500.0), 0j)
        self.assertNotEqual(kernel_eval(self.spec, 560.0, 557.0), 0j)
        with self.assertRaises(ValueError):
            KernelSpec(M=1.0, N=1.0, K=1.0, r=0, omega=OmegaWeight.standard(1000.0))

    @number("6.12")
    def test_derivative_scales_finite(self):
        bounds = kernel_derivative_check(self.spec, samples=16)
        self.assertEqual(set(bounds), {(0, 0), (0, 1), (0, 2), (1, 0), (1, 1), (2, 0)})
        for value in bounds.values():
            self.assertGreaterEqual(value, 0.0)
            self.assertLess(value, float("inf"))
