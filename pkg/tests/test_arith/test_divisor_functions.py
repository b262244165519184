import math
import unittest

import numpy as np

from check_utils.decorators import number
from arithcore import (ShiftSet, divisors, factorize, mobius, multiplicative_table, omega_distinct, primes_up_to,
                       ramanujan_sum, ramanujan_table, sieve_sigma, sigma_shift, tau_k)
from errors import BudgetError, CoincidentShiftError
from specfun import zeta


class TestExactArithmetic(unittest.TestCase):

    @number("1.1")
    def test_factorize(self):
        self.assertEqual(factorize(1).pairs, ())
        self.assertEqual(factorize(360).pairs, ((2, 3), (3, 2), (5, 1)))
        self.assertEqual(factorize(360).value, 360)
        with self.assertRaises(ValueError):
            factorize(0)

    @number("1.2")
    def test_tau_k(self):
        self.assertEqual(tau_k(2, 12), 6)
        self.assertEqual(tau_k(3, 8), 10)
        self.assertEqual(tau_k(1, 97), 1)
        self.assertEqual(tau_k(4, 1), 1)
        # tau_2 agrees with counting divisors
        for n in range(1, 200):
            self.assertEqual(tau_k(2, n), len(divisors(n)), f"tau_2({n})")

    @number("1.3")
    def test_tau_k_overflow(self):
        with self.assertRaises(OverflowError):
            tau_k(10**6, 2**64)

    @number("1.4")
    def test_ramanujan_sum(self):
        self.assertEqual(ramanujan_sum(1, 5), 1)
        self.assertEqual(ramanujan_sum(6, 0), 2)
        self.assertEqual(ramanujan_sum(4, 2), -2)
        self.assertEqual(ramanujan_sum(5, 1), -1)
        for r in (1, 2, 6, 12):
            table = ramanujan_table(r, 60)
            for q in range(1, 61):
                self.assertEqual(int(table[q]), ramanujan_sum(q, r), f"c_{q}({r})")

    @number("1.5")
    def test_mobius_sum_vanishes(self):
        for n in range(2, 100):
            self.assertEqual(sum(mobius(d) for d in divisors(n)), 0)

    @number("1.14")
    def test_omega_distinct(self):
        self.assertEqual([omega_distinct(n) for n in (1, 2, 12, 210, 1024)], [0, 1, 2, 4, 1])


class TestShiftedDivisorSums(unittest.TestCase):

    @number("1.6")
    def test_sigma_at_zero_shifts_is_tau(self):
        table = sieve_sigma(ShiftSet.zeros(3), 500)
        for n in (1, 2, 12, 64, 360, 499):
            self.assertAlmostEqual(table[n].real, tau_k(3, n), places=9)
            self.assertAlmostEqual(table[n].imag, 0.0, places=12)

    @number("1.7")
    def test_sigma_matches_definition(self):
        I = ShiftSet.of(0.1, 0.25j, -0.05)
        table = sieve_sigma(I, 200)
        for n in (6, 30, 48, 97, 200):
            brute = 0j
            for d1 in divisors(n):
                for d2 in divisors(n // d1):
                    d3 = n // (d1 * d2)
                    brute += d1 ** -I[0] * d2 ** -I[1] * d3 ** -I[2]
            self.assertAlmostEqual(abs(table[n] - brute), 0.0, places=10)
            self.assertAlmostEqual(abs(sigma_shift(I, n) - brute), 0.0, places=10)

    @number("1.8")
    def test_sigma_table_invariants(self):
        table = sieve_sigma(ShiftSet.of(0.02, 0.01 + 0.03j), 20_000)
        self.assertLess(table.check_invariants(samples=300), 1e-12)

    @number("1.9")
    def test_multiplicative_table_budget(self):
        with self.assertRaises(BudgetError):
            multiplicative_table(1000, lambda p, e: np.ones(len(p)), cap=100)

    @number("1.10")
    def test_primes(self):
        primes = primes_up_to(50).tolist()
        self.assertEqual(primes, [2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41, 43, 47])


class TestShiftSet(unittest.TestCase):

    @number("1.11")
    def test_regime_shifts(self):
        T = 1000.0
        I = ShiftSet.log_regime(3, T, label="I")
        self.assertEqual(I.k, 3)
        self.assertTrue(I.is_real)
        self.assertLessEqual(I.delta_bound, 1 / math.log(T))
        self.assertAlmostEqual(I.separation(), 1 / (10 * math.log(T)))
        I.require_distinct()

    @number("1.12")
    def test_coincident_shifts(self):
        with self.assertRaises(CoincidentShiftError):
            ShiftSet.of(0.01, 0.01, min_separation=1e-3)
        with self.assertRaises(CoincidentShiftError):
            ShiftSet.zeros(2).require_distinct()
        ShiftSet.zeros(1).require_distinct()

    @number("1.13")
    def test_set_operations(self):
        I = ShiftSet.of(0.1, 0.2j)
        self.assertTrue(I.shifted(0.1).multiset_equal(ShiftSet.of(0.2, 0.1 + 0.2j)))
        self.assertTrue(I.without(0).multiset_equal(ShiftSet.of(0.2j)))
        self.assertTrue(I.union([0.3]).multiset_equal(ShiftSet.of(0.3, 0.2j, 0.1)))
        self.assertEqual(I.conjugate()[1], -0.2j)
        self.assertEqual(ShiftSet.from_pairs(I.to_pairs()).shifts, I.shifts)
        with self.assertRaises(ValueError):
            ShiftSet.of(0.5, delta_bound=0.1)


class TestRamanujanTables(unittest.TestCase):

    Q = 10_000

    @classmethod
    def setUpClass(cls):
        cls.mu = np.array([0] + [mobius(n) for n in range(1, cls.Q + 1)], dtype=np.int64)

    def divisor_sum_table(self, r: int) -> np.ndarray:
        # c_q(r) = sum_{d | gcd(q, r)} d mu(q/d)
        c = np.zeros(self.Q + 1, dtype=np.int64)
        for d in divisors(r):
            if d <= self.Q:
                c[d::d] += d * self.mu[1:self.Q // d + 1]
        return c

    @number("1.15")
    def test_table_matches_divisor_sum(self):
        for r in (1, 6, 12, 360, 997):
            np.testing.assert_array_equal(ramanujan_table(r, self.Q)[1:], self.divisor_sum_table(r)[1:], f"r={r}")

    @number("1.16")
    def test_multiplicative_and_gcd_bounded(self):
        q = np.arange(1, self.Q + 1)
        for r in (1, 6, 12, 360):
            c = self.divisor_sum_table(r)
            self.assertTrue(np.all(np.abs(c[1:]) <= np.gcd(q, r)), f"r={r}")
            for q1 in range(2, self.Q // 2 + 1):
                q2 = np.arange(2, self.Q // q1 + 1)
                q2 = q2[np.gcd(q1, q2) == 1]
                if len(q2):
                    np.testing.assert_array_equal(c[q1 * q2], c[q1] * c[q2], f"r={r} q1={q1}")

    @number("1.17")
    def test_dirichlet_series_converges_to_zeta_product(self):
        I, s = ShiftSet.of(0.01, 0.02), 1.5
        target = zeta(s + 0.01) * zeta(s + 0.02)
        table = sieve_sigma(I, 4000).values
        n = np.arange(1, 4001)
        partial = np.cumsum(table[1:].real * n ** -s)
        gaps = [abs(target - partial[N - 1]) for N in (1000, 2000, 4000)]
        self.assertTrue(all(target.real > partial[N - 1] for N in (1000, 2000, 4000)))
        self.assertTrue(gaps[0] > gaps[1] > gaps[2], gaps)
        self.assertLess(gaps[2], 0.5)
