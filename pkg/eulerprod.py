"""
Euler products and Dirichlet series built from shifted divisor sums.

For shift sets I = {a_i}, J = {b_j}:

- g_A, G_A: the multiplicative functions attached to sum_j sigma_A(jn) j^{-s}
- B(I, J) = sum sigma_I(n) sigma_J(n) / n and Z_{I,J}(s) = sum sigma_I sigma_J n^{-1-s}
- A_{I,J}(s) = Z_{I,J}(s) / prod zeta(1 + s + a_i + b_j)
- H and its arithmetic factor C for a selected pair (a_{i1}, b_{i2})

Every truncated product reports the tail it dropped. Local series lengths
depend only on the sizes (k, l), the real-part growth of the shifts, Re s and
the policy, so the truncation behaves the same way for every member of a
family of shifted sets.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Sequence

import numpy as np

from arithcore import (ShiftSet, divisors, euler_phi, factorize, local_sigma_series, mobius,
                       multiplicative_table, primes_up_to, sieve_sigma)
from config import TruncationPolicy, get_logger
from errors import AccuracyError, DivergenceError, PoleError, RegimeError
from specfun import zeta, zeta_many
from sympoly import MAX_POWER, MAX_VARIABLES, elem_sym, q_coefficients, q_values

logger = get_logger(__name__)

DISTINCT_FLOOR = 1e-9
_CHUNK = 256


@dataclass
class LocalSeries:
    """sum_j sigma_A(p^j) x^j truncated after truncation_len terms."""

    prime: int
    coefficients: np.ndarray
    truncation_len: int
    tail_bound: float

    def __post_init__(self):
        if self.coefficients[0] != 1:
            raise ValueError("a local series starts with 1")

    def evaluate(self, x: complex) -> complex:
        return complex(np.polynomial.polynomial.polyval(x, self.coefficients))


@dataclass
class ProductResult:
    value: complex
    prime_cutoff: int
    tail_estimate: float

    def relative_gap(self, other: complex) -> float:
        return abs(self.value - other) / max(abs(other), 1e-300)


@dataclass
class SeriesResult:
    """A truncated double series: cutoffs are (R_max, Q_max)."""

    value: complex
    cutoffs: tuple[int, int]
    tail_estimate: float


def growth(A: ShiftSet) -> float:
    """Smallest g >= 0 with |p^{-a}| <= p^g for every a in A."""
    return max(0.0, max(-a.real for a in A))


def spread(A: ShiftSet) -> float:
    """Smallest g >= 0 with |p^{a}|, |p^{-a}| <= p^g for every a in A."""
    return max(abs(a.real) for a in A)


def z_local(p: int, s: complex) -> complex:
    """z_p(s) = (1 - p^{-s})^{-1}."""
    return 1.0 / (1.0 - p ** (-complex(s)))


def series_lengths(rho: np.ndarray, k: int, l: int, tol: float, cap: int) -> tuple[np.ndarray, np.ndarray]:
    """
    Per-prime lengths L with
    C(L+k, k-1) C(L+l, l-1) rho^{L+1} / (1 - rho)^{k+l} <= tol,
    capped at cap. Returns the lengths and the tail bounds they achieve.
    """
    rho = np.atleast_1d(np.asarray(rho, dtype=float))
    if np.any(rho >= 1):
        raise DivergenceError("local series ratio reaches 1")
    lengths = np.full(rho.shape, cap, dtype=np.int64)
    tails = np.zeros(rho.shape)
    open_ = np.ones(rho.shape, dtype=bool)
    denominator = (1.0 - rho) ** (k + l)
    for L in range(1, cap + 1):
        bound = math.comb(L + k, k - 1) * math.comb(L + l, l - 1) * rho ** (L + 1) / denominator
        hit = open_ & (bound <= tol)
        lengths[hit] = L
        tails[hit] = bound[hit]
        open_ &= ~hit
        if not open_.any():
            break
        if L == cap:
            tails[open_] = bound[open_]
    return lengths, tails


def local_series(A: ShiftSet, p: int, x_modulus: float, tol: float = 1e-15, cap: int = 400) -> LocalSeries:
    """sum_j sigma_A(p^j) x^j for |x| = x_modulus, with its geometric tail bound."""
    rho = x_modulus * p ** growth(A)
    lengths, tails = series_lengths(np.array([rho]), A.k, 1, tol, cap)
    L = int(lengths[0])
    coefficients = local_sigma_series(A.shifts, np.array([p]), L)[0]
    return LocalSeries(p, coefficients, L, float(tails[0]))


# ---------------------------------------------------------------------------
# g_A and G_A


def g_local(A: ShiftSet, s: complex, n: int, tol: float = 1e-15, cap: int = 400,
            margin: float = 1e-3) -> complex:
    """
    g_A(s, n) = prod_{p^e || n} (sum_j sigma_A(p^{j+e}) p^{-js}) / (sum_j sigma_A(p^j) p^{-js}).

    The denominator is prod_a (1 - p^{-s-a})^{-1}; the numerator series is
    cut where its certified tail falls below tol.

    Raises:
    - DivergenceError if Re(s + a) <= margin for some a
    - AccuracyError if cap terms are not enough
    """
    s = complex(s)
    if n < 1:
        raise ValueError("g_A needs n >= 1")
    if min((s + a).real for a in A) <= margin:
        raise DivergenceError("g_A needs Re(s + a) > 0 for every shift")
    value = 1 + 0j
    for p, e in factorize(n):
        rho = p ** (-min((s + a).real for a in A))
        lengths, tails = series_lengths(np.array([rho]), A.k + e, 1, tol, cap)
        L = int(lengths[0])
        if tails[0] > tol:
            raise AccuracyError(f"g_A series at p={p} needs more than {cap} terms", float(tails[0]))
        coefficients = local_sigma_series(A.shifts, np.array([p]), L + e)[0]
        x = p ** (-s)
        numerator = complex(np.polynomial.polynomial.polyval(x, coefficients[e:]))
        inverse_denominator = np.prod([1 - x * p ** (-a) for a in A])
        value *= numerator * inverse_denominator
    return value


def G_cap(A: ShiftSet, s: complex, n: int, **kwargs) -> complex:
    """
    G_A(s, n) = sum_{d|n} mu(d) d^s / phi(d) sum_{e|d} mu(e) e^{-s} g_A(s, n e / d),
    straight from the definition.
    """
    s = complex(s)
    total = 0j
    for d in divisors(n):
        mu_d = mobius(d)
        if mu_d == 0:
            continue
        inner = sum(mobius(e) * e ** (-s) * g_local(A, s, n * e // d, **kwargs)
                    for e in divisors(d) if mobius(e))
        total += mu_d * d**s / euler_phi(d) * inner
    return total


def G_closed_form(X: ShiftSet, s: complex, p: int, j: int) -> complex:
    """
    G_X(s, p^j) for distinct shifts x_i:

        prod_i (1 - p^{-s-x_i}) / (p - 1)
          * sum_i (p^{1 - x_i j} - p^{s - x_i (j-1)}) / (1 - p^{-x_i-s}) * prod_{l != i} (1 - p^{x_i - x_l})^{-1}

    Raises:
    - CoincidentShiftError when two shifts coincide
    """
    if j < 1:
        raise ValueError("closed form needs j >= 1")
    X.require_distinct(X.min_separation or DISTINCT_FLOOR)
    s = complex(s)
    front = np.prod([1 - p ** (-s - x) for x in X]) / (p - 1)
    total = 0j
    for i, x in enumerate(X):
        term = (p ** (1 - x * j) - p ** (s - x * (j - 1))) / (1 - p ** (-x - s))
        for l, y in enumerate(X):
            if l != i:
                term /= 1 - p ** (x - y)
        total += term
    return complex(front * total)


@lru_cache(maxsize=None)
def _exact_q(n: int, m: int):
    return tuple(q_coefficients(n, m))


def _first_shift_split(I: ShiftSet, i1: int) -> tuple[complex, list[complex]]:
    if not 0 <= i1 < I.k:
        raise IndexError(f"shift index {i1} out of range")
    return I[i1], [a for i, a in enumerate(I) if i != i1]


def G_first_shift(I: ShiftSet, i1: int, p: int, n: int) -> complex:
    """
    G_I(1 - a_{i1}, p^n) = sum_{j=0}^{k-2} q_{n,j}(X_rest) (X_{i1}^{-1} / p)^j, X_i = p^{-a_i}.

    Exact q coefficients are used up to n = 8; beyond that the same sum is
    evaluated numerically. For k = 1 the value is 0 at every n >= 1.

    Raises:
    - CoincidentShiftError when two shifts coincide
    """
    if n < 0:
        raise ValueError("n must be non-negative")
    if n == 0:
        return 1 + 0j
    I.require_distinct(I.min_separation or DISTINCT_FLOOR)
    first, rest = _first_shift_split(I, i1)
    if not rest:
        return 0j
    X = [p ** (-a) for a in rest]
    Z = p**first / p
    if n <= MAX_POWER and len(rest) <= MAX_VARIABLES:
        e = elem_sym(X)[1:]
        return complex(sum(q.evaluate(e) * Z**j for j, q in enumerate(_exact_q(n, len(rest)))))
    return complex(q_values(n, X, Z)[()])


def _G_prime_powers(I: ShiftSet, i1: int, primes: np.ndarray, n: int) -> np.ndarray:
    """G_I(1 - a_{i1}, p^n) for an array of primes."""
    primes = np.asarray(primes, dtype=float)
    if n == 0:
        return np.ones(primes.shape, dtype=complex)
    first, rest = _first_shift_split(I, i1)
    if not rest:
        return np.zeros(primes.shape, dtype=complex)
    log_p = np.log(primes)
    X = [np.exp(-a * log_p) for a in rest]
    Z = np.exp((first - 1) * log_p)
    return q_values(n, X, Z)


def G_first_shift_table(I: ShiftSet, i1: int, primes, n_max: int) -> np.ndarray:
    """Array of shape (len(primes), n_max + 1) with G_I(1 - a_{i1}, p^n)."""
    I.require_distinct(I.min_separation or DISTINCT_FLOOR)
    primes = np.atleast_1d(np.asarray(primes))
    table = np.empty((primes.size, n_max + 1), dtype=complex)
    for n in range(n_max + 1):
        table[:, n] = _G_prime_powers(I, i1, primes, n)
    return table


def G_first_shift_values(I: ShiftSet, i1: int, q_max: int, cap: int | None = None) -> np.ndarray:
    """G_I(1 - a_{i1}, q) for q <= q_max, multiplicatively from prime powers."""
    I.require_distinct(I.min_separation or DISTINCT_FLOOR)

    def local(primes: np.ndarray, exponents: np.ndarray) -> np.ndarray:
        out = np.empty(len(primes), dtype=complex)
        for e in np.unique(exponents):
            sel = exponents == e
            out[sel] = _G_prime_powers(I, i1, primes[sel], int(e))
        return out

    return multiplicative_table(q_max, local, complex, cap)


# ---------------------------------------------------------------------------
# A, Z and B


def _check_regime(I: ShiftSet, J: ShiftSet, s: np.ndarray, policy: TruncationPolicy) -> float:
    g = growth(I) + growth(J)
    floor = -0.5 + g + policy.pole_margin
    if np.any(s.real <= floor):
        raise RegimeError(f"Re(s) must exceed {floor:.4g} for these shifts")
    return g


def _check_poles(I: ShiftSet, J: ShiftSet, s: np.ndarray, offset: float, margin: float,
                 skip: tuple[int, int] | None = None) -> None:
    for i, a in enumerate(I):
        for j, b in enumerate(J):
            if (i, j) == skip:
                continue
            pole = offset - a - b
            close = np.abs(s - pole) < margin
            if np.any(close):
                raise PoleError(f"too close to the pole s = {pole:.6g} of the ({i}, {j}) factor",
                                complex(pole), (i, j))


def _prime_list(policy: TruncationPolicy) -> np.ndarray:
    return primes_up_to(policy.prime_cutoff)


def _product_tail(count: float, exponent: float, cutoff: int) -> float:
    """count * sum_{p > P} p^{exponent}, bounded by the prime number theorem integral."""
    if exponent >= -1:
        raise DivergenceError("Euler product tail does not converge")
    return count * cutoff ** (exponent + 1) / (-(exponent + 1) * math.log(cutoff))


def _horner(coefficients: np.ndarray, counts: list[int], x: np.ndarray) -> np.ndarray:
    """sum_u coefficients[p, u] x[:, p]^u with column u only over the first counts[u] primes."""
    L = coefficients.shape[1] - 1
    acc = np.zeros(x.shape, dtype=complex)
    for u in range(L, -1, -1):
        upto = counts[u]
        if upto == 0:
            continue
        acc[:, :upto] = acc[:, :upto] * x[:, :upto] + coefficients[None, :upto, u]
    return acc


def _A_coefficients(I: ShiftSet, J: ShiftSet, primes: np.ndarray, sigma: float, g: float,
                    policy: TruncationPolicy):
    rho = primes.astype(float) ** (g - 1 - sigma)
    lengths, tails = series_lengths(rho, I.k, J.k, policy.target_tol * 1e-3, policy.series_length)
    L = int(lengths.max())
    sig_I = local_sigma_series(I.shifts, primes, L, lengths)
    sig_J = local_sigma_series(J.shifts, primes, L, lengths)
    powers = primes.astype(float)[:, None] ** -np.arange(L + 1)[None, :]
    coefficients = sig_I * sig_J * powers
    counts = [int(np.count_nonzero(lengths >= u)) for u in range(L + 1)]
    logger.debug("A coefficients: %d primes, lengths %d..%d", len(primes), lengths.min(), L)
    return coefficients, counts, float(tails.sum())


def A_product_many(I: ShiftSet, J: ShiftSet, s,
                   policy: TruncationPolicy = TruncationPolicy()) -> tuple[np.ndarray, float]:
    """
    A_{I,J}(s) = prod_p (sum_j sigma_I(p^j) sigma_J(p^j) p^{-j(1+s)}) prod_{i,j} (1 - p^{-1-s-a_i-b_j})
    for an array of s, with one tail estimate for the whole array.
    """
    s = np.atleast_1d(np.asarray(s, dtype=complex))
    g = _check_regime(I, J, s, policy)
    sigma = float(s.real.min())
    primes = _prime_list(policy)
    coefficients, counts, series_tail = _A_coefficients(I, J, primes, sigma, g, policy)
    log_p = np.log(primes.astype(float))
    pair_factors = np.array([np.exp(-(1 + a + b) * log_p) for a in I for b in J])
    out = np.empty(s.shape, dtype=complex)
    for chunk in np.array_split(np.arange(s.size), max(1, s.size // _CHUNK)):
        x = np.exp(-np.multiply.outer(s[chunk], log_p))
        local = _horner(coefficients, counts, x)
        for factor in pair_factors:
            local *= 1 - factor[None, :] * x
        out[chunk] = np.prod(local, axis=1)
    tail = _product_tail((I.k * J.k) ** 2, -2 - 2 * sigma + 2 * g, int(policy.prime_cutoff)) + series_tail
    return out, tail


def A_product(I: ShiftSet, J: ShiftSet, s: complex, policy: TruncationPolicy = TruncationPolicy()) -> ProductResult:
    """
    A_{I,J}(s) over p <= policy.prime_cutoff.

    Examples:
    - I = J = {0, 0}, s = 0: 1/zeta(2)
    """
    values, tail = A_product_many(I, J, np.array([s]), policy)
    return ProductResult(complex(values[0]), policy.prime_cutoff, tail)


def A_local(I: ShiftSet, J: ShiftSet, p: int, s: complex, policy: TruncationPolicy = TruncationPolicy()) -> complex:
    s = complex(s)
    g = growth(I) + growth(J)
    coefficients, counts, _ = _A_coefficients(I, J, np.array([p]), s.real, g, policy)
    x = np.array([[p ** (-s)]])
    local = _horner(coefficients, counts, x)[0, 0]
    for a in I:
        for b in J:
            local *= 1 - p ** (-1 - s - a - b)
    return complex(local)


def Z_many(I: ShiftSet, J: ShiftSet, s, policy: TruncationPolicy = TruncationPolicy()) -> tuple[np.ndarray, float]:
    s = np.atleast_1d(np.asarray(s, dtype=complex))
    _check_poles(I, J, s, 0.0, policy.pole_margin)
    values, tail = A_product_many(I, J, s, policy)
    for a in I:
        for b in J:
            values = values * zeta_many(1 + s + a + b)
    return values, tail


def Z_eval(I: ShiftSet, J: ShiftSet, s: complex, policy: TruncationPolicy = TruncationPolicy()) -> ProductResult:
    """
    Z_{I,J}(s) = prod_{i,j} zeta(1 + s + a_i + b_j) * A_{I,J}(s).

    Raises:
    - PoleError naming the (i, j) factor when s is within pole_margin of -a_i - b_j
    - RegimeError for Re(s) too far left
    """
    values, tail = Z_many(I, J, np.array([s]), policy)
    return ProductResult(complex(values[0]), policy.prime_cutoff, tail)


def Z_direct(I: ShiftSet, J: ShiftSet, s: complex, N: int, cap: int | None = None) -> complex:
    """sum_{n <= N} sigma_I(n) sigma_J(n) n^{-1-s}."""
    n = np.arange(1, N + 1, dtype=float)
    terms = sieve_sigma(I, N, cap).values[1:] * sieve_sigma(J, N, cap).values[1:]
    return complex(np.sum(terms * np.exp(-(1 + complex(s)) * np.log(n))))


def Z_residue_probe(I: ShiftSet, J: ShiftSet, i: int, j: int, offsets: Sequence[float] = (1e-4, 1e-5),
                    policy: TruncationPolicy = TruncationPolicy()) -> list[complex]:
    """(s - pole) Z_{I,J}(s) at s = pole + offset for the (i, j) pole s = -a_i - b_j."""
    pole = -I[i] - J[j]
    out = []
    for eps in offsets:
        probe = policy.with_overrides(pole_margin=min(policy.pole_margin, eps / 10))
        out.append(eps * Z_eval(I, J, pole + eps, probe).value)
    return out


def B_series(I: ShiftSet, J: ShiftSet, N: int, cap: int | None = None) -> complex:
    """
    sum_{n <= N} sigma_I(n) sigma_J(n) / n.

    Raises:
    - RegimeError unless Re(a_i + b_j) > 0 for every pair
    """
    if min((a + b).real for a in I for b in J) <= 0:
        raise RegimeError("the B series needs Re(a + b) > 0 for every pair")
    return Z_direct(I, J, 0.0, N, cap)


def B_eulerized(I: ShiftSet, J: ShiftSet, cutoff: int, policy: TruncationPolicy = TruncationPolicy()) -> ProductResult:
    """
    prod_{p <= cutoff} sum_j sigma_I(p^j) sigma_J(p^j) p^{-j}; the tail is the
    first-order part sum_{p > cutoff} sum_{i,j} p^{-1-Re(a_i+b_j)}.
    """
    slack = min((a + b).real for a in I for b in J)
    if slack <= 0:
        raise RegimeError("the B product needs Re(a + b) > 0 for every pair")
    local_policy = policy.with_overrides(prime_cutoff=cutoff)
    primes = _prime_list(local_policy)
    g = growth(I) + growth(J)
    coefficients, counts, series_tail = _A_coefficients(I, J, primes, 0.0, g, local_policy)
    x = np.ones((1, primes.size), dtype=complex)
    value = complex(np.prod(_horner(coefficients, counts, x)))
    tail = _product_tail(I.k * J.k, -1 - slack, cutoff) + series_tail
    return ProductResult(value, cutoff, tail)


def B_closed_form_22(I: ShiftSet, J: ShiftSet) -> complex:
    """k = l = 2: prod zeta(1 + a_i + b_j) / zeta(2 + a_1 + a_2 + b_1 + b_2)."""
    if I.k != 2 or J.k != 2:
        raise ValueError("closed form only for two shifts on each side")
    top = np.prod([zeta(1 + a + b) for a in I for b in J])
    return complex(top / zeta(2 + sum(I) + sum(J)))


def B_value(I: ShiftSet, J: ShiftSet, policy: TruncationPolicy = TruncationPolicy()) -> ProductResult:
    """B(I, J) = Z_{I,J}(0), valid wherever the factorized form is."""
    return Z_eval(I, J, 0.0, policy)


# ---------------------------------------------------------------------------
# C and H


def _theta(sigma: float) -> float:
    if sigma >= 0:
        return -2.0
    if sigma >= -0.5:
        return -2.0 - sigma
    return -3.0 - 3.0 * sigma


def _C_tail_exponent(sigma: float, g: float) -> float:
    return max(2 * g - 2 - 2 * sigma, 4 * g + _theta(sigma))


def _C_coefficients(I: ShiftSet, J: ShiftSet, i1: int, i2: int, primes: np.ndarray, sigma: float,
                    g: float, policy: TruncationPolicy):
    rho = primes.astype(float) ** (g - 1 - sigma)
    lengths, tails = series_lengths(rho, I.k, J.k, policy.target_tol * 1e-3, policy.series_length)
    L = int(lengths.max())
    table = G_first_shift_table(I, i1, primes, L) * G_first_shift_table(J, i2, primes, L)
    powers = primes.astype(float)[:, None] ** -np.arange(L + 1)[None, :]
    coefficients = table * powers
    coefficients[:, 0] = 0.0
    for u in range(L + 1):
        coefficients[lengths < u, u] = 0.0
    counts = [int(np.count_nonzero(lengths >= u)) for u in range(L + 1)]
    return coefficients, counts, float(tails.sum())


def _C_locals(I: ShiftSet, J: ShiftSet, i1: int, i2: int, primes: np.ndarray, s: np.ndarray,
              g: float, policy: TruncationPolicy) -> tuple[np.ndarray, float]:
    """Local factors C(p; s), shape (len(s), len(primes))."""
    coefficients, counts, series_tail = _C_coefficients(I, J, i1, i2, primes, float(s.real.min()), g, policy)
    a, b = I[i1], J[i2]
    log_p = np.log(primes.astype(float))
    pairs = [(x, y) for k1, x in enumerate(I) if k1 != i1 for k2, y in enumerate(J) if k2 != i2]
    x = np.exp(-np.multiply.outer(s, log_p))
    series = _horner(coefficients, counts, x)
    shift_factor = 1 - np.exp((a + b - 1) * log_p)[None, :] / x
    local = 1 + shift_factor * series
    for x_shift, y_shift in pairs:
        local *= 1 - np.exp(-(1 + x_shift + y_shift) * log_p)[None, :] * x
    return local, series_tail


def C_local(I: ShiftSet, J: ShiftSet, i1: int, i2: int, p: int, s: complex,
            policy: TruncationPolicy = TruncationPolicy()) -> complex:
    """
    C(p; s) = (1 + sum_{j>=1} G_I(1-a, p^j) G_J(1-b, p^j) (1 - p^{a+b+s-1}) / p^{j(1+s)})
              * prod_{k1 != i1, k2 != i2} (1 - p^{-1-a_k1-b_k2-s})
    """
    g = spread(I) + spread(J)
    local, _ = _C_locals(I, J, i1, i2, np.array([p]), np.array([complex(s)]), g, policy)
    return complex(local[0, 0])


def C_product_many(I: ShiftSet, J: ShiftSet, i1: int, i2: int, s,
                   policy: TruncationPolicy = TruncationPolicy()) -> tuple[np.ndarray, float]:
    s = np.atleast_1d(np.asarray(s, dtype=complex))
    I.require_distinct(I.min_separation or DISTINCT_FLOOR)
    J.require_distinct(J.min_separation or DISTINCT_FLOOR)
    g = spread(I) + spread(J)
    sigma = float(s.real.min())
    if sigma <= -0.5 + g + policy.pole_margin:
        raise RegimeError(f"C needs Re(s) > {-0.5 + g:.4g}")
    primes = _prime_list(policy)
    out = np.empty(s.shape, dtype=complex)
    series_tail = 0.0
    for chunk in np.array_split(np.arange(s.size), max(1, s.size // _CHUNK)):
        local, series_tail = _C_locals(I, J, i1, i2, primes, s[chunk], g, policy)
        out[chunk] = np.prod(local, axis=1)
    pair_count = max(1, (I.k - 1) * (J.k - 1)) ** 2
    tail = _product_tail(pair_count, _C_tail_exponent(sigma, g), int(policy.prime_cutoff)) + series_tail
    return out, tail


def C_product(I: ShiftSet, J: ShiftSet, i1: int, i2: int, s: complex,
              policy: TruncationPolicy = TruncationPolicy()) -> ProductResult:
    values, tail = C_product_many(I, J, i1, i2, np.array([s]), policy)
    return ProductResult(complex(values[0]), policy.prime_cutoff, tail)


def C_expansion_remainder(I: ShiftSet, J: ShiftSet, i1: int, i2: int, s: complex, primes: Sequence[int],
                          policy: TruncationPolicy = TruncationPolicy()) -> list[float]:
    """
    |C(p; s) - (1 - sum_{|S|=|T|=2} p^{-S-T} p^{-2-2s})| / p^{4g + theta(Re s)} for each p,
    with S, T running over pairs of the unselected shifts.
    """
    s = complex(s)
    g = spread(I) + spread(J)
    rest_I = [a for i, a in enumerate(I) if i != i1]
    rest_J = [b for j, b in enumerate(J) if j != i2]
    pair_sums_I = [rest_I[u] + rest_I[v] for u in range(len(rest_I)) for v in range(u + 1, len(rest_I))]
    pair_sums_J = [rest_J[u] + rest_J[v] for u in range(len(rest_J)) for v in range(u + 1, len(rest_J))]
    out = []
    for p in primes:
        expansion = 1 - sum(p ** (-x - y) for x in pair_sums_I for y in pair_sums_J) * p ** (-2 - 2 * s)
        remainder = abs(C_local(I, J, i1, i2, p, s, policy) - expansion)
        out.append(remainder / p ** (4 * g + _theta(s.real)))
    return out


def _H_zeta_factors(I: ShiftSet, J: ShiftSet, i1: int, i2: int, s: np.ndarray) -> np.ndarray:
    a, b = I[i1], J[i2]
    values = zeta_many(a + b + s)
    for k1, x in enumerate(I):
        for k2, y in enumerate(J):
            if k1 != i1 and k2 != i2:
                values = values * zeta_many(1 + x + y + s)
    return values


def _check_H_poles(I: ShiftSet, J: ShiftSet, i1: int, i2: int, s: np.ndarray, margin: float) -> None:
    main = 1 - I[i1] - J[i2]
    if np.any(np.abs(s - main) < margin):
        raise PoleError(f"too close to the pole s = {main:.6g} of H", complex(main), (i1, i2))
    for k1, x in enumerate(I):
        for k2, y in enumerate(J):
            if k1 != i1 and k2 != i2 and np.any(np.abs(s + x + y) < margin):
                raise PoleError(f"too close to the pole s = {-x - y:.6g} of H", complex(-x - y), (k1, k2))


def H_eval_many(I: ShiftSet, J: ShiftSet, i1: int, i2: int, s,
                policy: TruncationPolicy = TruncationPolicy()) -> tuple[np.ndarray, float]:
    s = np.atleast_1d(np.asarray(s, dtype=complex))
    _check_H_poles(I, J, i1, i2, s, policy.pole_margin)
    values, tail = C_product_many(I, J, i1, i2, s, policy)
    return values * _H_zeta_factors(I, J, i1, i2, s), tail


def H_eval(I: ShiftSet, J: ShiftSet, i1: int, i2: int, s: complex,
           policy: TruncationPolicy = TruncationPolicy()) -> ProductResult:
    """
    H = zeta(a_{i1} + b_{i2} + s) prod_{k1 != i1, k2 != i2} zeta(1 + a_k1 + b_k2 + s) * C(s).

    Raises:
    - PoleError within pole_margin of 1 - a_{i1} - b_{i2} or of -(a_k1 + b_k2)
    - RegimeError left of Re(s) = -1/2 + growth
    """
    values, tail = H_eval_many(I, J, i1, i2, np.array([s]), policy)
    return ProductResult(complex(values[0]), policy.prime_cutoff, tail)


def H_closed_form_22(I: ShiftSet, J: ShiftSet, i1: int, i2: int, s: complex) -> complex:
    """k = l = 2: zeta(a + b + s) zeta(1 + a' + b' + s) / zeta(2 - a - b + a' + b')."""
    if I.k != 2 or J.k != 2:
        raise ValueError("closed form only for two shifts on each side")
    a, b = I[i1], J[i2]
    a2, b2 = I[1 - i1], J[1 - i2]
    return zeta(a + b + s) * zeta(1 + a2 + b2 + s) / zeta(2 - a - b + a2 + b2)


def H_direct(I: ShiftSet, J: ShiftSet, i1: int, i2: int, s: complex, R_max: int, Q_max: int,
             cap: int | None = None) -> SeriesResult:
    """
    sum_{r <= R} sum_{q <= Q} c_q(r) G_I(1-a, q) G_J(1-b, q) q^{-2+a+b} r^{-(a+b+s)}.

    The r-sum uses sum_{r <= R} c_q(r) r^{-c} = sum_{d|q} d mu(q/d) d^{-c} sum_{m <= R/d} m^{-c}.

    Raises:
    - RegimeError unless Re(s) > 1 + growth of both sets
    """
    s = complex(s)
    g = spread(I) + spread(J)
    if s.real <= 1 + g:
        raise RegimeError("the double series for H needs Re(s) > 1 + 2 delta")
    a, b = I[i1], J[i2]
    c = a + b + s
    weights = G_first_shift_values(I, i1, Q_max, cap) * G_first_shift_values(J, i2, Q_max, cap)
    q = np.arange(Q_max + 1, dtype=float)
    q[0] = 1.0
    weights = weights * np.exp((-2 + a + b) * np.log(q))
    weights[0] = 0.0
    mu = multiplicative_table(Q_max, lambda p, e: np.where(e == 1, -1, 0), np.int64, cap)
    m = np.arange(1, R_max + 1, dtype=float)
    prefix = np.concatenate([[0j], np.cumsum(np.exp(-c * np.log(m)))])
    inner = np.zeros(Q_max + 1, dtype=complex)
    for d in range(1, Q_max + 1):
        t = np.arange(1, Q_max // d + 1)
        inner[d * t] += d * d ** (-c) * prefix[R_max // d] * mu[t]
    value = complex(np.sum(weights * inner))
    # r tails: |partial sums of c_q| <= sigma(q) <= q (1 + log q), q = 1 handled exactly
    sc = c.real
    r_tail_q1 = R_max ** (1 - sc) / (sc - 1)
    log_q = np.log(q)
    r_tail = 2 * abs(c) / sc * R_max ** (-sc) * float(np.sum(np.abs(weights[2:]) * q[2:] * (1 + log_q[2:])))
    q_tail = 10 * abs(zeta(sc)) * (1 + math.log(Q_max)) * Q_max ** (-1 + 2 * g) / (1 - 2 * g)
    tail = abs(weights[1]) * r_tail_q1 + r_tail + q_tail
    logger.debug("H direct R=%d Q=%d tail %.3e", R_max, Q_max, tail)
    return SeriesResult(value, (R_max, Q_max), tail)


def H_residue_probe(I: ShiftSet, J: ShiftSet, i1: int, i2: int, offsets: Sequence[float] = (1e-4, 1e-5),
                    policy: TruncationPolicy = TruncationPolicy()) -> list[complex]:
    """(s - pole) H(s) at s = pole + offset for the pole 1 - a_{i1} - b_{i2}."""
    pole = 1 - I[i1] - J[i2]
    out = []
    for eps in offsets:
        probe = policy.with_overrides(pole_margin=min(policy.pole_margin, eps / 10))
        out.append(eps * H_eval(I, J, i1, i2, pole + eps, probe).value)
    return out
