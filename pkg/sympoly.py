"""
Exact algebra of the rational function

    F_a(Y_1, ..., Y_m; Z) = sum_i Y_i^a prod_{l != i} (1 - Z Y_l) / (1 - Y_l / Y_i)

which is a polynomial in Z whose coefficients q_{a,j} are integer polynomials
in the elementary symmetric polynomials e_1, ..., e_m of the Y's.
"""
from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
import sympy

from config import get_logger
from errors import BudgetError, NearCoincidenceError

logger = get_logger(__name__)

MAX_POWER = 8
MAX_VARIABLES = 8
COINCIDENCE_DISTANCE = 1e-6


def _generators(m: int) -> tuple[sympy.Symbol, ...]:
    return sympy.symbols(f"e1:{m + 1}")


@dataclass
class SymPolynomial:
    """
    Integer polynomial in e_1, ..., e_m stored as {exponent vector: coefficient}.
    The Y-degree of a monomial is sum_j j * exponent_j.
    """

    m: int
    terms: dict[tuple[int, ...], int] = field(default_factory=dict)

    def __post_init__(self):
        for exponents, coefficient in self.terms.items():
            if len(exponents) != self.m:
                raise ValueError("exponent vector length must equal m")
            if not isinstance(coefficient, int):
                raise TypeError("coefficients must be integers")
        self.terms = {e: c for e, c in self.terms.items() if c != 0}

    @classmethod
    def from_poly(cls, poly: sympy.Poly, m: int) -> SymPolynomial:
        return cls(m, {tuple(int(x) for x in monomial): int(coefficient)
                       for monomial, coefficient in poly.terms()})

    @classmethod
    def generator(cls, j: int, m: int) -> SymPolynomial:
        """e_j as a SymPolynomial; e_0 = 1 and e_j = 0 beyond m."""
        if j == 0:
            return cls(m, {(0,) * m: 1})
        if j > m or j < 0:
            return cls(m)
        return cls(m, {tuple(int(i == j - 1) for i in range(m)): 1})

    def to_poly(self) -> sympy.Poly:
        gens = _generators(self.m)
        expr = sum((c * sympy.prod([g**k for g, k in zip(gens, e)]) for e, c in self.terms.items()),
                   sympy.Integer(0))
        return sympy.Poly(expr, *gens, domain="ZZ")

    def __add__(self, other: SymPolynomial) -> SymPolynomial:
        out = dict(self.terms)
        for e, c in other.terms.items():
            out[e] = out.get(e, 0) + c
        return SymPolynomial(self.m, out)

    def __neg__(self) -> SymPolynomial:
        return SymPolynomial(self.m, {e: -c for e, c in self.terms.items()})

    def __sub__(self, other: SymPolynomial) -> SymPolynomial:
        return self + (-other)

    def __mul__(self, other):
        if isinstance(other, int):
            return SymPolynomial(self.m, {e: c * other for e, c in self.terms.items()})
        return SymPolynomial.from_poly(self.to_poly() * other.to_poly(), self.m)

    __rmul__ = __mul__

    def __eq__(self, other) -> bool:
        return isinstance(other, SymPolynomial) and self.m == other.m and self.terms == other.terms

    def is_zero(self) -> bool:
        return not self.terms

    def degrees(self) -> set[int]:
        """Y-degrees of the stored monomials."""
        return {sum((j + 1) * k for j, k in enumerate(e)) for e in self.terms}

    def evaluate(self, e_values: Sequence):
        """Substitute numbers (or Fractions, or sympy expressions) for e_1..e_m."""
        total = 0
        for exponents, coefficient in self.terms.items():
            term = coefficient
            for value, k in zip(e_values, exponents):
                if k:
                    term = term * value**k
            total = total + term
        return total

    def substitute(self, Y: Sequence):
        return self.evaluate(elem_sym(Y)[1:])

    def __str__(self) -> str:
        return str(self.to_poly().as_expr()) if self.terms else "0"


def elem_sym(values: Sequence) -> list:
    """
    e_0, ..., e_m of the values: coefficients of prod (1 + x Y_i).
    Works on any ring elements (complex, Fraction, sympy expressions).
    """
    e = [1]
    for y in values:
        e = [a + y * b for a, b in zip(e + [0], [0] + e)]
    return e


def complete_sym(values: Sequence, n: int) -> np.ndarray:
    """
    h_0, ..., h_n of the values, along axis 0. Each value may be an array;
    the result broadcasts over them. Built by multiplying geometric series,
    which avoids the cancellations of the e/h recurrence.
    """
    arrays = [np.asarray(v, dtype=complex) for v in values]
    shape = np.broadcast_shapes(*(a.shape for a in arrays)) if arrays else ()
    h = np.zeros((n + 1,) + shape, dtype=complex)
    h[0] = 1.0
    for y in arrays:
        for j in range(1, n + 1):
            h[j] = h[j] + y * h[j - 1]
    return h


def q_coefficients(a: int, m: int) -> list[SymPolynomial]:
    """
    q_{a,0}, ..., q_{a,m-1} in Z[e_1, ..., e_m].

    The sequence c_a = 1, c_{a-i} = -sum_{u+v=i, u>=1} (-1)^u e_u c_{a-v}
    (1 <= i <= a-1) inverts prod (1 - Z Y_l) up to Z^{a-1}; then
    theta_i = sum_{u+v=i} (-1)^u e_u c_{a-v} and q_{a,j} = -theta_{a+j}.

    Raises:
    - BudgetError when a or m exceeds 8
    """
    if a < 1 or m < 1:
        raise ValueError("need a >= 1 and m >= 1")
    if a > MAX_POWER or m > MAX_VARIABLES:
        raise BudgetError(f"exact q coefficients are capped at a, m <= {MAX_POWER}")
    e = [SymPolynomial.generator(u, m) for u in range(m + 1)]

    def signed_e(u: int) -> SymPolynomial:
        return SymPolynomial(m) if u > m else e[u] * (-1) ** u

    c = {0: SymPolynomial.generator(0, m)}  # keyed by v, holds c_{a-v}
    for i in range(1, a):
        acc = SymPolynomial(m)
        for u in range(1, i + 1):
            acc = acc + signed_e(u) * c[i - u]
        c[i] = -acc
    out = []
    for j in range(m):
        theta = SymPolynomial(m)
        for v in range(a):
            u = a + j - v
            if u <= m:
                theta = theta + signed_e(u) * c[v]
        out.append(-theta)
    logger.debug("q coefficients for a=%d m=%d: %d monomials", a, m, sum(len(q.terms) for q in out))
    return out


def q_values(a: int, Y: Sequence, Z, terms: int | None = None) -> np.ndarray:
    """
    sum_j q_{a,j}(Y) Z^j numerically via q_{a,j} = sum_{u<=j} (-1)^u e_u h_{a+j-u}.
    Y entries and Z may be arrays; the result broadcasts over all of them.
    """
    m = len(Y)
    terms = m if terms is None else terms
    Z = np.asarray(Z, dtype=complex)
    h = complete_sym(Y, a + terms)
    e = elem_sym([np.asarray(y, dtype=complex) for y in Y])
    total = np.zeros(np.broadcast_shapes(h.shape[1:], Z.shape), dtype=complex)
    power = np.ones_like(total)
    for j in range(terms):
        q = sum((-1) ** u * e[u] * h[a + j - u] for u in range(min(j, m) + 1))
        total = total + q * power
        power = power * Z
    return total


def f_direct(a: int, Y: Sequence, Z):
    """
    F_a evaluated term by term.

    Raises:
    - NearCoincidenceError when two Y's are closer than 1e-6 or some Y is 0
    """
    Y = list(Y)
    for i, y in enumerate(Y):
        if y == 0:
            raise NearCoincidenceError("F_a needs nonzero Y")
        for x in Y[i + 1:]:
            if abs(x - y) < COINCIDENCE_DISTANCE:
                raise NearCoincidenceError(f"Y values {x} and {y} are closer than {COINCIDENCE_DISTANCE}")
    total = 0
    for i, yi in enumerate(Y):
        term = yi**a
        for l, yl in enumerate(Y):
            if l != i:
                term = term * (1 - Z * yl) / (1 - yl / yi)
        total = total + term
    return total


@dataclass
class CombReport:
    a: int
    m: int
    trials: int
    max_discrepancy: float
    max_symmetry_defect: float
    tolerance: float = 1e-9

    @property
    def passed(self) -> bool:
        return self.max_discrepancy <= self.tolerance and self.max_symmetry_defect <= self.tolerance


def _random_points(rng: np.random.Generator, m: int, separation: float = 0.25) -> list[complex]:
    while True:
        Y = [cmath.rect(rng.uniform(0.5, 2.0), rng.uniform(0, 2 * math.pi)) for _ in range(m)]
        if all(abs(x - y) >= separation for i, x in enumerate(Y) for y in Y[i + 1:]):
            return Y


def verify_comb_identity(a: int, m: int, trials: int = 100, seed: int = 0,
                         zero_z: bool = False) -> CombReport:
    """
    Compares f_direct against sum_j q_{a,j}(e(Y)) Z^j at random points and
    checks that F_a is symmetric in the Y's under 10 permutations per trial.
    """
    q = q_coefficients(a, m)
    rng = np.random.default_rng(seed)
    worst = worst_perm = 0.0
    for _ in range(trials):
        Y = _random_points(rng, m)
        Z = 0j if zero_z else cmath.rect(rng.uniform(0, 2), rng.uniform(0, 2 * math.pi))
        direct = f_direct(a, Y, Z)
        e = elem_sym(Y)[1:]
        series = sum(qj.evaluate(e) * Z**j for j, qj in enumerate(q))
        worst = max(worst, abs(direct - series) / (1 + abs(direct)))
        for _ in range(10):
            permuted = [Y[i] for i in rng.permutation(m)]
            worst_perm = max(worst_perm, abs(f_direct(a, permuted, Z) - direct) / (1 + abs(direct)))
    report = CombReport(a, m, trials, worst, worst_perm)
    logger.info("comb identity a=%d m=%d: max discrepancy %.3e", a, m, worst)
    return report
