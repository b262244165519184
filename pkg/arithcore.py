"""
Exact integer arithmetic and sieving for multiplicative functions.

Factorizations come from sympy; bulk tables are built with numpy on top of a
smallest-prime-factor sieve, so a table of size N costs a handful of passes
over arrays of length N rather than N Python-level iterations.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Iterable, Sequence

import numpy as np
from sympy import divisors as sympy_divisors
from sympy import factorint, isprime, totient

from config import TruncationPolicy, get_logger
from errors import BudgetError, CoincidentShiftError

logger = get_logger(__name__)

UINT64_MAX = 2**64 - 1


@dataclass(frozen=True)
class ShiftSet:
    """
    An ordered multiset of small complex shifts with its regime metadata.

    delta_bound defaults to the largest modulus present; min_separation of 0
    means coincident shifts are allowed.
    """

    shifts: tuple[complex, ...]
    delta_bound: float | None = None
    min_separation: float = 0.0
    label: str = ""

    def __post_init__(self):
        shifts = tuple(complex(a) for a in self.shifts)
        if len(shifts) < 1:
            raise ValueError("A shift set needs at least one shift")
        object.__setattr__(self, "shifts", shifts)
        largest = max(abs(a) for a in shifts)
        if self.delta_bound is None:
            object.__setattr__(self, "delta_bound", largest)
        if self.delta_bound < 0 or self.min_separation < 0:
            raise ValueError("delta_bound and min_separation must be non-negative")
        if largest > self.delta_bound * (1 + 1e-12):
            raise ValueError(f"shift of modulus {largest} exceeds delta_bound {self.delta_bound}")
        if self.min_separation > 0 and self.separation() < self.min_separation * (1 - 1e-12):
            raise CoincidentShiftError(
                f"shifts of {self.label or 'set'} closer than {self.min_separation}"
            )

    @classmethod
    def of(cls, *shifts: complex, **kwargs) -> ShiftSet:
        return cls(tuple(shifts), **kwargs)

    @classmethod
    def zeros(cls, k: int, label: str = "") -> ShiftSet:
        return cls((0j,) * k, delta_bound=0.0, label=label)

    @classmethod
    def log_regime(cls, k: int, T: float, offset: float = 0.0, label: str = "") -> ShiftSet:
        """Shifts (j + offset)/(10 log T), j = 1..k: of size 1/log T and spaced by 1/(10 log T)."""
        scale = 1.0 / (10.0 * math.log(T))
        shifts = tuple((j + offset) * scale for j in range(1, k + 1))
        return cls(shifts, min_separation=0.999 * scale if k > 1 else 0.0, label=label)

    @classmethod
    def from_pairs(cls, pairs: Iterable[Sequence[float]], **kwargs) -> ShiftSet:
        return cls(tuple(complex(re, im) for re, im in pairs), **kwargs)

    def to_pairs(self) -> list[list[float]]:
        return [[a.real, a.imag] for a in self.shifts]

    def __len__(self) -> int:
        return len(self.shifts)

    def __iter__(self):
        return iter(self.shifts)

    def __getitem__(self, index: int) -> complex:
        return self.shifts[index]

    @property
    def k(self) -> int:
        return len(self.shifts)

    @property
    def array(self) -> np.ndarray:
        return np.array(self.shifts, dtype=complex)

    @property
    def is_real(self) -> bool:
        return all(a.imag == 0 for a in self.shifts)

    def separation(self) -> float:
        """Smallest pairwise distance, inf for a singleton."""
        best = math.inf
        for i in range(len(self.shifts)):
            for j in range(i + 1, len(self.shifts)):
                best = min(best, abs(self.shifts[i] - self.shifts[j]))
        return best

    def require_distinct(self, margin: float | None = None) -> None:
        threshold = margin if margin is not None else self.min_separation
        if self.k > 1 and (threshold <= 0 or self.separation() < threshold):
            raise CoincidentShiftError(
                f"{self.label or 'shift set'} needs distinct shifts (separation {self.separation():.3g})"
            )

    # set operations of the shifted divisor calculus
    def shifted(self, w: complex) -> ShiftSet:
        return ShiftSet(tuple(a + w for a in self.shifts), self.delta_bound + abs(w),
                        self.min_separation, self.label)

    def without(self, index: int) -> ShiftSet:
        rest = self.shifts[:index] + self.shifts[index + 1:]
        if not rest:
            raise ValueError("removing the only shift leaves an empty set")
        return ShiftSet(rest, self.delta_bound, self.min_separation, self.label)

    def union(self, other: ShiftSet | Iterable[complex]) -> ShiftSet:
        extra = tuple(other.shifts) if isinstance(other, ShiftSet) else tuple(complex(a) for a in other)
        merged = self.shifts + extra
        return ShiftSet(merged, max(self.delta_bound, max(abs(a) for a in merged)), 0.0, self.label)

    def negated(self) -> ShiftSet:
        return ShiftSet(tuple(-a for a in self.shifts), self.delta_bound, self.min_separation, self.label)

    def conjugate(self) -> ShiftSet:
        return ShiftSet(tuple(a.conjugate() for a in self.shifts), self.delta_bound,
                        self.min_separation, self.label)

    def multiset_equal(self, other: ShiftSet) -> bool:
        key = lambda a: (round(a.real, 15), round(a.imag, 15))
        return sorted(self.shifts, key=key) == sorted(other.shifts, key=key)


@dataclass(frozen=True)
class Factorization:
    pairs: tuple[tuple[int, int], ...]

    def __post_init__(self):
        previous = 1
        for p, e in self.pairs:
            if p <= previous or e < 1 or not isprime(p):
                raise ValueError(f"invalid factorization entry ({p}, {e})")
            previous = p

    @property
    def value(self) -> int:
        return math.prod(p**e for p, e in self.pairs)

    def __iter__(self):
        return iter(self.pairs)

    def __len__(self) -> int:
        return len(self.pairs)


@dataclass
class DivisorTable:
    """
    sigma_I(n) for 1 <= n <= upper; values[0] is unused and left at 0.
    """

    shift_set: ShiftSet
    upper: int
    values: np.ndarray = field(repr=False)

    def __getitem__(self, n):
        return self.values[n]

    def check_invariants(self, samples: int = 200, seed: int = 0) -> float:
        """
        Checks values[1] = 1, multiplicativity on random coprime pairs and the
        tau_k(n) n^delta bound. Returns the largest multiplicativity defect.
        """
        if self.values[1] != 1:
            raise AssertionError("values[1] must be 1")
        rng = np.random.default_rng(seed)
        worst = 0.0
        limit = max(2, math.isqrt(self.upper))
        for _ in range(samples):
            m, n = (int(x) for x in rng.integers(1, limit + 1, size=2))
            if math.gcd(m, n) != 1 or m * n > self.upper:
                continue
            lhs, rhs = self.values[m * n], self.values[m] * self.values[n]
            worst = max(worst, abs(lhs - rhs) / max(1.0, abs(rhs)))
        for n in rng.integers(1, self.upper + 1, size=min(samples, self.upper)):
            n = int(n)
            bound = tau_k(self.shift_set.k, n) * n**self.shift_set.delta_bound
            if abs(self.values[n]) > bound * (1 + 1e-9):
                raise AssertionError(f"|sigma({n})| exceeds tau_k(n) n^delta")
        return worst


def factorize(n: int) -> Factorization:
    """
    Prime factorization sorted by prime; 1 has the empty factorization.
    """
    if n < 1:
        raise ValueError("factorize needs n >= 1")
    return Factorization(tuple(sorted(factorint(n).items())))


def divisors(n: int) -> list[int]:
    return [int(d) for d in sympy_divisors(n)]


def tau_k(k: int, n: int) -> int:
    """
    Number of ordered k-tuples with product n, from tau_k(p^e) = C(e+k-1, k-1).

    Raises:
    - OverflowError when the count does not fit an unsigned 64-bit word

    Complexity:
    - Dominated by factorizing n
    """
    if k < 1 or n < 1:
        raise ValueError("tau_k needs k >= 1 and n >= 1")
    count = 1
    for _, e in factorize(n):
        count *= math.comb(e + k - 1, k - 1)
        if count > UINT64_MAX:
            raise OverflowError(f"tau_{k}({n}) exceeds 64 bits")
    return count


def mobius(n: int) -> int:
    fac = factorize(n)
    if any(e > 1 for _, e in fac):
        return 0
    return -1 if len(fac) % 2 else 1


def euler_phi(n: int) -> int:
    if n < 1:
        raise ValueError("euler_phi needs n >= 1")
    return int(totient(n))


def omega_distinct(n: int) -> int:
    return len(factorize(n))


def ramanujan_sum(q: int, r: int) -> int:
    """
    c_q(r) through the divisor identity sum_{d | (q, r)} d mu(q/d).
    c_q(0) = phi(q).
    """
    if q < 1:
        raise ValueError("ramanujan_sum needs q >= 1")
    if r == 0:
        return euler_phi(q)
    return sum(d * mobius(q // d) for d in divisors(math.gcd(q, abs(r))))


def local_sigma_series(shifts: Sequence, primes, length: int, lengths: np.ndarray | None = None) -> np.ndarray:
    """
    Coefficients sigma_A(p^j), j = 0..length, of prod_a (1 - x p^{-a})^{-1}.

    shifts may hold scalars or arrays that broadcast against primes (primes on
    the last axis), so a whole grid of shifted sets is handled in one pass.
    With lengths given (non-increasing along sorted primes) entries past a
    prime's own length are left at 0.
    """
    log_p = np.log(np.asarray(primes, dtype=float))
    shape = np.broadcast_shapes(log_p.shape, *[np.shape(a) for a in shifts])
    out = np.zeros(shape + (length + 1,), dtype=complex)
    out[..., 0] = 1.0
    counts = None
    if lengths is not None:
        counts = [int(np.count_nonzero(lengths >= j)) for j in range(length + 1)]
    for a in shifts:
        x = np.broadcast_to(np.exp(-np.asarray(a) * log_p), shape)
        for j in range(1, length + 1):
            if counts is None:
                out[..., j] += x * out[..., j - 1]
            else:
                upto = counts[j]
                if upto == 0:
                    break
                out[..., :upto, j] += x[..., :upto] * out[..., :upto, j - 1]
    return out


def sigma_shift(I: ShiftSet, n: int) -> complex:
    """
    sigma_I(n) = sum over d_1...d_k = n of prod d_i^{-a_i}, multiplicatively.
    """
    value = 1 + 0j
    for p, e in factorize(n):
        value *= complex(local_sigma_series(I.shifts, np.array([p]), e)[0, e])
    return value


def smallest_prime_factors(N: int) -> np.ndarray:
    """spf[n] for 0 <= n <= N, with spf[0] = 0 and spf[1] = 1."""
    spf = np.zeros(N + 1, dtype=np.int64)
    if N >= 1:
        spf[1] = 1
    for p in range(2, math.isqrt(N) + 1):
        if spf[p] == 0:
            block = spf[p * p::p]
            block[block == 0] = p
    unset = spf == 0
    unset[0] = False
    spf[unset] = np.nonzero(unset)[0]
    return spf


def prime_power_split(N: int) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """
    For n = 2..N returns (p, e, rest) with p the smallest prime factor,
    p^e || n and rest = n / p^e.
    """
    spf = smallest_prime_factors(N)
    p = spf[2:]
    rest = np.arange(2, N + 1, dtype=np.int64)
    e = np.zeros_like(rest)
    active = np.ones(rest.shape, dtype=bool)
    while active.any():
        idx = np.nonzero(active)[0]
        rest[idx] //= p[idx]
        e[idx] += 1
        active[idx] = rest[idx] % p[idx] == 0
    return p, e, rest


def multiplicative_table(N: int, local: Callable[[np.ndarray, np.ndarray], np.ndarray],
                         dtype=complex, cap: int | None = None) -> np.ndarray:
    """
    Table f(n), 0 <= n <= N, of the multiplicative f with f(p^e) = local(p, e).

    local receives arrays of primes and exponents (one entry per distinct
    prime power up to N) and must return an array of the same length.

    Raises:
    - BudgetError above the configured cap
    """
    cap = TruncationPolicy().sieve_cap if cap is None else cap
    if N < 1:
        raise ValueError("table size must be at least 1")
    if N > cap:
        raise BudgetError(f"table of size {N} above cap {cap}")
    values = np.zeros(N + 1, dtype=dtype)
    values[1] = 1
    if N == 1:
        return values
    p, e, rest = prime_power_split(N)
    power = np.arange(2, N + 1, dtype=np.int64) // rest
    unique_powers, first, inverse = np.unique(power, return_index=True, return_inverse=True)
    local_values = np.asarray(local(p[first], e[first]), dtype=dtype)[inverse]
    n = np.arange(2, N + 1)
    done = np.zeros(N + 1, dtype=bool)
    done[1] = True
    pending = np.ones(n.shape, dtype=bool)
    while pending.any():
        ready = pending & done[rest]
        idx = np.nonzero(ready)[0]
        values[n[idx]] = values[rest[idx]] * local_values[idx]
        done[n[idx]] = True
        pending[idx] = False
    logger.debug("multiplicative table up to %d from %d prime powers", N, len(unique_powers))
    return values


def sieve_sigma(I: ShiftSet, N: int, cap: int | None = None) -> DivisorTable:
    """
    Table of sigma_I(n) for n <= N built over smallest prime factors.
    """

    def local(primes: np.ndarray, exponents: np.ndarray) -> np.ndarray:
        out = np.empty(len(primes), dtype=complex)
        for e_val in np.unique(exponents):
            sel = exponents == e_val
            out[sel] = local_sigma_series(I.shifts, primes[sel], int(e_val))[..., int(e_val)]
        return out

    values = multiplicative_table(N, local, complex, cap)
    return DivisorTable(I, N, values)


def ramanujan_table(r: int, Q: int, cap: int | None = None) -> np.ndarray:
    """c_q(r) for q <= Q as a multiplicative function of q."""
    if r == 0:
        raise ValueError("use euler_phi for r = 0")

    def local(primes: np.ndarray, exponents: np.ndarray) -> np.ndarray:
        out = np.empty(len(primes), dtype=np.int64)
        for i, (p, j) in enumerate(zip(primes.tolist(), exponents.tolist())):
            out[i] = ramanujan_prime_power(p, j, r)
        return out

    return multiplicative_table(Q, local, np.int64, cap)


def ramanujan_prime_power(p: int, j: int, r: int) -> int:
    """c_{p^j}(r): phi(p^j) if p^j | r, -p^{j-1} if p^{j-1} || r, else 0."""
    v = 0
    r = abs(r)
    while r % p == 0:
        r //= p
        v += 1
    if j <= v:
        return p**j - p ** (j - 1)
    if j == v + 1:
        return -(p**v)
    return 0


def primes_up_to(N: int) -> np.ndarray:
    spf = smallest_prime_factors(N)
    idx = np.arange(N + 1)
    return idx[(spf == idx) & (idx >= 2)]
