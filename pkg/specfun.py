"""
Complex special functions: Riemann zeta by Euler-Maclaurin summation,
Gamma / log-Gamma through scipy, and the Gamma-ratio asymptotics used when
the t-integral of a moment is evaluated by stationary phase.
"""
from __future__ import annotations

import cmath
import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy import special

from config import get_logger
from errors import AccuracyError, PoleError, RegimeError

logger = get_logger(__name__)


@dataclass(frozen=True)
class EvalControl:
    """
    Accuracy controls for zeta.

    - target_tol: largest accepted first omitted Euler-Maclaurin correction
    - max_terms: cap on the direct-sum length
    - bernoulli_order: highest Bernoulli number used in the correction
    """

    HEIGHT_CAP = 1e6
    MIN_TERMS = 30

    target_tol: float = 1e-12
    max_terms: int = 2_000_000
    bernoulli_order: int = 12

    def __post_init__(self):
        if self.target_tol < 1e-14:
            raise ValueError("target_tol below 1e-14 is not reachable in double precision")
        if self.bernoulli_order % 2 or not 2 <= self.bernoulli_order <= 30:
            raise ValueError("bernoulli_order must be even and at most 30")
        if self.max_terms < self.MIN_TERMS:
            raise ValueError("max_terms too small")


DEFAULT_CONTROL = EvalControl()


@lru_cache(maxsize=None)
def _em_coefficients(order: int) -> tuple[float, ...]:
    # B_{2j} / (2j)! for j = 1 .. order/2 + 1; the last one only feeds the estimate
    numbers = special.bernoulli(order + 2)
    return tuple(float(numbers[2 * j]) / math.factorial(2 * j) for j in range(1, order // 2 + 2))


def _start_terms(s: np.ndarray) -> np.ndarray:
    return np.maximum(np.ceil(np.abs(s.imag) / 2.0), EvalControl.MIN_TERMS).astype(np.int64)


def _euler_maclaurin(s: np.ndarray, N: int, order: int) -> tuple[np.ndarray, np.ndarray]:
    """Value and first omitted correction for a common truncation point N."""
    log_n = np.log(np.arange(1, N, dtype=float))
    head = np.exp(-np.multiply.outer(s, log_n)).sum(axis=-1)
    n_pow = np.exp(-s * math.log(N))
    total = head + N * n_pow / (s - 1.0) + n_pow / 2.0
    coefficients = _em_coefficients(order)
    rising = s.copy()
    power = n_pow / N
    estimate = np.zeros(s.shape)
    for j, coefficient in enumerate(coefficients, start=1):
        term = coefficient * rising * power
        if j <= order // 2:
            total = total + term
        else:
            estimate = np.abs(term)
        rising = rising * (s + 2 * j - 1) * (s + 2 * j)
        power = power / (N * N)
    return total, estimate


def zeta_many(s, ctl: EvalControl = DEFAULT_CONTROL) -> np.ndarray:
    """
    Vectorized zeta. Entries sharing a truncation point are summed together;
    any entry whose estimate misses the target gets its term count doubled.

    Raises:
    - PoleError at s = 1
    - RegimeError above the height cap
    - AccuracyError when max_terms is reached before target_tol
    """
    s = np.atleast_1d(np.asarray(s, dtype=complex))
    if np.any(s == 1):
        raise PoleError("zeta has a pole at s = 1", 1 + 0j)
    if np.any(np.abs(s.imag) > ctl.HEIGHT_CAP):
        raise RegimeError(f"|Im s| above the height cap {ctl.HEIGHT_CAP:g}")
    flat = s.ravel()
    out = np.empty(flat.shape, dtype=complex)
    # bucket truncation points on a quarter-octave ladder so the direct sums batch
    ladder = np.round(2.0 ** (np.ceil(np.log2(_start_terms(flat)) * 4) / 4)).astype(np.int64)
    terms = np.maximum(ladder, EvalControl.MIN_TERMS)
    todo = np.arange(flat.size)
    while todo.size:
        retry = []
        for N in np.unique(terms[todo]):
            group = todo[terms[todo] == N]
            for chunk in np.array_split(group, max(1, group.size * int(N) // 2_000_000 + 1)):
                value, estimate = _euler_maclaurin(flat[chunk], int(N), ctl.bernoulli_order)
                out[chunk] = value
                bad = estimate > ctl.target_tol * np.maximum(1.0, np.abs(value))
                if np.any(bad):
                    if 2 * N > ctl.max_terms:
                        raise AccuracyError(
                            f"zeta accuracy {estimate[bad].max():.2e} not reached with {N} terms",
                            float(estimate[bad].max()),
                        )
                    terms[chunk[bad]] = 2 * N
                    retry.append(chunk[bad])
        todo = np.concatenate(retry) if retry else np.array([], dtype=np.int64)
    return out.reshape(s.shape)


def zeta(s: complex, ctl: EvalControl = DEFAULT_CONTROL) -> complex:
    """
    Riemann zeta at a single point.

    Examples:
    - zeta(2) = pi^2/6
    - zeta(0) = -1/2
    """
    return complex(zeta_many(np.array([s]), ctl)[0])


def _is_gamma_pole(s: complex) -> bool:
    s = complex(s)
    return s.imag == 0 and s.real <= 0 and s.real == math.floor(s.real)


def gamma(s: complex) -> complex:
    if _is_gamma_pole(s):
        raise PoleError(f"Gamma has a pole at {s}", complex(s))
    return complex(special.gamma(complex(s)))


def log_gamma(s: complex) -> complex:
    """log Gamma continued analytically from the positive axis (cut along the negative axis)."""
    if _is_gamma_pole(s):
        raise PoleError(f"log Gamma has a pole at {s}", complex(s))
    return complex(special.loggamma(complex(s)))


def gamma_ratio(s1: complex, s2: complex, a: complex, b: complex, t: float, sign: int) -> complex:
    """
    Gamma(1/2 - b - s2 + sign*i*t) / Gamma(1/2 + a + s1 + sign*i*t) as exp of a log-Gamma difference.
    """
    if sign not in (1, -1):
        raise ValueError("sign must be +1 or -1")
    if t < 2:
        raise ValueError("gamma_ratio is meant for t >= 2")
    top = 0.5 - b - s2 + sign * 1j * t
    bottom = 0.5 + a + s1 + sign * 1j * t
    return cmath.exp(log_gamma(top) - log_gamma(bottom))


def stirling_asymptotic(s1: complex, s2: complex, a: complex, b: complex, t: float, sign: int) -> complex:
    z = s1 + s2 + a + b
    return cmath.exp(-z * math.log(t) - sign * 1j * math.pi * z / 2)


def gamma_quotient_sum(s1: complex, s2: complex, a: complex, b: complex, t: float) -> tuple[complex, complex]:
    """
    The two conjugate Gamma quotients of the t-integral, exactly and merged
    asymptotically into 2 t^{-z} cos(pi z / 2), z = s1 + s2 + a + b.
    """
    exact = gamma_ratio(s1, s2, a, b, t, 1) + gamma_ratio(s2, s1, b, a, t, -1)
    z = s1 + s2 + a + b
    merged = 2 * cmath.exp(-z * math.log(t)) * cmath.cos(math.pi * z / 2)
    return exact, merged


def functional_equation_residual(z: complex, ctl: EvalControl = DEFAULT_CONTROL) -> float:
    """|zeta(1-z) - 2^{1-z} pi^{-z} cos(pi z/2) Gamma(z) zeta(z)| relative to |zeta(1-z)|."""
    lhs = zeta(1 - z, ctl)
    rhs = 2 ** (1 - z) * math.pi ** (-z) * cmath.cos(math.pi * z / 2) * gamma(z) * zeta(z, ctl)
    return abs(lhs - rhs) / max(abs(lhs), 1e-300)


@dataclass
class StirlingFit:
    t: float
    constant: float
    worst_sample: tuple


def stirling_validation(ts=(1e3, 1e4), trials: int = 50, seed: int = 0) -> list[StirlingFit]:
    """
    Fits C in |ratio/asymptotic - 1| <= C (1 + |s1|^2 + |s2|^2) / t for each t,
    using the same random samples at every t so the constants are comparable.

    Samples keep Re(a + s1) in [0, 1], Re(b + s2) in [0, 0.4],
    Re(s1 + s2 + a + b) <= 1 and |Im s1|, |Im s2| <= 10.
    """
    rng = np.random.default_rng(seed)
    samples = []
    while len(samples) < trials:
        a, b = rng.uniform(-0.01, 0.01, size=2)
        s1 = complex(rng.uniform(0.0, 1.0) - a, rng.uniform(-10, 10))
        s2 = complex(rng.uniform(0.0, 0.4) - b, rng.uniform(-10, 10))
        if (s1 + s2 + a + b).real <= 1:
            samples.append((s1, s2, complex(a), complex(b), 1 if rng.random() < 0.5 else -1))
    fits = []
    for t in ts:
        best, worst = 0.0, None
        for s1, s2, a, b, sign in samples:
            exact = gamma_ratio(s1, s2, a, b, t, sign)
            approx = stirling_asymptotic(s1, s2, a, b, t, sign)
            scaled = abs(exact / approx - 1) * t / (1 + abs(s1) ** 2 + abs(s2) ** 2)
            if scaled > best:
                best, worst = scaled, (s1, s2, a, b, sign)
        fits.append(StirlingFit(float(t), best, worst))
        logger.info("Stirling constant at t=%g: %.4g", t, best)
    return fits


def stirling_large_height_ratio(s1: complex, s2: complex, a: complex, b: complex, t: float) -> float:
    """
    |Gamma ratio| divided by (Im(s1)^2 + Im(s2)^2)/t^2 * e^{pi |Im(s1+s2)|/2};
    bounded when |Im s1| or |Im s2| exceeds t + 1.
    """
    if abs(s1.imag) < t + 1 and abs(s2.imag) < t + 1:
        raise ValueError("large-height bound needs |Im s1| or |Im s2| >= t + 1")
    log_ratio = log_gamma(0.5 - b - s2 + 1j * t) - log_gamma(0.5 + a + s1 + 1j * t)
    log_shape = (math.log((s1.imag**2 + s2.imag**2) / t**2)
                 + math.pi * abs((s1 + s2).imag) / 2)
    return math.exp(log_ratio.real - log_shape)
