"""
Shifted additive divisor sums

    D_{f;I,J}(r) = sum_{m - n = r} sigma_I(m) sigma_J(n) f(m, n)

computed by brute force over sieved tables, and the conjectured main term

    sum_{i1, i2} c_{i1,i2} * sum_q c_q(r) G_I(1-a_{i1}, q) G_J(1-b_{i2}, q) q^{-2+a+b}
                           * integral f(x, x - r) x^{-a} (x - r)^{-b} dx
"""
from __future__ import annotations

import math
import time
from abc import ABC, abstractmethod
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Iterable, Sequence

import numpy as np

from arithcore import DivisorTable, ShiftSet, divisors, factorize, primes_up_to, ramanujan_table, sieve_sigma
from config import TruncationPolicy, get_logger
from errors import BudgetError, TailTooLargeError
from eulerprod import (DISTINCT_FLOOR, G_first_shift, G_first_shift_table, G_first_shift_values,
                       ProductResult, SeriesResult, spread)
from quadrature import QuadratureSpec, integrate_complex
from specfun import zeta
from weights import OmegaWeight, PhiCutoff, dyadic_window, omega_hat_many, phi_eval, w0

logger = get_logger(__name__)

Q_TAIL_CONSTANT = 10.0
DEFAULT_EULER_CUTOFF = 1_000_000


@lru_cache(maxsize=8)
def _primes(cutoff: int) -> np.ndarray:
    return primes_up_to(cutoff)


@dataclass(frozen=True)
class KernelSpec:
    """
    f_r(x, y) = W(x/M) W(y/N) phi(x/K) phi(y/K) omega_hat(log(1 + r/y) / 2 pi) / T,
    W(u) = u^{-1/2} W0(u). With uses_w0 off the dyadic windows are replaced by 1
    on the box [M, 2M] x [N, 2N].
    """

    M: float
    N: float
    K: float
    r: int
    omega: OmegaWeight
    phi: PhiCutoff = field(default_factory=PhiCutoff)
    uses_w0: bool = True
    epsilon: float = 0.05

    def __post_init__(self):
        if self.r == 0:
            raise ValueError("r = 0 is the diagonal and has no kernel")
        if min(self.M, self.N, self.K) <= 0:
            raise ValueError("M, N and K must be positive")

    @property
    def P(self) -> float:
        """Derivative scale (T/T0) T^epsilon."""
        return self.omega.T / self.omega.T0 * self.omega.T**self.epsilon


class Kernel(ABC):
    """A smooth test function f(x, y) supported in a box."""

    @abstractmethod
    def __call__(self, x, y) -> np.ndarray:
        pass

    @abstractmethod
    def box(self) -> tuple[float, float, float, float]:
        """(x_lo, x_hi, y_lo, y_hi)"""
        pass

    def kinks(self) -> tuple[list[float], list[float]]:
        """x and y positions where the building blocks switch ramps."""
        return [], []

    def for_shift(self, r: int) -> Kernel:
        """The kernel to use at shift r; most kernels do not depend on r."""
        return self


def _dyadic_kinks(scale: float) -> list[float]:
    return [scale * u for u in (1.0, 1.25, math.sqrt(2), 1.75, 2.0)]


class BoxKernel(Kernel):
    """f(x, y) = W0(x/X) W0(y/Y), the plain smooth box."""

    def __init__(self, X: float, Y: float | None = None) -> None:
        if X <= 0 or (Y is not None and Y <= 0):
            raise ValueError("box sizes must be positive")
        self.X = float(X)
        self.Y = float(X if Y is None else Y)

    def __call__(self, x, y):
        return np.asarray(w0(np.asarray(x, dtype=float) / self.X) * w0(np.asarray(y, dtype=float) / self.Y),
                          dtype=complex)

    def box(self):
        return self.X, 2 * self.X, self.Y, 2 * self.Y

    def kinks(self):
        return _dyadic_kinks(self.X), _dyadic_kinks(self.Y)

    def __repr__(self) -> str:
        return f"BoxKernel(X={self.X:g}, Y={self.Y:g})"


class SmoothKernel(Kernel):
    """The off-diagonal kernel f_r of a KernelSpec."""

    def __init__(self, spec: KernelSpec) -> None:
        self.spec = spec

    def __call__(self, x, y):
        spec = self.spec
        x = np.asarray(x, dtype=float)
        y = np.asarray(y, dtype=float)
        if spec.uses_w0:
            windows = dyadic_window(x / spec.M) * dyadic_window(y / spec.N)
        else:
            inside = (x >= spec.M) & (x <= 2 * spec.M) & (y >= spec.N) & (y <= 2 * spec.N)
            windows = inside.astype(float)
        cutoffs = phi_eval(spec.phi, x / spec.K) * phi_eval(spec.phi, y / spec.K)
        out = np.zeros(np.broadcast(x, y).shape, dtype=complex)
        live = np.broadcast_to((windows * cutoffs) != 0, out.shape) & np.broadcast_to(y > 0, out.shape)
        if np.any(live):
            yb = np.broadcast_to(y, out.shape)[live]
            u = np.log1p(spec.r / yb) / (2 * math.pi)
            weight = np.broadcast_to(windows * cutoffs, out.shape)[live]
            out[live] = weight * omega_hat_many(spec.omega, u) / spec.omega.T
        return out

    def box(self):
        spec = self.spec
        x_hi = min(2 * spec.M, (1 + spec.phi.rho) * spec.K)
        y_hi = min(2 * spec.N, (1 + spec.phi.rho) * spec.K)
        return spec.M, x_hi, spec.N, y_hi

    def kinks(self):
        spec = self.spec
        phi_points = [spec.K, (1 + spec.phi.rho) * spec.K]
        return _dyadic_kinks(spec.M) + phi_points, _dyadic_kinks(spec.N) + phi_points

    def for_shift(self, r: int) -> SmoothKernel:
        s = self.spec
        return SmoothKernel(KernelSpec(s.M, s.N, s.K, r, s.omega, s.phi, s.uses_w0, s.epsilon))


def kernel_eval(spec: KernelSpec, x: float, y: float) -> complex:
    """f_r(x, y); zero outside the support box."""
    return complex(SmoothKernel(spec)(x, y))


@dataclass(frozen=True)
class AdcHypothesis:
    theta: float = 0.75
    C: float = 0.0
    beta: float = 0.5

    def __post_init__(self):
        if not 0.5 <= self.theta < 1:
            raise ValueError("theta must lie in [1/2, 1)")
        if self.C < 0:
            raise ValueError("C must be non-negative")
        if not 0 < self.beta <= 1:
            raise ValueError("beta must lie in (0, 1]")


@dataclass
class AdcComparison:
    r: int
    brute: complex
    main: complex
    delta: complex
    runtime_ms: int
    X: float = 0.0

    @classmethod
    def of(cls, r: int, brute: complex, main: complex, runtime_ms: int, X: float = 0.0) -> AdcComparison:
        return cls(r, brute, main, brute - main, runtime_ms, X)

    @property
    def relative(self) -> float:
        return abs(self.delta) / max(abs(self.brute), 1e-300)


@dataclass
class AdcSummary:
    X: float
    H: int
    total_abs_delta: float
    relative_discrepancy: float
    ratio_to_bound: float


@dataclass
class AdcSweep:
    comparisons: list[AdcComparison]
    summaries: list[AdcSummary]


def _support_range(kernel: Kernel, r: int) -> tuple[int, int]:
    """Range of n with (n + r, n) inside the support box."""
    x_lo, x_hi, y_lo, y_hi = kernel.box()
    lo = max(math.ceil(y_lo), math.ceil(x_lo - r), 1, 1 - r)
    hi = min(math.floor(y_hi), math.floor(x_hi - r))
    return lo, hi


def sigma_tables(kernel: Kernel, I: ShiftSet, J: ShiftSet, r_max: int,
                 cap: int | None = None) -> tuple[DivisorTable, DivisorTable]:
    x_lo, x_hi, y_lo, y_hi = kernel.box()
    top = int(math.floor(max(x_hi, y_hi))) + abs(r_max) + 1
    return sieve_sigma(I, top, cap), sieve_sigma(J, top, cap)


def brute_D(kernel: Kernel, I: ShiftSet, J: ShiftSet, r: int,
            tables: tuple[DivisorTable, DivisorTable] | None = None,
            policy: TruncationPolicy = TruncationPolicy()) -> complex:
    """
    D(r) with one vectorized pass over n, m = n + r.

    Raises:
    - BudgetError when the support holds more than policy.support_cap points
    """
    kernel = kernel.for_shift(r)
    lo, hi = _support_range(kernel, r)
    if hi < lo:
        return 0j
    if hi - lo + 1 > policy.support_cap:
        raise BudgetError(f"support of {hi - lo + 1} points above cap {policy.support_cap}")
    if tables is None:
        tables = sigma_tables(kernel, I, J, r, policy.sieve_cap)
    sig_I, sig_J = tables
    n = np.arange(lo, hi + 1)
    m = n + r
    if m[-1] > sig_I.upper or n[-1] > sig_J.upper:
        raise ValueError("sieved tables do not cover the support")
    return complex(np.sum(sig_I.values[m] * sig_J.values[n] * kernel(m, n)))


def brute_D_partitioned(kernel: Kernel, I: ShiftSet, J: ShiftSet, r: int,
                        tables: tuple[DivisorTable, DivisorTable] | None = None,
                        policy: TruncationPolicy = TruncationPolicy(),
                        ) -> tuple[complex, list[tuple[float, float, complex]]]:
    """
    D(r) split over the dyadic pieces W0(m/M') W0(n/N'); returns the total
    and the per-piece sums.
    """
    kernel = kernel.for_shift(r)
    lo, hi = _support_range(kernel, r)
    if hi < lo:
        return 0j, []
    if tables is None:
        tables = sigma_tables(kernel, I, J, r, policy.sieve_cap)
    sig_I, sig_J = tables
    n = np.arange(lo, hi + 1)
    m = n + r
    base = sig_I.values[m] * sig_J.values[n] * kernel(m, n)

    def scales(values: np.ndarray) -> list[float]:
        first = math.floor(2 * math.log2(values.min())) - 2
        last = math.ceil(2 * math.log2(values.max())) + 1
        return [2.0 ** (k / 2) for k in range(first, last + 1)]

    pieces = []
    total = 0j
    for Mp in scales(m.astype(float)):
        wm = w0(m / Mp)
        if not np.any(wm):
            continue
        for Np in scales(n.astype(float)):
            wn = w0(n / Np)
            if not np.any(wn):
                continue
            piece = complex(np.sum(base * wm * wn))
            pieces.append((Mp, Np, piece))
            total += piece
    return total, pieces


def shift_constant(I: ShiftSet, J: ShiftSet, i1: int, i2: int) -> complex:
    """
    c_{i1,i2} = prod_{j1 != i1} zeta(1 - a_{i1} + a_{j1}) prod_{j2 != i2} zeta(1 - b_{i2} + b_{j2}).

    Raises:
    - CoincidentShiftError when either set has coincident shifts
    """
    I.require_distinct(I.min_separation or DISTINCT_FLOOR)
    J.require_distinct(J.min_separation or DISTINCT_FLOOR)
    value = 1 + 0j
    for j1, a in enumerate(I):
        if j1 != i1:
            value *= zeta(1 - I[i1] + a)
    for j2, b in enumerate(J):
        if j2 != i2:
            value *= zeta(1 - J[i2] + b)
    return value


def _q_tail(I: ShiftSet, J: ShiftSet, r: int, Q: int) -> float:
    g = spread(I) + spread(J)
    return Q_TAIL_CONSTANT * len(divisors(abs(r))) * Q ** (-1 + 2 * g)


def q_series_direct(I: ShiftSet, J: ShiftSet, i1: int, i2: int, r: int, Q: int,
                    cap: int | None = None) -> SeriesResult:
    """sum_{q <= Q} c_q(r) G_I(1-a, q) G_J(1-b, q) q^{-2+a+b} with the tail 10 tau(r) Q^{-1+4 delta}."""
    if r == 0:
        raise ValueError("r = 0 is not an off-diagonal shift")
    a, b = I[i1], J[i2]
    weights = G_first_shift_values(I, i1, Q, cap) * G_first_shift_values(J, i2, Q, cap)
    q = np.arange(Q + 1, dtype=float)
    q[0] = 1.0
    terms = ramanujan_table(r, Q, cap) * weights * np.exp((-2 + a + b) * np.log(q))
    return SeriesResult(complex(np.sum(terms[1:])), (abs(r), Q), _q_tail(I, J, r, Q))


def q_series_adaptive(I: ShiftSet, J: ShiftSet, i1: int, i2: int, r: int, tol: float,
                      Q_start: int = 1000, Q_cap: int = 1_000_000) -> SeriesResult:
    """
    The direct q-series with Q doubled until its tail drops below tol.

    Raises:
    - TailTooLargeError when Q_cap is reached first
    """
    Q = Q_start
    while True:
        result = q_series_direct(I, J, i1, i2, r, Q)
        if result.tail_estimate <= tol:
            return result
        if 2 * Q > Q_cap:
            raise TailTooLargeError(f"q-series tail {result.tail_estimate:.3e} above {tol:.3e} at Q={Q}",
                                    result.tail_estimate)
        Q *= 2


def q_series_euler(I: ShiftSet, J: ShiftSet, i1: int, i2: int, r: int,
                   cutoff: int = DEFAULT_EULER_CUTOFF) -> ProductResult:
    """
    The q-series as an Euler product. Writing alpha(q) = G_I G_J q^{-2+a+b}, the
    local factor is 1 - alpha(p) when p does not divide r and
    1 + sum_{j <= v} phi(p^j) alpha(p^j) - p^v alpha(p^{v+1}) when p^v || r.
    """
    if r == 0:
        raise ValueError("r = 0 is not an off-diagonal shift")
    a, b = I[i1], J[i2]
    primes = _primes(cutoff)
    table = G_first_shift_table(I, i1, primes, 1)[:, 1] * G_first_shift_table(J, i2, primes, 1)[:, 1]
    alpha = table * np.exp((-2 + a + b) * np.log(primes.astype(float)))
    coprime = (abs(r) % primes) != 0
    value = complex(np.prod(1 - alpha[coprime]))
    for p, v in factorize(abs(r)):
        weight = lambda j: G_first_shift(I, i1, p, j) * G_first_shift(J, i2, p, j) * p ** ((-2 + a + b) * j)
        local = 1 + sum((p**j - p ** (j - 1)) * weight(j) for j in range(1, v + 1)) - p**v * weight(v + 1)
        value *= local
    g = spread(I) + spread(J)
    count = max(1, (I.k - 1) * (J.k - 1))
    tail = count * cutoff ** (-1 + 2 * g) / ((1 - 2 * g) * math.log(cutoff))
    return ProductResult(value, cutoff, tail)


def _x_integral(kernel: Kernel, a: complex, b: complex, r: int, quad: QuadratureSpec) -> complex:
    x_lo, x_hi, y_lo, y_hi = kernel.box()
    lo = max(x_lo, y_lo + r, r, 0.0)
    hi = min(x_hi, y_hi + r)
    if hi <= lo:
        return 0j
    x_kinks, y_kinks = kernel.kinks()
    points = [x for x in x_kinks] + [y + r for y in y_kinks]
    f = lambda x: complex(kernel(x, x - r)) * x ** (-a) * (x - r) ** (-b)
    scale = (hi - lo) * (1 + abs(f(0.5 * (lo + hi))))
    value, _ = integrate_complex(f, lo, hi, quad, points, scale)
    return value


def adc_main_term(kernel: Kernel, I: ShiftSet, J: ShiftSet, r: int, method: str = "euler",
                  quad: QuadratureSpec = QuadratureSpec(tol=1e-9), q_tol: float = 1e-3,
                  cutoff: int = DEFAULT_EULER_CUTOFF) -> complex:
    """
    Main term of the additive divisor conjecture for D(r).

    method "euler" evaluates the q-series as its Euler product; "series"
    truncates it adaptively and raises TailTooLargeError past the Q cap.
    """
    if r == 0:
        raise ValueError("r = 0 belongs to the diagonal")
    if method not in ("euler", "series"):
        raise ValueError(f"unknown q-series method {method!r}")
    kernel = kernel.for_shift(r)
    total = 0j
    for i1, a in enumerate(I):
        for i2, b in enumerate(J):
            integral = _x_integral(kernel, a, b, r, quad)
            if integral == 0:
                continue
            if method == "euler":
                series = q_series_euler(I, J, i1, i2, r, cutoff).value
            else:
                series = q_series_adaptive(I, J, i1, i2, r, q_tol).value
            total += shift_constant(I, J, i1, i2) * series * integral
    return total


def _compare_one(args) -> AdcComparison:
    kernel, I, J, r, method, X = args
    start = time.perf_counter()
    brute = brute_D(kernel, I, J, r)
    main = adc_main_term(kernel, I, J, r, method)
    return AdcComparison.of(r, brute, main, int((time.perf_counter() - start) * 1000), X)


def adc_sweep(I: ShiftSet, J: ShiftSet, boxes: Sequence[float], r_range: Iterable[int],
              hyp: AdcHypothesis = AdcHypothesis(), jobs: int = 1, method: str = "euler") -> AdcSweep:
    """
    Brute force against main term for every box X (BoxKernel(X)) and shift r.
    Results come back sorted by (X, r) whatever the number of workers.

    Raises:
    - ValueError if r_range holds 0 or exceeds X^beta
    """
    rs = sorted(set(int(r) for r in r_range))
    if 0 in rs:
        raise ValueError("r = 0 belongs to the diagonal")
    if not rs:
        return AdcSweep([], [AdcSummary(float(X), 0, 0.0, 0.0, 0.0) for X in boxes])
    H = max(abs(r) for r in rs)
    for X in boxes:
        if H > X**hyp.beta:
            raise ValueError(f"|r| up to {H} exceeds X^beta = {X ** hyp.beta:.4g}")
    tasks = [(BoxKernel(X), I, J, r, method, float(X)) for X in boxes for r in rs]
    logger.info("adc sweep: %d boxes, %d shifts, %d workers", len(boxes), len(rs), jobs)
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            comparisons = list(pool.map(_compare_one, tasks))
    else:
        comparisons = [_compare_one(task) for task in tasks]
    comparisons.sort(key=lambda c: (c.X, c.r))
    summaries = []
    for X in boxes:
        rows = [c for c in comparisons if c.X == float(X)]
        total = sum(abs(c.delta) for c in rows)
        scale = sum(abs(c.main) for c in rows)
        summaries.append(AdcSummary(float(X), H, total, total / max(scale, 1e-300), total / (H * X**hyp.theta)))
    return AdcSweep(comparisons, summaries)


def kernel_derivative_check(spec: KernelSpec, samples: int = 64, seed: int = 0,
                            max_order: int = 2) -> dict[tuple[int, int], float]:
    """
    Largest sampled x^m y^n |f^{(m,n)}(x, y)| / P^{m+n} for m + n <= max_order,
    by central differences at random interior points of the support.
    """
    kernel = SmoothKernel(spec)
    x_lo, x_hi, y_lo, y_hi = kernel.box()
    rng = np.random.default_rng(seed)
    xs = rng.uniform(x_lo, x_hi, samples)
    ys = rng.uniform(y_lo, y_hi, samples)
    hx = 1e-3 * spec.M
    hy = 1e-3 * spec.N
    stencil = {0: ([0], [1.0]), 1: ([-1, 1], [-0.5, 0.5]), 2: ([-1, 0, 1], [1.0, -2.0, 1.0])}
    out = {}
    for m in range(max_order + 1):
        for n in range(max_order + 1 - m):
            dx, wx = stencil[m]
            dy, wy = stencil[n]
            value = np.zeros(samples, dtype=complex)
            for i, cx in zip(dx, wx):
                for j, cy in zip(dy, wy):
                    value += cx * cy * kernel(xs + i * hx, ys + j * hy)
            derivative = value / (hx**m * hy**n)
            scaled = np.abs(derivative) * xs**m * ys**n / spec.P ** (m + n)
            out[(m, n)] = float(scaled.max())
    return out
