"""
Mean values of long Dirichlet polynomials with shifted divisor coefficients

    D_{I,J;omega}(K) = integral omega(t) A_I(1/2 + it) A_J(1/2 - it) dt,
    A_I(s) = sum_m sigma_I(m) phi(m/K) m^{-s},  K = T^{1+eta},

evaluated directly as a double sum, together with the diagonal (M0) and
single-swap (M1) main terms as contour integrals, and the exact polynomial
layer gamma_{k,l}, w_{k,l}, g_k behind the leading-order predictions.
"""
from __future__ import annotations

import math
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from fractions import Fraction
from typing import Sequence

import numpy as np
import sympy

from arithcore import ShiftSet, sieve_sigma
from config import TruncationPolicy, get_logger
from errors import BudgetError, IdentityViolationError, PoleError
from eulerprod import DISTINCT_FLOOR, A_product, C_product_many, ProductResult, Z_many
from quadrature import VerticalContour, vertical_contour
from specfun import gamma_quotient_sum, zeta_many
from weights import OmegaWeight, PhiCutoff, omega_hat_many, omega_mellin, phi2_many, phi_eval

logger = get_logger(__name__)

NEIGHBOR_PAIR_FLAG = 1_000_000
POLY_BUDGET = 6


@dataclass(frozen=True)
class MomentConfig:
    """
    One moment experiment.

    Args:
    - I, J: shift sets of the two Dirichlet polynomials
    - T: height; omega defaults to the standard window on [T, 2T] with T0 = T^0.8
    - eta: K = T^{1+eta}; eta = 0 is allowed and flagged by asymptotic_range_lint
    - log_regime: require every shift to be at most 1/log T in modulus

    Raises:
    - ValueError for T <= 1, eta < 0, a window built for another T, or
      log-regime shifts that are too large
    """

    I: ShiftSet
    J: ShiftSet
    T: float
    eta: float
    omega: OmegaWeight | None = None
    phi: PhiCutoff = field(default_factory=PhiCutoff)
    policy: TruncationPolicy = field(default_factory=TruncationPolicy)
    log_regime: bool = False

    def __post_init__(self):
        if self.T <= 1:
            raise ValueError("T must exceed 1")
        if self.eta < 0:
            raise ValueError("eta must be non-negative")
        if self.omega is None:
            object.__setattr__(self, "omega", OmegaWeight.standard(self.T))
        if not math.isclose(self.omega.T, self.T):
            raise ValueError("omega was built for a different T")
        if self.log_regime:
            limit = 1.0 / math.log(self.T)
            if max(abs(a) for a in (*self.I, *self.J)) > limit:
                raise ValueError(f"log-regime shifts must stay below 1/log T = {limit:.4g}")

    @classmethod
    def standard(cls, k: int, l: int, T: float, eta: float, b_exponent: float = 0.8, rho: float = 0.1,
                 policy: TruncationPolicy | None = None) -> MomentConfig:
        """Shifts j/(10 log T) for I and (j + 1/2)/(10 log T) for J."""
        return cls(ShiftSet.log_regime(k, T, label="I"), ShiftSet.log_regime(l, T, 0.5, label="J"),
                   T, eta, OmegaWeight.standard(T, b_exponent), PhiCutoff(rho),
                   policy or TruncationPolicy(), log_regime=True)

    @property
    def K(self) -> float:
        return self.T ** (1 + self.eta)

    @property
    def K_prime(self) -> int:
        """Last index with phi(m/K) possibly nonzero."""
        return int(math.floor((1 + self.phi.rho) * self.K))

    @property
    def delta(self) -> float:
        return max(self.I.delta_bound, self.J.delta_bound)

    def with_T(self, T: float) -> MomentConfig:
        """The same experiment at another height; log-regime shifts are rescaled by log T."""
        I, J = self.I, self.J
        if self.log_regime:
            scale = math.log(self.T) / math.log(T)
            I, J = _rescaled(I, scale), _rescaled(J, scale)
        w = self.omega
        omega = OmegaWeight(T, T**w.b_exponent, w.c1, w.c2, w.b_exponent, w.amplitude)
        return MomentConfig(I, J, T, self.eta, omega, self.phi, self.policy, self.log_regime)

    def swapped(self) -> MomentConfig:
        """(conj J, conj I): the configuration whose moment is the conjugate of this one."""
        return MomentConfig(self.J.conjugate(), self.I.conjugate(), self.T, self.eta, self.omega,
                            self.phi, self.policy, self.log_regime)

    def describe(self) -> dict:
        return {
            "I": self.I.to_pairs(), "J": self.J.to_pairs(), "T": self.T, "eta": self.eta, "K": self.K,
            "omega": asdict(self.omega), "rho": self.phi.rho, "log_regime": self.log_regime,
            "policy": self.policy.to_dict(),
        }


def _rescaled(A: ShiftSet, scale: float) -> ShiftSet:
    return ShiftSet(tuple(a * scale for a in A), A.delta_bound * scale, A.min_separation * scale, A.label)


@dataclass
class DirectMoment:
    value: complex
    diagonal: complex
    off_diagonal: complex
    pairs: int
    log_window: float
    truncation_bound: float
    flagged: bool


@dataclass
class ContourResult:
    value: complex
    abscissa: float
    height: float
    nodes: int
    contour_tail: float
    product_tail: float
    per_swap_terms: dict = field(default_factory=dict)


@dataclass
class MomentReport:
    """residual = direct - (m0 + m1), exactly as computed."""

    T: float
    eta: float
    direct: complex
    diag_direct: complex
    m0: complex
    m1: complex
    residual: complex
    per_swap_terms: dict
    tails: dict
    runtime_ms: float = 0.0

    @property
    def relative_residual(self) -> float:
        return abs(self.residual) / max(abs(self.direct), 1e-300)

    @property
    def diagonal_gap(self) -> float:
        return abs(self.diag_direct - self.m0) / max(abs(self.diag_direct), 1e-300)


# ---------------------------------------------------------------------------
# direct evaluation


def _default_log_window(omega: OmegaWeight) -> float:
    return 10.0 * omega.T0 ** (-1 + 0.05)


def _decay_cap(omega: OmegaWeight, log_window: float, samples: int = 512) -> float:
    u = np.linspace(1.0, 8.0, samples) * log_window / (2 * math.pi)
    return float(np.abs(omega_hat_many(omega, u)).max())


def _tables(cfg: MomentConfig):
    Kp = cfg.K_prime
    if Kp > cfg.policy.sieve_cap:
        raise BudgetError(f"K' = {Kp} is beyond the sieve cap {cfg.policy.sieve_cap}")
    sig_I = sieve_sigma(cfg.I, Kp, cfg.policy.sieve_cap).values
    sig_J = sieve_sigma(cfg.J, Kp, cfg.policy.sieve_cap).values
    weights = np.zeros(Kp + 1)
    idx = np.arange(1, Kp + 1, dtype=float)
    weights[1:] = phi_eval(cfg.phi, idx / cfg.K) / np.sqrt(idx)
    return Kp, sig_I, sig_J, weights


def diag_direct(cfg: MomentConfig) -> complex:
    """omega_hat(0) * sum_m sigma_I(m) sigma_J(m) phi(m/K)^2 / m."""
    _, sig_I, sig_J, weights = _tables(cfg)
    hat0 = omega_hat_many(cfg.omega, [0.0])[0]
    return complex(hat0 * np.sum(sig_I * sig_J * weights**2))


def direct_moment(cfg: MomentConfig, log_window: float | None = None) -> DirectMoment:
    """
    sum_{m, n <= K'} sigma_I(m) sigma_J(n) phi(m/K) phi(n/K) omega_hat(log(m/n)/2 pi) / sqrt(mn).

    The off-diagonal keeps |log(m/n)| <= log_window, 10 T0^{-0.95} by default,
    and sums over r = m - n > 0 with omega_hat(-u) = conj omega_hat(u) covering m < n.
    The neglected pairs are bounded by the largest |omega_hat| beyond the window
    times the product of the two absolute l^1 norms.

    Raises:
    - BudgetError when K' is beyond policy.sieve_cap
    """
    Kp, sig_I, sig_J, weights = _tables(cfg)
    L = _default_log_window(cfg.omega) if log_window is None else log_window
    hat0 = omega_hat_many(cfg.omega, [0.0])[0]
    diagonal = complex(hat0 * np.sum(sig_I * sig_J * weights**2))
    off = 0j
    pairs = 0
    growth = math.expm1(L)
    r = 1
    while True:
        n_lo = max(1, math.ceil(r / growth)) if growth > 0 else Kp + 1
        n_hi = Kp - r
        if n_lo > n_hi:
            break
        n = np.arange(n_lo, n_hi + 1)
        m = n + r
        hat = omega_hat_many(cfg.omega, np.log1p(r / n) / (2 * math.pi))
        w = weights[m] * weights[n]
        off += complex(np.sum(w * (sig_I[m] * sig_J[n] * hat + sig_I[n] * sig_J[m] * hat.conj())))
        pairs += 2 * n.size
        r += 1
    flagged = pairs > NEIGHBOR_PAIR_FLAG
    if flagged:
        logger.warning("log window %.3g admits %d neighbour pairs", L, pairs)
    mass = float(np.sum(np.abs(sig_I) * weights) * np.sum(np.abs(sig_J) * weights))
    bound = _decay_cap(cfg.omega, L) * mass if L > 0 else math.inf
    logger.info("direct moment T=%g K'=%d: %d off-diagonal pairs, window %.3g", cfg.T, Kp, pairs, L)
    return DirectMoment(diagonal + off, diagonal, off, pairs, L, bound, flagged)


# ---------------------------------------------------------------------------
# contours


def m0_abscissa(cfg: MomentConfig) -> float:
    return min(0.5, max(4 * cfg.delta, 0.05))


def m1_abscissa(cfg: MomentConfig) -> float:
    return max(4 * cfg.delta, 0.05)


def contour_height(phi: PhiCutoff, c: float, policy: TruncationPolicy) -> float:
    """
    Smallest height beyond which |Phi_2(c + iu)| stays below target_tol * |Phi_2(c)|,
    capped at MAX_CONTOUR_HEIGHT; an explicit policy.contour_height wins.
    """
    if policy.contour_height is not None:
        return float(policy.contour_height)
    cap = TruncationPolicy.MAX_CONTOUR_HEIGHT
    u = np.geomspace(4.0, cap, 256)
    mags = np.abs(phi2_many(phi, c + 1j * u))
    reference = abs(phi2_many(phi, [c])[0])
    suffix = np.maximum.accumulate(mags[::-1])[::-1]
    below = np.nonzero(suffix <= policy.target_tol * reference)[0]
    height = float(u[below[0]]) if below.size else cap
    logger.debug("contour height %.4g at c=%.4g", height, c)
    return height


def _phi2_tail(phi: PhiCutoff, c: float, height: float) -> float:
    u = np.linspace(height, 2 * height, 64)
    return float(np.abs(phi2_many(phi, c + 1j * u)).max() * height / math.pi)


def _check_abscissa(cfg: MomentConfig, c: float) -> None:
    if not 2 * cfg.delta < c <= 1:
        raise PoleError(f"contour abscissa {c:.4g} must lie in (2 delta, 1] = ({2 * cfg.delta:.4g}, 1]", complex(c))


def _contour(cfg: MomentConfig, c: float, frequency: float, half: bool) -> VerticalContour:
    height = contour_height(cfg.phi, c, cfg.policy)
    return vertical_contour(c, height, frequency, cfg.policy.quadrature_order, half)


def m0_contour(cfg: MomentConfig, abscissa: float | None = None) -> ContourResult:
    """
    (omega_hat(0) / 2 pi i) * integral over Re s = c of K^s Phi_2(s) Z_{I,J}(s) ds,
    with c = min(0.5, max(4 delta, 0.05)) unless given.

    Raises:
    - PoleError when c is outside (2 delta, 1] or within pole_margin of a zeta pole
    """
    c = m0_abscissa(cfg) if abscissa is None else abscissa
    _check_abscissa(cfg, c)
    contour = _contour(cfg, c, math.log(cfg.K), cfg.I.is_real and cfg.J.is_real)
    s = contour.s
    z_values, product_tail = Z_many(cfg.I, cfg.J, s, cfg.policy)
    values = np.exp(s * math.log(cfg.K)) * phi2_many(cfg.phi, s) * z_values
    hat0 = omega_hat_many(cfg.omega, [0.0])[0]
    value = hat0 * contour.integrate(values)
    scale = abs(hat0) * cfg.K**c * float(np.abs(z_values).max())
    mass = abs(hat0) * float(np.sum(np.abs(contour.weights * values)))
    result = ContourResult(complex(value), c, contour.height, len(contour),
                           scale * _phi2_tail(cfg.phi, c, contour.height), mass * product_tail)
    logger.info("M0 at T=%g: %s (%d nodes)", cfg.T, result.value, result.nodes)
    return result


def _swap_term(cfg: MomentConfig, i1: int, i2: int, contour: VerticalContour) -> tuple[complex, float, float]:
    """One (i1, i2) term with its contour and product tails."""
    I, J = cfg.I, cfg.J
    a, b = I[i1], J[i2]
    rest_I = [x for k, x in enumerate(I) if k != i1]
    rest_J = [y for k, y in enumerate(J) if k != i2]
    s = contour.s
    margin = cfg.policy.pole_margin
    if np.any(np.abs(s + a + b) < margin):
        raise PoleError("contour meets the pole of zeta(1 - a - b - s)", complex(-a - b), (i1, i2))
    prefactor = complex(np.prod(zeta_many([1 + x - a for x in rest_I]))) if rest_I else 1.0
    if rest_J:
        prefactor *= complex(np.prod(zeta_many([1 - b + y for y in rest_J])))
    rest = (2 * math.pi) ** (a + b) * np.exp(s * math.log(2 * math.pi * cfg.K))
    rest = rest * omega_mellin(cfg.omega, a + b + s) * zeta_many(1 - a - b - s)
    for k1, x in enumerate(I):
        for k2, y in enumerate(J):
            if k1 != i1 and k2 != i2:
                if np.any(np.abs(s + x + y) < margin):
                    raise PoleError("contour meets a zeta pole", complex(-x - y), (k1, k2))
                rest = rest * zeta_many(1 + x + y + s)
    c_values, product_tail = C_product_many(I, J, i1, i2, s, cfg.policy)
    phi2 = phi2_many(cfg.phi, s)
    term = prefactor * contour.integrate(phi2 * rest * c_values)
    size = abs(prefactor) * float(np.abs(rest * c_values).max())
    contour_tail = size * _phi2_tail(cfg.phi, contour.c, contour.height)
    product_tail = abs(prefactor) * float(np.sum(np.abs(contour.weights * phi2 * rest * c_values))) * product_tail
    return complex(term), contour_tail, product_tail


def m1_contour(cfg: MomentConfig, abscissa: float | None = None) -> ContourResult:
    """
    Single-swap main term

        sum_{i1, i2} (2 pi)^{a+b} Z(I - a, -a) Z(-b, J - b) (1/2 pi i) integral over Re s = c of
            Phi_2(s) (2 pi K)^s Omega(a + b + s) Z((I - a) + s, J - b) zeta(1 - a - b - s) C(s) ds

    with a = a_{i1}, b = b_{i2}, Omega the Mellin transform of omega (the t-integral
    of (t/2 pi)^{-a-b} (2 pi K/t)^s) and C the arithmetic factor of H, which equals
    A((I - a) + {-b - s}, ((J - b) + s) + {-a}). Z(X, Y) is the product of
    zeta(1 + x + y).

    Raises:
    - CoincidentShiftError for shift sets without distinct shifts
    - PoleError when the contour meets a zeta pole or c is outside (2 delta, 1]
    """
    cfg.I.require_distinct(cfg.I.min_separation or DISTINCT_FLOOR)
    cfg.J.require_distinct(cfg.J.min_separation or DISTINCT_FLOOR)
    c = m1_abscissa(cfg) if abscissa is None else abscissa
    _check_abscissa(cfg, c)
    frequency = math.log(2 * math.pi * cfg.K / cfg.omega.support[0])
    contour = _contour(cfg, c, frequency, cfg.I.is_real and cfg.J.is_real)
    terms = {}
    contour_tail = product_tail = 0.0
    for i1 in range(cfg.I.k):
        for i2 in range(cfg.J.k):
            term, c_tail, p_tail = _swap_term(cfg, i1, i2, contour)
            terms[(i1, i2)] = term
            contour_tail += c_tail
            product_tail += p_tail
            logger.debug("M1 swap (%d, %d): %s", i1, i2, term)
    value = sum(terms.values(), 0j)
    logger.info("M1 at T=%g: %s (%d nodes)", cfg.T, value, len(contour))
    return ContourResult(value, c, contour.height, len(contour), contour_tail, product_tail, terms)


# ---------------------------------------------------------------------------
# consistency


def moment_report(cfg: MomentConfig, log_window: float | None = None) -> MomentReport:
    start = time.perf_counter()
    direct = direct_moment(cfg, log_window)
    m0 = m0_contour(cfg)
    m1 = m1_contour(cfg)
    residual = direct.value - (m0.value + m1.value)
    tails = {
        "direct_truncation": direct.truncation_bound,
        "direct_pairs": direct.pairs,
        "direct_flagged": direct.flagged,
        "log_window": direct.log_window,
        "m0_contour_tail": m0.contour_tail,
        "m0_product_tail": m0.product_tail,
        "m0_height": m0.height,
        "m1_contour_tail": m1.contour_tail,
        "m1_product_tail": m1.product_tail,
        "m1_height": m1.height,
    }
    runtime = (time.perf_counter() - start) * 1000
    return MomentReport(cfg.T, cfg.eta, direct.value, direct.diagonal, m0.value, m1.value, residual,
                        m1.per_swap_terms, tails, runtime)


def consistency_report(configs: Sequence[MomentConfig], jobs: int = 1) -> list[MomentReport]:
    """
    One MomentReport per configuration, in the order given.

    Raises:
    - CoincidentShiftError when a configuration's shifts are not distinct
    """
    for cfg in configs:
        cfg.I.require_distinct(cfg.I.min_separation or DISTINCT_FLOOR)
        cfg.J.require_distinct(cfg.J.min_separation or DISTINCT_FLOOR)
    if jobs > 1 and len(configs) > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            reports = list(pool.map(moment_report, configs))
    else:
        reports = [moment_report(cfg) for cfg in configs]
    for report in reports:
        logger.info("T=%g relative residual %.4g", report.T, report.relative_residual)
    return reports


def residual_trend(reports: Sequence[MomentReport]) -> tuple[list[float], bool]:
    """Relative residuals ordered by T and whether they strictly decrease."""
    ordered = sorted(reports, key=lambda r: r.T)
    ratios = [r.relative_residual for r in ordered]
    return ratios, all(x > y for x, y in zip(ratios, ratios[1:]))


def swap_symmetry_check(cfg: MomentConfig, include_direct: bool = False) -> dict[str, float]:
    """
    D_{conj J, conj I} = conj D_{I,J}; the same holds for M0 and M1 separately.
    Returns the relative gaps.
    """
    other = cfg.swapped()
    gaps = {}
    pairs = [("m0", m0_contour), ("m1", m1_contour)]
    if include_direct:
        pairs.append(("direct", lambda c: direct_moment(c)))
    for name, evaluate in pairs:
        x, y = evaluate(cfg).value, evaluate(other).value
        gaps[name] = abs(y - x.conjugate()) / max(abs(x), 1e-300)
    return gaps


def gamma_quotient_sum_check(ts: Sequence[float] = (1e3, 1e4), trials: int = 20,
                             seed: int = 0) -> dict[float, float]:
    """
    Largest relative gap between the two Gamma quotients and 2 t^{-z} cos(pi z/2),
    per t, over random small s1, s2, a, b; the gap shrinks like 1/t.
    """
    rng = np.random.default_rng(seed)
    samples = []
    for _ in range(trials):
        a, b = rng.uniform(-0.01, 0.01, size=2)
        s1 = complex(rng.uniform(0.05, 0.45), rng.uniform(-5, 5))
        s2 = complex(rng.uniform(0.05, 0.45), rng.uniform(-5, 5))
        samples.append((s1, s2, complex(a), complex(b)))
    out = {}
    for t in ts:
        worst = 0.0
        for s1, s2, a, b in samples:
            exact, merged = gamma_quotient_sum(s1, s2, a, b, t)
            worst = max(worst, abs(exact - merged) / abs(merged))
        out[float(t)] = worst
    return out


@dataclass
class RangeLint:
    in_range: bool
    messages: list[str]


def asymptotic_range_lint(cfg: MomentConfig, theta: float = 0.75, C: float = 1.25, beta: float = 1.0,
                       epsilon: float = 0.05) -> RangeLint:
    """
    Flags configurations outside the range where the asymptotic D = M0 + M1 + o(T)
    is expected, for the additive divisor exponents (theta, C, beta).
    Nothing here is enforced.
    """
    messages = []
    b = cfg.omega.b_exponent
    eta = cfg.eta
    if eta <= 0:
        messages.append("eta must be positive (K = T^{1+eta} beyond T)")
    if cfg.I.k < 2 or cfg.J.k < 2:
        messages.append("k, l >= 2 expected")
    if b <= (1 - beta) * (1 + eta) / (1 - epsilon):
        messages.append(f"b = {b:g} too small for beta = {beta:g}")
    needed = (C + (theta + epsilon) * (eta + 1)) / (1 + C)
    if b <= needed:
        messages.append(f"error term is not o(T): need b > {needed:.4g}, have {b:g}")
    if cfg.I.k == 2 and cfg.J.k == 2 and not 0 < eta < 1 / 3:
        messages.append("k = l = 2 is unconditional only for 0 < eta < 1/3")
    if eta >= 1:
        messages.append("K = o(T^2) fails: two-swap terms are no longer negligible")
    for message in messages:
        logger.warning("range lint: %s", message)
    return RangeLint(not messages, messages)


# ---------------------------------------------------------------------------
# Leading-order polynomials


X = sympy.Symbol("x")
Y = sympy.Symbol("y")
W33_COEFFICIENTS = (-2, 27, -324, 2268, -8694, 19278, -25452, 19764, -8343, 1479)
Q4_NUMERATOR = -X**4 + 8 * X**3 * Y - 24 * X**2 * Y**2 + 32 * X * Y**3 - 14 * Y**4


def _binom(n: int, r: int) -> int:
    if n < 0 or r < 0 or r > n:
        return 0
    return math.comb(n, r)


def gamma_kl(k: int, l: int, n: int) -> Fraction:
    """
    gamma_{k,l}(n) = sum_{i<=l, j<=k} C(l,i) C(k,j) C(n-1, i+j-2) C(i+j-2, i+k-l-1) for n >= 1;
    n = 0 uses the signed sum without the C(n-1, .) factor.
    """
    if n < 0 or k < 1 or l < 1:
        raise ValueError("need n >= 0 and k, l >= 1")
    total = 0
    for i in range(1, l + 1):
        for j in range(1, k + 1):
            tail = _binom(i + j - 2, i + k - l - 1)
            if n == 0:
                total += (-1) ** (k + l + i + j) * _binom(l, i) * _binom(k, j) * tail
            else:
                total += _binom(l, i) * _binom(k, j) * _binom(n - 1, i + j - 2) * tail
    return Fraction(total)


@dataclass
class MainTermPolynomials:
    k: int
    l: int
    gamma_values: tuple[Fraction, ...]
    w_poly: sympy.Poly

    def __call__(self, x):
        if isinstance(x, Fraction):
            x = sympy.Rational(x.numerator, x.denominator)
        return self.w_poly.eval(x)

    def coefficients(self) -> list[Fraction]:
        """Highest degree first."""
        return [Fraction(int(c.p), int(c.q)) for c in self.w_poly.all_coeffs()]


def w_kl(k: int, l: int) -> MainTermPolynomials:
    """
    w_{k,l}(x) = x^{kl} (1 - sum_{n<kl} C(kl, n+1) gamma_{k,l}(n) (-1)^{n+l+k} (1 - x^{-n-1})).

    Raises:
    - BudgetError when k or l exceeds 6
    """
    if k > POLY_BUDGET or l > POLY_BUDGET:
        raise BudgetError(f"exact w_kl is capped at k, l <= {POLY_BUDGET}")
    kl = k * l
    gammas = tuple(gamma_kl(k, l, n) for n in range(kl))
    expr = X**kl
    for n, g in enumerate(gammas):
        weight = sympy.Rational(math.comb(kl, n + 1) * (-1) ** (n + l + k)) * sympy.Rational(g.numerator, g.denominator)
        expr -= weight * (X**kl - X ** (kl - n - 1))
    poly = sympy.Poly(sympy.expand(expr), X, domain="QQ")
    if poly.degree() != kl:
        raise IdentityViolationError(f"w_{k},{l} has degree {poly.degree()} instead of {kl}", ("degree",))
    return MainTermPolynomials(k, l, gammas, poly)


def g_k(k: int) -> Fraction:
    """(k^2)! prod_{j<k} j!/(j+k)!"""
    value = Fraction(math.factorial(k * k))
    for j in range(k):
        value *= Fraction(math.factorial(j), math.factorial(j + k))
    return value


def a_kl(k: int, l: int, policy: TruncationPolicy = TruncationPolicy()) -> ProductResult:
    """
    prod_p (1 - 1/p)^{kl} sum_alpha tau_k(p^alpha) tau_l(p^alpha) / p^alpha,
    which is A_{I,J}(0) for I, J all zeros.
    """
    if k > POLY_BUDGET or l > POLY_BUDGET:
        raise BudgetError(f"a_kl is capped at k, l <= {POLY_BUDGET}")
    local = policy.with_overrides(series_length=max(policy.series_length, 400))
    result = A_product(ShiftSet.zeros(k), ShiftSet.zeros(l), 0.0, local)
    return ProductResult(complex(result.value.real, 0.0), result.prime_cutoff, result.tail_estimate)


def c_k(k: int, policy: TruncationPolicy = TruncationPolicy()) -> ProductResult:
    return a_kl(k, k, policy)


@dataclass
class Q4Leading:
    """Q4(x, y) = factor * numerator(x, y) with factor = 1/(zeta(2) 4!) = 1/(4 pi^2)."""

    numerator: sympy.Poly
    factor: sympy.Expr

    @property
    def float_factor(self) -> float:
        return float(self.factor)

    def evaluate(self, x: float, y: float) -> float:
        return self.float_factor * float(self.numerator.eval({X: x, Y: y}))


def leading_coefficient_Q4() -> Q4Leading:
    w22 = w_kl(2, 2).w_poly.as_expr()
    numerator = sympy.Poly(sympy.expand(Y**4 * w22.subs(X, X / Y)), X, Y, domain="QQ")
    factor = sympy.Integer(6) / sympy.pi**2 / sympy.factorial(4)
    return Q4Leading(numerator, sympy.simplify(factor))


@dataclass
class IdentityReport:
    checks: dict[str, bool]

    @property
    def passed(self) -> bool:
        return all(self.checks.values())

    @property
    def failed(self) -> list[str]:
        return [name for name, ok in self.checks.items() if not ok]


def polynomial_identity_checks(strict: bool = False) -> IdentityReport:
    """
    Exact checks of the polynomial layer:

    - w_{3,3}(1 + eta) + w_{3,3}(2 - eta) - 42 is the zero polynomial in eta
    - w_{4,4}(2) = 24024
    - y^4 w_{2,2}(x/y) = -x^4 + 8x^3y - 24x^2y^2 + 32xy^3 - 14y^4
    - the coefficients of w_{3,3}
    - g_3 = 42 and g_4 = 24024

    Raises:
    - IdentityViolationError when strict and any check fails
    """
    eta = sympy.Symbol("eta")
    w33 = w_kl(3, 3).w_poly.as_expr()
    merged = sympy.expand(w33.subs(X, 1 + eta) + w33.subs(X, 2 - eta) - 42)
    checks = {
        "w33_sum_is_42": sympy.Poly(merged, eta).is_zero,
        "w44_at_2": w_kl(4, 4).w_poly.eval(2) == 24024,
        "q4_numerator": sympy.expand(leading_coefficient_Q4().numerator.as_expr() - Q4_NUMERATOR) == 0,
        "w33_coefficients": tuple(int(c) for c in w_kl(3, 3).coefficients()) == W33_COEFFICIENTS,
        "g3": g_k(3) == 42,
        "g4": g_k(4) == 24024,
    }
    report = IdentityReport(checks)
    logger.info("polynomial identities: %s", "all pass" if report.passed else f"failed {report.failed}")
    if strict and not report.passed:
        raise IdentityViolationError(f"identity checks failed: {', '.join(report.failed)}", tuple(report.failed))
    return report
