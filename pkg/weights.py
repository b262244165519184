"""
Smooth weights and their transforms.

One smoothstep S(x) = sigma(x) / (sigma(x) + sigma(1 - x)), sigma(x) = exp(-1/x),
builds all three weights: the time window omega (two ramps of width T0),
the Dirichlet-polynomial cutoff phi (one ramp on [1, 1 + rho]) and the
dyadic bump behind W0. Transforms are reduced to integrals over the ramps,
where the integrands are compactly supported and smooth.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np
from numpy.polynomial import Chebyshev
from scipy.special import expit

from config import get_logger
from errors import PoleError
from quadrature import QuadratureSpec, integrate_complex, panels

logger = get_logger(__name__)

SQRT2 = math.sqrt(2.0)


def _scalar_or_array(x, out):
    return float(out) if np.ndim(x) == 0 else out


def smoothstep(x):
    """S(x): 0 for x <= 0, 1 for x >= 1, S(1/2) = 1/2, S(x) + S(1 - x) = 1."""
    xa = np.asarray(x, dtype=float)
    out = np.where(xa >= 1.0, 1.0, 0.0)
    inside = (xa > 0.0) & (xa < 1.0)
    xi = xa[inside]
    out[inside] = expit(1.0 / (1.0 - xi) - 1.0 / xi)
    return _scalar_or_array(x, out)


def smoothstep_prime(x):
    """S'(x) = S (1 - S) (1/x^2 + 1/(1-x)^2) on (0, 1), zero elsewhere."""
    xa = np.asarray(x, dtype=float)
    out = np.zeros(xa.shape)
    inside = (xa > 0.0) & (xa < 1.0)
    xi = xa[inside]
    s = expit(1.0 / (1.0 - xi) - 1.0 / xi)
    out[inside] = s * (1.0 - s) * (1.0 / xi**2 + 1.0 / (1.0 - xi) ** 2)
    return _scalar_or_array(x, out)


@dataclass(frozen=True)
class OmegaWeight:
    """
    Time window omega(t) = amplitude * S((t - c1 T)/T0) * S((c2 T - t)/T0).

    Args:
    - T: height
    - T0: ramp width, T^b_exponent <= T0 and the ramps may not overlap
    - c1, c2: support [c1 T, c2 T]
    - amplitude: overall scale (1 for the standard window)

    Raises:
    - ValueError when any of the above fails
    """

    T: float
    T0: float
    c1: float = 1.0
    c2: float = 2.0
    b_exponent: float = 0.8
    amplitude: float = 1.0

    def __post_init__(self):
        if self.T <= 0 or self.T0 <= 0:
            raise ValueError("T and T0 must be positive")
        if not 0 < self.c1 < self.c2:
            raise ValueError("need 0 < c1 < c2")
        if not 0 < self.b_exponent <= 1:
            raise ValueError("b_exponent must lie in (0, 1]")
        if self.T0 < self.T**self.b_exponent * (1 - 1e-12) or self.T0 > self.T:
            raise ValueError("need T^b <= T0 <= T")
        if 2 * self.T0 > (self.c2 - self.c1) * self.T:
            raise ValueError("ramps of width T0 overlap")

    @classmethod
    def standard(cls, T: float, b_exponent: float = 0.8, c1: float = 1.0, c2: float = 2.0) -> OmegaWeight:
        return cls(T, T**b_exponent, c1, c2, b_exponent)

    @property
    def support(self) -> tuple[float, float]:
        return self.c1 * self.T, self.c2 * self.T

    @property
    def center(self) -> float:
        return (self.c1 + self.c2) * self.T / 2

    def breakpoints(self) -> tuple[float, float, float, float]:
        lo, hi = self.support
        return lo, lo + self.T0, hi - self.T0, hi

    def scaled(self, factor: float) -> OmegaWeight:
        return OmegaWeight(self.T, self.T0, self.c1, self.c2, self.b_exponent, self.amplitude * factor)


@dataclass(frozen=True)
class PhiCutoff:
    """phi = 1 on [0, 1], 0 on [1 + rho, inf), phi(t) = 1 - S((t - 1)/rho) in between."""

    rho: float = 0.1

    def __post_init__(self):
        if not 0 < self.rho < 0.5:
            raise ValueError("rho must lie in (0, 1/2)")


def omega_eval(w: OmegaWeight, t):
    ta = np.asarray(t, dtype=float)
    lo, hi = w.support
    out = w.amplitude * smoothstep((ta - lo) / w.T0) * smoothstep((hi - ta) / w.T0)
    return _scalar_or_array(t, np.asarray(out, dtype=float))


def omega_prime(w: OmegaWeight, t):
    ta = np.asarray(t, dtype=float)
    lo, hi = w.support
    left, right = (ta - lo) / w.T0, (hi - ta) / w.T0
    out = w.amplitude * (smoothstep_prime(left) * smoothstep(right)
                         - smoothstep(left) * smoothstep_prime(right)) / w.T0
    return _scalar_or_array(t, np.asarray(out, dtype=float))


def omega_hat(w: OmegaWeight, u: float, q: QuadratureSpec = QuadratureSpec()) -> complex:
    """
    omega_hat(u) = integral of omega(t) e^{-2 pi i u t} dt by adaptive quadrature
    on the two ramps and the plateau.

    Raises:
    - QuadratureError with the achieved estimate
    """
    points = w.breakpoints()
    scale = w.amplitude * (w.c2 - w.c1) * w.T
    f = lambda t: omega_eval(w, t)
    if u == 0:
        value, _ = integrate_complex(f, points[0], points[3], q, points[1:3], scale)
        return complex(value.real, 0.0)
    frequency = 2 * math.pi * u
    cos_part, _ = integrate_complex(f, points[0], points[3], q, points[1:3], scale, "cos", frequency)
    sin_part, _ = integrate_complex(f, points[0], points[3], q, points[1:3], scale, "sin", frequency)
    return complex(cos_part.real, -sin_part.real)


_RAMP_NODES, _RAMP_WEIGHTS = panels(0.0, 1.0, 16, 48)


def _ramp_transform_direct(v: np.ndarray) -> np.ndarray:
    """r(v) = integral_0^1 S'(x) e^{-2 pi i v x} dx by composite Gauss-Legendre."""
    weights = _RAMP_WEIGHTS * smoothstep_prime(_RAMP_NODES)
    out = np.empty(v.shape, dtype=complex)
    for chunk in np.array_split(np.arange(v.size), max(1, v.size // 4096 + 1)):
        out[chunk] = np.exp(-2j * math.pi * np.multiply.outer(v[chunk], _RAMP_NODES)) @ weights
    return out


@lru_cache(maxsize=None)
def _ramp_interpolant(vmax: float) -> tuple[Chebyshev, Chebyshev]:
    degree = int(1.5 * math.pi * vmax) + 40
    real = Chebyshev.interpolate(lambda v: _ramp_transform_direct(np.asarray(v)).real, degree, domain=[0, vmax])
    imag = Chebyshev.interpolate(lambda v: _ramp_transform_direct(np.asarray(v)).imag, degree, domain=[0, vmax])
    logger.debug("ramp transform interpolant on [0, %g] of degree %d", vmax, degree)
    return real, imag


def ramp_transform(v) -> np.ndarray:
    """r(v) for real v, with r(-v) = conj r(v)."""
    v = np.atleast_1d(np.asarray(v, dtype=float))
    av = np.abs(v)
    out = np.empty(v.shape, dtype=complex)
    table = av <= 64.0
    if np.any(table):
        vmax = 2.0 ** max(2, math.ceil(math.log2(max(av[table].max(), 1e-300))))
        real, imag = _ramp_interpolant(vmax)
        out[table] = real(av[table]) + 1j * imag(av[table])
    if np.any(~table):
        out[~table] = _ramp_transform_direct(av[~table])
    return np.where(v < 0, out.conj(), out)


def omega_hat_many(w: OmegaWeight, u) -> np.ndarray:
    """
    omega_hat on an array of frequencies through integration by parts onto the ramps:

        omega_hat(u) = (e^{-2 pi i u c1 T} r(u T0) - e^{-2 pi i u c2 T} conj r(u T0)) / (2 pi i u)

    with r the ramp transform. Tiny |u| T falls back to the symmetric Taylor form.
    """
    u = np.atleast_1d(np.asarray(u, dtype=float))
    lo, hi = w.support
    total = w.amplitude * ((w.c2 - w.c1) * w.T - w.T0)
    out = np.empty(u.shape, dtype=complex)
    small = np.abs(u) * w.T < 1e-7
    out[small] = total * np.exp(-2j * math.pi * u[small] * w.center)
    big = ~small
    if np.any(big):
        ub = u[big]
        r = ramp_transform(ub * w.T0)
        top = np.exp(-2j * math.pi * ub * lo) * r - np.exp(-2j * math.pi * ub * hi) * r.conj()
        out[big] = w.amplitude * top / (2j * math.pi * ub)
    return out


def omega_mellin(w: OmegaWeight, z, order: int = 16) -> np.ndarray:
    """
    Omega(z) = integral of omega(t) t^{-z} dt, as -(1/(1-z)) * integral of omega'(t) t^{1-z} dt
    over the two ramps.
    """
    z = np.atleast_1d(np.asarray(z, dtype=complex))
    if np.any(np.abs(z - 1) < 1e-12):
        raise PoleError("omega_mellin integration by parts needs z != 1", 1 + 0j)
    a, b, c, d = w.breakpoints()
    height = float(np.abs(z.imag).max()) if z.size else 0.0
    count = max(2, math.ceil(height * math.log(b / a) / math.pi) + 2)
    t_left, w_left = panels(a, b, count, order)
    t_right, w_right = panels(c, d, count, order)
    t = np.concatenate([t_left, t_right])
    weights = np.concatenate([w_left, w_right]) * omega_prime(w, t)
    log_t = np.log(t)
    out = np.empty(z.shape, dtype=complex)
    for chunk in np.array_split(np.arange(z.size), max(1, z.size * t.size // 4_000_000 + 1)):
        kernel = np.exp(np.multiply.outer(1.0 - z[chunk], log_t))
        out[chunk] = -(kernel @ weights) / (1.0 - z[chunk])
    return out


def phi_eval(p: PhiCutoff, t):
    ta = np.asarray(t, dtype=float)
    return _scalar_or_array(t, np.asarray(1.0 - smoothstep((ta - 1.0) / p.rho), dtype=float))


def _psi_density(x, squared: bool):
    # -phi'(1 + rho x) rho for phi, -(phi^2)'(1 + rho x) rho for phi^2
    if squared:
        return 2.0 * (1.0 - smoothstep(x)) * smoothstep_prime(x)
    return smoothstep_prime(x)


def _psi(p: PhiCutoff, s: complex, q: QuadratureSpec, squared: bool) -> complex:
    f = lambda x: complex(_psi_density(x, squared)) * complex(1.0 + p.rho * x) ** s
    value, _ = integrate_complex(f, 0.0, 1.0, q, (0.5,), 1.0)
    return value


def mellin_phi(p: PhiCutoff, s: complex, q: QuadratureSpec = QuadratureSpec()) -> complex:
    """
    Phi(s) = integral of phi(t) t^{s-1} dt = Psi(s)/s, Psi(s) = -integral of phi'(t) t^s dt.

    Raises:
    - PoleError at s = 0
    """
    if s == 0:
        raise PoleError("Phi has a simple pole at 0", 0j)
    return _psi(p, s, q, False) / s


def phi2(p: PhiCutoff, s: complex, q: QuadratureSpec = QuadratureSpec()) -> complex:
    """Phi_2(s) = integral of phi(t)^2 t^{s-1} dt, stabilized the same way as Phi."""
    if s == 0:
        raise PoleError("Phi_2 has a simple pole at 0", 0j)
    return _psi(p, s, q, True) / s


def _psi_many(p: PhiCutoff, s: np.ndarray, squared: bool, order: int) -> np.ndarray:
    height = float(np.abs(s.imag).max()) if s.size else 0.0
    count = max(4, math.ceil(height * math.log1p(p.rho) / math.pi) + 4)
    x, w = panels(0.0, 1.0, count, order)
    weights = w * _psi_density(x, squared)
    log_t = np.log1p(p.rho * x)
    out = np.empty(s.shape, dtype=complex)
    for chunk in np.array_split(np.arange(s.size), max(1, s.size * x.size // 4_000_000 + 1)):
        out[chunk] = np.exp(np.multiply.outer(s[chunk], log_t)) @ weights
    return out


def mellin_phi_many(p: PhiCutoff, s, order: int = 16) -> np.ndarray:
    s = np.atleast_1d(np.asarray(s, dtype=complex))
    if np.any(s == 0):
        raise PoleError("Phi has a simple pole at 0", 0j)
    return _psi_many(p, s, False, order) / s


def phi2_many(p: PhiCutoff, s, order: int = 16) -> np.ndarray:
    s = np.atleast_1d(np.asarray(s, dtype=complex))
    if np.any(s == 0):
        raise PoleError("Phi_2 has a simple pole at 0", 0j)
    return _psi_many(p, s, True, order) / s


def phi_residue_probe(p: PhiCutoff, points=(1e-2, 1e-3), squared: bool = False,
                      q: QuadratureSpec = QuadratureSpec(tol=1e-12)) -> float:
    """
    Residue of Phi (or Phi_2) at 0 from s*Phi(s) at two small real points,
    extrapolated linearly to s = 0.
    """
    s1, s2 = points
    r1 = (s1 * (phi2(p, s1, q) if squared else mellin_phi(p, s1, q))).real
    r2 = (s2 * (phi2(p, s2, q) if squared else mellin_phi(p, s2, q))).real
    return (s1 * r2 - s2 * r1) / (s1 - s2)


def phi_laurent_constant(p: PhiCutoff, q: QuadratureSpec = QuadratureSpec(tol=1e-12)) -> float:
    """Constant term of Phi at 0: Psi'(0) = integral of S'(x) log(1 + rho x) dx."""
    value, _ = integrate_complex(lambda x: smoothstep_prime(x) * math.log1p(p.rho * x), 0.0, 1.0, q, (0.5,))
    return value.real


def dyadic_bump(y):
    """h(y) = S(4(y - 1)) S(4(2 - y)): positive on (1, 2), zero elsewhere."""
    ya = np.asarray(y, dtype=float)
    out = smoothstep(4.0 * (ya - 1.0)) * smoothstep(4.0 * (2.0 - ya))
    return _scalar_or_array(y, np.asarray(out, dtype=float))


def w0(y):
    """W0(y) = h(y) / sum_j h(y / 2^{j/2}); only j in {-1, 0, 1} can contribute on (1, 2)."""
    ya = np.asarray(y, dtype=float)
    h = dyadic_bump(ya)
    total = dyadic_bump(ya / SQRT2) + h + dyadic_bump(ya * SQRT2)
    out = np.divide(h, total, out=np.zeros(np.shape(h)), where=np.asarray(h) > 0)
    return _scalar_or_array(y, out)


def dyadic_window(u):
    """W(u) = u^{-1/2} W0(u)."""
    ua = np.asarray(u, dtype=float)
    out = np.zeros(ua.shape)
    pos = ua > 0
    out[pos] = w0(ua[pos]) / np.sqrt(ua[pos])
    return _scalar_or_array(u, out)


def w0_partition(x: float) -> list[tuple[float, float]]:
    """
    The scales M = 2^{k/2} with W0(x/M) > 0 and their weights, which sum to 1.
    """
    if x < 1:
        raise ValueError("w0_partition needs x >= 1")
    top = 2 * math.log2(x)
    ks = range(math.floor(top - 2) + 1, math.ceil(top))
    scales = [2.0 ** (k / 2) for k in ks]
    bumps = [float(dyadic_bump(x / M)) for M in scales]
    total = sum(bumps)
    return [(M, h / total) for M, h in zip(scales, bumps) if h > 0]


def partition_of_unity_defect(x) -> float:
    """max |sum_k W0(x / 2^{k/2}) - 1| over the points x >= 1."""
    x = np.atleast_1d(np.asarray(x, dtype=float))
    if np.any(x < 1):
        raise ValueError("partition_of_unity_defect needs x >= 1")
    total = np.zeros_like(x)
    top = math.ceil(2 * math.log2(x.max())) + 2
    for k in range(-2, top + 1):
        total += w0(x / 2.0 ** (k / 2))
    return float(np.abs(total - 1).max())


def omega_hat_decay_ratios(w: OmegaWeight, windows: int = 2, points: int = 256) -> list[float]:
    """
    Ratios of max |omega_hat| over consecutive doublings [2^j u0, 2^{j+1} u0]
    starting at u0 = T0^{-0.9}.
    """
    start = w.T0 ** -0.9
    maxima = []
    for j in range(windows + 1):
        u = np.linspace(start * 2**j, start * 2 ** (j + 1), points)
        maxima.append(float(np.abs(omega_hat_many(w, u)).max()))
    return [b / a for a, b in zip(maxima, maxima[1:])]


def derivative_bound_constants(f, lo: float, hi: float, scale: float, orders: int = 4,
                               samples: int = 8001) -> list[float]:
    """
    max |f^(j)| * scale^j over [lo, hi] for j = 1..orders, by repeated
    central differences on a uniform grid.
    """
    grid = np.linspace(lo, hi, samples)
    values = np.asarray(f(grid), dtype=float)
    step = grid[1] - grid[0]
    constants = []
    for _ in range(orders):
        values = np.gradient(values, step)
        constants.append(float(np.abs(values[2 * orders:-2 * orders]).max()) * scale ** (len(constants) + 1))
    return constants


@dataclass
class WeightProfile:
    """
    omega and phi together with the quadrature settings used for their
    transforms; omega_hat(0) is cached.
    """

    omega: OmegaWeight
    phi: PhiCutoff = field(default_factory=PhiCutoff)
    quad: QuadratureSpec = field(default_factory=QuadratureSpec)
    _omega_hat0: complex | None = field(default=None, init=False, repr=False)

    @property
    def omega_hat0(self) -> float:
        if self._omega_hat0 is None:
            self._omega_hat0 = omega_hat(self.omega, 0.0, self.quad)
        return self._omega_hat0.real

    def describe(self) -> dict:
        return {
            "T": self.omega.T, "T0": self.omega.T0, "c1": self.omega.c1, "c2": self.omega.c2,
            "b_exponent": self.omega.b_exponent, "amplitude": self.omega.amplitude,
            "rho": self.phi.rho, "smoothstep": "exp(-1/x)",
        }
