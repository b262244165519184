"""
Quadrature building blocks shared by the weight transforms, the additive
divisor main term and the moment contours.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Callable, Sequence

import mpmath
import numpy as np
from numpy.polynomial.legendre import leggauss
from scipy import integrate

from config import get_logger
from errors import QuadratureError

logger = get_logger(__name__)

ADAPTIVE_GAUSS = "adaptive-Gauss"
TANH_SINH = "tanh-sinh"


@dataclass(frozen=True)
class QuadratureSpec:
    """
    - scheme: adaptive-Gauss (scipy QUADPACK) or tanh-sinh (mpmath)
    - max_depth: subdivision limit
    - tol: absolute tolerance relative to the integrand scale
    """

    SCHEMES = (ADAPTIVE_GAUSS, TANH_SINH)

    scheme: str = ADAPTIVE_GAUSS
    max_depth: int = 200
    tol: float = 1e-10

    def __post_init__(self):
        if self.scheme not in self.SCHEMES:
            raise ValueError(f"unknown quadrature scheme {self.scheme!r}")
        if self.tol < 1e-13:
            raise ValueError("quadrature tol must be at least 1e-13")
        if self.max_depth < 1:
            raise ValueError("max_depth must be positive")


@lru_cache(maxsize=None)
def gauss_legendre(order: int) -> tuple[np.ndarray, np.ndarray]:
    return leggauss(order)


def panels(a: float, b: float, count: int, order: int) -> tuple[np.ndarray, np.ndarray]:
    """Composite Gauss-Legendre nodes and weights on [a, b] with equal panels."""
    x, w = gauss_legendre(order)
    edges = np.linspace(a, b, count + 1)
    half = np.diff(edges) / 2
    mid = (edges[:-1] + edges[1:]) / 2
    nodes = (mid[:, None] + half[:, None] * x[None, :]).ravel()
    weights = (half[:, None] * w[None, :]).ravel()
    return nodes, weights


@dataclass
class VerticalContour:
    """
    Nodes for (1/2 pi i) * integral of F over Re s = c, |Im s| <= height.

    With half set only Im s >= 0 is sampled and the integrand is assumed to
    satisfy F(conj s) = conj F(s), so the integral is real.
    """

    c: float
    height: float
    u: np.ndarray
    weights: np.ndarray
    half: bool

    @property
    def s(self) -> np.ndarray:
        return self.c + 1j * self.u

    def integrate(self, values: np.ndarray) -> complex:
        total = np.sum(self.weights * values)
        return complex(total.real, 0.0) if self.half else complex(total)

    def __len__(self) -> int:
        return len(self.u)


def vertical_contour(c: float, height: float, frequency: float, order: int, half: bool) -> VerticalContour:
    """
    Panels are half an oscillation period of e^{i u frequency} wide.
    """
    width = math.pi / max(frequency, 1.0)
    count = max(1, math.ceil(height / width))
    if half:
        u, w = panels(0.0, height, count, order)
        w = w / math.pi
    else:
        u, w = panels(-height, height, 2 * count, order)
        w = w / (2 * math.pi)
    logger.debug("vertical contour c=%.4g height=%.4g nodes=%d", c, height, len(u))
    return VerticalContour(c, height, u, w, half)


def integrate_complex(f: Callable[[float], complex], a: float, b: float, spec: QuadratureSpec,
                      points: Sequence[float] = (), scale: float = 1.0,
                      weight: str | None = None, wvar: float | None = None) -> tuple[complex, float]:
    """
    Integral of a complex-valued f over [a, b] with the requested scheme.

    weight/wvar pass through scipy's oscillatory weights ('cos' or 'sin');
    they only apply to the adaptive-Gauss scheme.

    Raises:
    - QuadratureError when the achieved error estimate exceeds spec.tol * scale
    """
    if b <= a:
        return 0j, 0.0
    inner = sorted(p for p in points if a < p < b)
    if spec.scheme == TANH_SINH:
        if weight is not None:
            kernel = math.cos if weight == "cos" else math.sin
            g = lambda x: f(x) * kernel(wvar * x)
        else:
            g = f
        value, error = mpmath.quad(lambda x: mpmath.mpc(g(float(x))), [a, *inner, b],
                                   method="tanh-sinh", error=True, maxdegree=min(spec.max_depth, 10))
        value, error = complex(value), float(error)
    else:
        value, error = 0j, 0.0
        edges = [a, *inner, b]
        for lo, hi in zip(edges[:-1], edges[1:]):
            for part, pick in ((1.0, lambda z: z.real), (1j, lambda z: z.imag)):
                kwargs = {"limit": spec.max_depth, "epsabs": spec.tol * scale * 1e-2, "epsrel": 0.0}
                if weight is not None:
                    kwargs.update(weight=weight, wvar=wvar)
                piece, err = integrate.quad(lambda x: pick(complex(f(x))), lo, hi, **kwargs)
                value += part * piece
                error += err
    if not math.isfinite(error) or error > spec.tol * scale:
        raise QuadratureError(f"quadrature error estimate {error:.3e} above {spec.tol * scale:.3e}", error)
    return value, error
