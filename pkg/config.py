"""
Shared numerical defaults and the truncation policy.

Everything that decides where an infinite object gets cut off lives on
TruncationPolicy so a result can always be traced back to its cutoffs.
"""
from __future__ import annotations

import logging
import os
from dataclasses import asdict, dataclass, replace

LOGGER_NAME = "dirichlet_moments"
JOBS_ENV = "DM_JOBS"


@dataclass(frozen=True)
class TruncationPolicy:
    """
    Numerical cutoffs used by the Euler products and contour integrals.

    - prime_cutoff: largest prime kept in a truncated Euler product
    - series_length: cap on the number of terms of a local series
    - contour_height: |Im s| cap on vertical contours (None derives it from the weight decay)
    - quadrature_order: Gauss-Legendre nodes per panel
    - target_tol: requested relative accuracy of truncated pieces
    - pole_margin: closest allowed approach to a zeta pole
    - sieve_cap: largest table a sieve may build
    - support_cap: largest number of points a brute-force sum may visit
    """

    DEFAULT_PRIME_CUTOFF = 10_000
    DEFAULT_SERIES_LENGTH = 40
    MAX_CONTOUR_HEIGHT = 4000.0

    prime_cutoff: int = DEFAULT_PRIME_CUTOFF
    series_length: int = DEFAULT_SERIES_LENGTH
    contour_height: float | None = None
    quadrature_order: int = 8
    target_tol: float = 1e-10
    pole_margin: float = 1e-4
    sieve_cap: int = 20_000_000
    support_cap: int = 10_000_000

    def __post_init__(self):
        if self.prime_cutoff < 2:
            raise ValueError("prime_cutoff must be at least 2")
        if self.series_length < 1:
            raise ValueError("series_length must be positive")
        if self.contour_height is not None and not 0 < self.contour_height <= self.MAX_CONTOUR_HEIGHT:
            raise ValueError("contour_height out of range")
        if self.quadrature_order < 2:
            raise ValueError("quadrature_order must be at least 2")
        if not 0 < self.target_tol < 1:
            raise ValueError("target_tol must lie in (0, 1)")
        if self.pole_margin <= 0:
            raise ValueError("pole_margin must be positive")

    def with_overrides(self, **changes) -> TruncationPolicy:
        return replace(self, **{k: v for k, v in changes.items() if v is not None})

    def to_dict(self) -> dict:
        return asdict(self)


def get_logger(name: str) -> logging.Logger:
    return logging.getLogger(f"{LOGGER_NAME}.{name}")


def configure_logging(verbosity: int = 0) -> None:
    level = logging.WARNING
    if verbosity == 1:
        level = logging.INFO
    elif verbosity >= 2:
        level = logging.DEBUG
    logging.basicConfig(level=level, format="%(levelname)s %(name)s: %(message)s")
    logging.getLogger(LOGGER_NAME).setLevel(level)


def default_jobs() -> int:
    raw = os.environ.get(JOBS_ENV, "")
    try:
        return max(1, int(raw))
    except ValueError:
        return 1
