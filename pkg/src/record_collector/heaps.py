"""Asymptotic Heaps-law approximation for Mandelbrot sampling.

For large ``n`` and ``m`` with ``n << m ** (theta - 1)``,
``E[R_m(n)] ~ alpha * n ** beta`` with ``beta = 1/theta`` and
``alpha = a_inf ** beta * Gamma(1 - beta)``. Reading ``k -> E[X_m(k)]`` as
the inverse of ``n -> E[R_m(n)]`` gives ``E[X_m(k)] ~ (k / alpha) ** theta``,
trusted for ``k`` well below the threshold ``tau`` where that curve reaches
``m ** (theta - 1)``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .distribution import ProbabilityVector, normalization_limit
from .exceptions import DivergentSeriesError


def gamma_fn(x: float) -> float:
    """Gamma function for ``x > 0``."""
    if not x > 0:
        raise ValueError(f"gamma_fn is only defined here for x > 0, got {x!r}")
    return math.gamma(x)


@dataclass(frozen=True)
class HeapsApprox:
    """Asymptotic coefficients for a Mandelbrot law with exponent ``theta`` and shift ``c``.

    Attributes
    ----------
    beta : float
        Heaps exponent ``1 / theta``.
    a_inf : float
        Limit of the normalization constant as ``m -> inf``.
    alpha : float
        Heaps constant ``a_inf ** beta * Gamma(1 - beta)``.
    """

    theta: float
    c: float
    beta: float
    a_inf: float
    alpha: float

    def __post_init__(self):
        if not self.alpha > 0:
            raise ValueError("alpha must be positive")

    def records_limit(self, m: int) -> float:
        """Upper end ``m ** (theta - 1)`` of the region where ``n`` is small enough."""
        return float(m) ** (self.theta - 1.0)


def alpha_coefficient(theta: float, c: float, tol: float = 1e-13) -> HeapsApprox:
    """Build :class:`HeapsApprox` for ``1 < theta <= 2`` and ``c >= 0``."""
    if not theta > 1.0:
        raise DivergentSeriesError(
            f"theta must exceed 1: Gamma(1 - 1/theta) has a pole and a_inf = 0 at theta = 1 (got {theta!r})"
        )
    if theta > 2.0:
        raise ValueError(f"theta must be at most 2, got {theta!r}")
    if c < 0:
        raise ValueError(f"c must be nonnegative, got {c!r}")
    a_inf = normalization_limit(theta, c, tol)
    beta = 1.0 / theta
    alpha = a_inf**beta * gamma_fn(1.0 - beta)
    return HeapsApprox(theta=float(theta), c=float(c), beta=beta, a_inf=a_inf, alpha=alpha)


def approx_expected_records(n, h: HeapsApprox) -> float:
    """``alpha * n ** beta``; meaningful only for ``n << m ** (theta - 1)``."""
    if not n > 0:
        raise ValueError(f"n must be positive, got {n!r}")
    return h.alpha * n**h.beta


def approx_expected_draws(k, h: HeapsApprox) -> float:
    """``(k / alpha) ** theta``; meaningful only for ``k << tau`` (see :func:`validity_threshold`)."""
    if not k > 0:
        raise ValueError(f"k must be positive, got {k!r}")
    return (k / h.alpha) ** h.theta


def validity_threshold(m: int, h: HeapsApprox) -> float:
    """``tau = alpha * m ** ((theta - 1) / theta)``, where ``(tau / alpha) ** theta = m ** (theta - 1)``."""
    if not isinstance(m, int) or m < 2:
        raise ValueError(f"m must be an integer >= 2, got {m!r}")
    return h.alpha * float(m) ** ((h.theta - 1.0) / h.theta)


def simulated_validity_threshold(
    p: ProbabilityVector, h: HeapsApprox, replicates=10_000, seed=0, threads=None
) -> float:
    """Threshold ``tau`` found on simulated means instead of the power law.

    Doubles ``k`` until the simulated ``E[X_m(k)]`` reaches ``m ** (theta - 1)``,
    bisects on integer ``k`` for the first crossing and interpolates linearly
    between the bracketing integers. Returns ``m`` if even the full
    collection stays below the level. Probing stops at the crossing, so large
    ``k`` (expensive near full collection) is never simulated needlessly.
    """
    from .montecarlo import estimate_expected_draws

    level = h.records_limit(p.m)
    cache = {}

    def mean(k):
        if k not in cache:
            cache[k] = estimate_expected_draws(p, k, replicates, seed, threads).mean
        return cache[k]

    if mean(1) >= level:
        return 1.0
    lo, hi = 1, 2
    while hi < p.m and mean(hi) < level:
        lo, hi = hi, min(2 * hi, p.m)
    if mean(hi) < level:
        return float(p.m)
    while hi - lo > 1:
        mid = (lo + hi) // 2
        if mean(mid) >= level:
            hi = mid
        else:
            lo = mid
    y0, y1 = mean(lo), mean(hi)
    return lo + (level - y0) / (y1 - y0)
