"""Finite discrete distributions and the Mandelbrot family.

A :class:`ProbabilityVector` is an immutable, strictly positive PMF on
``{1, ..., m}``. Mandelbrot weights are ``(c + i) ** -theta`` normalized by
``a_m``; :func:`normalization_limit` gives the ``m -> inf`` limit of ``a_m``.
"""

from __future__ import annotations

import math
import os
from dataclasses import dataclass, field

import numpy as np

from .exceptions import DivergentSeriesError, InvalidDistributionError

#: Absolute tolerance on ``sum(p) == 1`` accepted at construction.
SUM_TOLERANCE = 1e-12


class ProbabilityVector:
    """Validated PMF ``p_1, ..., p_m`` with every entry strictly positive.

    Inputs whose sum is within :data:`SUM_TOLERANCE` of one are divided by
    their exact (``math.fsum``) sum so the stored vector is normalized to
    machine precision.

    Parameters
    ----------
    probs : sequence of float
        One probability per support point, in support order.
    label : str, optional
        Human readable descriptor, carried into result tables.
    """

    __slots__ = ("_probs", "label")

    def __init__(self, probs, label=None):
        arr = np.array(probs, dtype=np.float64).ravel()
        if arr.size < 1:
            raise InvalidDistributionError("support size m must be at least 1")
        if not np.all(np.isfinite(arr)):
            raise InvalidDistributionError("probabilities must be finite")
        bad = np.flatnonzero(arr <= 0.0)
        if bad.size:
            raise InvalidDistributionError(
                f"probabilities must be strictly positive; entry {bad[0] + 1} is {arr[bad[0]]!r}"
            )
        total = math.fsum(arr)
        if abs(total - 1.0) > SUM_TOLERANCE:
            raise InvalidDistributionError(
                f"probabilities sum to {total!r}, not 1 within {SUM_TOLERANCE}"
            )
        arr = arr / total
        arr.setflags(write=False)
        self._probs = arr
        self.label = label if label is not None else f"custom(m={arr.size})"

    @classmethod
    def from_weights(cls, weights, label=None):
        """Normalize arbitrary positive weights into a PMF."""
        w = np.array(weights, dtype=np.float64).ravel()
        if w.size < 1:
            raise InvalidDistributionError("support size m must be at least 1")
        if np.any(~np.isfinite(w)) or np.any(w <= 0):
            raise InvalidDistributionError("weights must be finite and strictly positive")
        return cls(w / math.fsum(w), label=label)

    @property
    def probs(self) -> np.ndarray:
        return self._probs

    @property
    def m(self) -> int:
        return int(self._probs.size)

    def __len__(self):
        return self.m

    def __iter__(self):
        return iter(self._probs.tolist())

    def __getitem__(self, i):
        return float(self._probs[i])

    def __eq__(self, other):
        if not isinstance(other, ProbabilityVector):
            return NotImplemented
        return np.array_equal(self._probs, other._probs)

    def __hash__(self):
        return hash(self._probs.tobytes())

    def __repr__(self):
        return f"ProbabilityVector(m={self.m}, label={self.label!r})"

    def leave_probability(self, indices) -> float:
        """Return ``1 - sum(p_i for i in indices)`` (0-based indices, pairwise distinct).

        Computed as the exact sum of the remaining entries, which avoids the
        cancellation of ``1 - sum`` when few entries remain.
        """
        idx = list(indices)
        if len(set(idx)) != len(idx):
            raise ValueError("indices must be pairwise distinct")
        keep = np.ones(self.m, dtype=bool)
        keep[idx] = False
        return math.fsum(self._probs[keep])

    def cdf(self) -> np.ndarray:
        """Cumulative sums with the last entry pinned to exactly 1."""
        c = np.cumsum(self._probs)
        c[-1] = 1.0
        return c


def uniform_pmf(m: int) -> ProbabilityVector:
    """Uniform distribution on ``m`` points."""
    if not isinstance(m, (int, np.integer)) or m < 1:
        raise InvalidDistributionError(f"support size m must be a positive integer, got {m!r}")
    return ProbabilityVector(np.full(int(m), 1.0 / m), label=f"uniform(m={m})")


def _power_sum(theta, c, lo, hi):
    """Exact-rounded ``sum((c + i) ** -theta for i in lo..hi)``, smallest terms first."""
    i = np.arange(hi, lo - 1, -1, dtype=np.float64)
    return math.fsum((c + i) ** -theta)


@dataclass(frozen=True)
class MandelbrotParams:
    """Parameters ``(m, theta, c)`` of a truncated Mandelbrot law.

    ``a_m`` is computed once on construction.
    """

    m: int
    theta: float
    c: float
    a_m: float = field(init=False, repr=False)

    def __post_init__(self):
        if not isinstance(self.m, (int, np.integer)) or self.m < 1:
            raise InvalidDistributionError(f"m must be a positive integer, got {self.m!r}")
        if not 1.0 <= self.theta <= 2.0:
            raise InvalidDistributionError(f"theta must lie in [1, 2], got {self.theta!r}")
        if not self.c >= 0.0:
            raise InvalidDistributionError(f"c must be nonnegative, got {self.c!r}")
        object.__setattr__(self, "a_m", 1.0 / _power_sum(self.theta, self.c, 1, self.m))


def mandelbrot_pmf(params: MandelbrotParams) -> ProbabilityVector:
    """PMF ``p_i = a_m (c + i) ** -theta`` for ``i = 1..m``."""
    i = np.arange(1, params.m + 1, dtype=np.float64)
    w = params.a_m * (params.c + i) ** -params.theta
    label = f"mandelbrot(m={params.m},theta={params.theta:g},c={params.c:g})"
    return ProbabilityVector(w, label=label)


def mandelbrot(m, theta=1.75, c=0.30) -> ProbabilityVector:
    """Shorthand for ``mandelbrot_pmf(MandelbrotParams(m, theta, c))``."""
    return mandelbrot_pmf(MandelbrotParams(m, theta, c))


def tail_bracket(theta, c, n):
    """Two-sided bound on ``sum_{i > n} (c + i) ** -theta`` for ``theta > 1``.

    ``f(x) = (c + x) ** -theta`` is decreasing and convex, so each term is at
    most the integral over ``[i - 1/2, i + 1/2]`` (midpoint rule) and at least
    the trapezoid integral correction. Both bounds lie inside the plain
    integral-test bracket ``[int_{n+1}^inf f, int_n^inf f]``.
    """
    e = theta - 1.0
    upper = (c + n + 0.5) ** -e / e
    lower = (c + n + 1.0) ** -e / e + 0.5 * (c + n + 1.0) ** -theta
    return lower, upper


def hurwitz_sum(theta, c, tol=1e-12):
    """Return ``sum_{i >= 1} (c + i) ** -theta`` with absolute error at most ``tol``."""
    if not theta > 1.0:
        raise DivergentSeriesError(f"series diverges for theta <= 1 (theta={theta!r})")
    if c < 0:
        raise InvalidDistributionError(f"c must be nonnegative, got {c!r}")
    if not tol > 0:
        raise ValueError("tol must be positive")
    n = 16
    while True:
        lo, hi = tail_bracket(theta, c, n)
        if hi - lo <= tol:
            break
        n *= 2
    # midpoint of the bracket: error at most half its width
    return _power_sum(theta, c, 1, n) + 0.5 * (lo + hi)


def normalization_limit(theta, c, tol=1e-12):
    """Limit ``a_inf = 1 / sum_{i >= 1} (c + i) ** -theta`` of the Mandelbrot normalization.

    The reciprocal sum is accurate to ``tol`` in absolute terms. Raises
    :class:`DivergentSeriesError` for ``theta <= 1``.
    """
    return 1.0 / hurwitz_sum(theta, c, tol)


def read_pmf_file(path) -> ProbabilityVector:
    """Read one probability per line; blank lines and ``#`` comments are skipped.

    Every violation is reported with its 1-based line number.
    """
    values = []
    with open(path, encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            try:
                v = float(line)
            except ValueError:
                raise InvalidDistributionError(
                    f"{path}:{lineno}: not a decimal number: {line!r}"
                ) from None
            if not math.isfinite(v) or v <= 0:
                raise InvalidDistributionError(
                    f"{path}:{lineno}: probability must be finite and strictly positive, got {line!r}"
                )
            values.append((lineno, v))
    if not values:
        raise InvalidDistributionError(f"{path}: no probabilities found")
    total = math.fsum(v for _, v in values)
    if abs(total - 1.0) > SUM_TOLERANCE:
        raise InvalidDistributionError(
            f"{path}:{values[-1][0]}: probabilities sum to {total!r}, not 1 within {SUM_TOLERANCE}"
        )
    return ProbabilityVector([v for _, v in values], label=f"file({os.path.basename(str(path))})")
