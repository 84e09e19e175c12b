"""Exact expectations for the record-collection process.

Four independent routes to ``E[X_m(k)]``, the expected number of draws
needed to see ``k`` distinct values:

* :func:`expected_draws_naive` sums over ordered tuples of distinct record
  types (the literal conditioning formula).
* :func:`expected_draws_dp` solves the absorbing chain whose states are the
  sets of types seen so far.
* :func:`expected_completion_maxmin` handles ``k = m`` by inclusion-exclusion
  over subsets (maximum-minimums identity).
* :func:`expected_draws_uniform` is the closed form for equal probabilities.

:func:`expected_distinct_records` is the dual quantity ``E[R_m(n)]``.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .distribution import ProbabilityVector
from .exceptions import InfeasibleTargetError, ResourceLimitError

#: Ceiling on the number of tuple extensions visited by the naive enumerator.
MAX_NAIVE_WORK = 10**8
#: Ceiling on the number of subset states held by the DP solver.
MAX_DP_STATES = 10**7
#: Largest support accepted by the subset inclusion-exclusion.
MAX_MAXMIN_SUPPORT = 25

# children generated per vectorized block in the naive enumerator
_BLOCK = 1 << 18


class Method(str, enum.Enum):
    NAIVE = "naive"
    DP = "dp"
    MAXMIN = "maxmin"
    UNIFORM = "uniform-closed-form"
    MONTECARLO = "montecarlo"
    APPROX = "approx"

    def __str__(self):
        return self.value

    @property
    def is_exact(self) -> bool:
        return self in (Method.NAIVE, Method.DP, Method.MAXMIN, Method.UNIFORM)


@dataclass(frozen=True)
class ExpectationRow:
    k: int
    value: float
    method: Method
    stderr: Optional[float] = None


@dataclass(frozen=True)
class ExpectationTable:
    """Rows ``(k, E[X_m(k)], method, stderr)`` for one distribution.

    Exact and Monte-Carlo rows satisfy ``value >= k``; exact rows are
    strictly increasing in ``k``. Asymptotic rows are exempt from both, since
    the power law undershoots ``k`` for small ``k``.
    """

    rows: tuple
    m: int
    distribution: str = ""
    metadata: dict = field(default_factory=dict, compare=False)

    def __post_init__(self):
        rows = tuple(self.rows)
        object.__setattr__(self, "rows", rows)
        for prev, cur in zip(rows, rows[1:]):
            if cur.k <= prev.k:
                raise ValueError("k values must be strictly increasing")
            if cur.method.is_exact and prev.method.is_exact and not cur.value > prev.value:
                raise ValueError(f"exact values must increase with k (k={cur.k})")
        for row in rows:
            if row.method is not Method.APPROX and row.value < row.k * (1 - 1e-12):
                raise ValueError(f"value {row.value} below the lower bound k={row.k}")

    def __len__(self):
        return len(self.rows)

    def __iter__(self):
        return iter(self.rows)

    @property
    def ks(self):
        return [r.k for r in self.rows]

    @property
    def values(self):
        return [r.value for r in self.rows]

    def value(self, k):
        """Value of the row with the given ``k``."""
        for r in self.rows:
            if r.k == k:
                return r.value
        raise KeyError(k)

    def to_dict(self):
        return {
            "m": self.m,
            "distribution": self.distribution,
            "rows": [
                {"k": r.k, "value": r.value, "method": r.method.value, "stderr": r.stderr}
                for r in self.rows
            ],
            **({"metadata": self.metadata} if self.metadata else {}),
        }


def _check_target(p: ProbabilityVector, k):
    if not isinstance(k, (int, np.integer)) or k < 1:
        raise ValueError(f"k must be a positive integer, got {k!r}")
    if k > p.m:
        raise InfeasibleTargetError(f"cannot observe k={k} distinct records from a support of size m={p.m}")


def _table(p, values, method):
    rows = [ExpectationRow(s, float(v), method) for s, v in enumerate(values, start=1)]
    return ExpectationTable(rows, m=p.m, distribution=p.label)


# ---------------------------------------------------------------------------
# dual quantity and closed forms


def expected_distinct_records(p: ProbabilityVector, n):
    """``E[R_m(n)] = m - sum_i (1 - p_i) ** n``.

    ``n`` may be any nonnegative real (or array of them); the power is taken
    as ``exp(n * log1p(-p_i))``.
    """
    n_arr = np.asarray(n, dtype=np.float64)
    if np.any(~np.isfinite(n_arr)) or np.any(n_arr < 0):
        raise ValueError(f"n must be a finite nonnegative number, got {n!r}")
    with np.errstate(divide="ignore"):
        logq = np.log1p(-p.probs)  # -inf when m = 1

    def one(x):
        return 0.0 if x == 0 else p.m - math.fsum(np.exp(x * logq))

    if n_arr.ndim == 0:
        return one(float(n_arr))
    return np.array([one(x) for x in n_arr.ravel()]).reshape(n_arr.shape)


def expected_draws_uniform(m: int, k: int) -> float:
    """``1 + m/(m-1) + ... + m/(m-k+1)`` for the uniform law on ``m`` points."""
    if not isinstance(m, (int, np.integer)) or m < 1:
        raise ValueError(f"m must be a positive integer, got {m!r}")
    if not isinstance(k, (int, np.integer)) or k < 1:
        raise ValueError(f"k must be a positive integer, got {k!r}")
    if k > m:
        raise InfeasibleTargetError(f"cannot observe k={k} distinct records from m={m} values")
    return math.fsum([1.0] + [m / (m - i) for i in range(1, k)])


def expected_draws_uniform_table(m: int, k: int) -> ExpectationTable:
    vals = [expected_draws_uniform(m, s) for s in range(1, k + 1)]
    return ExpectationTable(
        [ExpectationRow(s, v, Method.UNIFORM) for s, v in enumerate(vals, start=1)],
        m=m,
        distribution=f"uniform(m={m})",
    )


def expected_completion_maxmin(p: ProbabilityVector, max_support=MAX_MAXMIN_SUPPORT) -> float:
    """Expected draws to see every value, ``sum_T (-1)^(|T|+1) / p(T)`` over nonempty subsets.

    Subset sums and signs are built by doubling over the low bits; the
    ``2^m - 1`` terms are added with ``math.fsum``.
    """
    m = p.m
    if m > max_support:
        raise ResourceLimitError(
            f"maxmin sums over 2^m - 1 = {2**m - 1} subsets; m={m} exceeds the cap m <= {max_support}",
            cap=max_support,
            estimated=2**m - 1,
        )
    probs = p.probs
    low = min(m, 20)
    sums = np.zeros(1)
    sign = np.ones(1)  # (-1)^|T| for the empty set
    for i in range(low):
        sums = np.concatenate([sums, sums + probs[i]])
        sign = np.concatenate([sign, -sign])
    partial = []
    for high in range(1 << (m - low)):
        hs = 0.0
        hsign = 1.0
        for b in range(m - low):
            if high >> b & 1:
                hs += probs[low + b]
                hsign = -hsign
        tot = sums + hs
        sg = sign * hsign
        if high == 0:
            tot, sg = tot[1:], sg[1:]
        partial.append(math.fsum(-sg / tot))
    return math.fsum(partial)


# ---------------------------------------------------------------------------
# literal ordered-tuple enumeration


def naive_work(m: int, k: int) -> int:
    """Number of tuple extensions ``sum_{d=1}^{k-1} m!/(m-d)!`` visited by the enumerator."""
    total, term = 0, 1
    for d in range(1, k):
        term *= m - d + 1
        total += term
    return total


def _naive_increments(p: ProbabilityVector, depth, max_work):
    """Return ``[E[X_2], ..., E[X_{depth+1}]]``.

    Depth-first over blocks of prefixes: each block of distinct-index prefixes
    is extended by every unused index, its weights are folded into the
    accumulator of that depth, and the children are expanded before the next
    block. The weight of a prefix is ``prod p_i / prod p(i_1..i_s)``; the
    running ``p(...)`` is kept as an unevaluated sum ``hi + lo`` (TwoSum) so
    that nearly exhausted supports do not lose digits to cancellation.
    """
    m = p.m
    work = naive_work(m, depth + 1)
    if work > max_work:
        raise ResourceLimitError(
            f"naive enumeration needs {work} tuple extensions for m={m}, k={depth + 1}; "
            f"cap is {max_work}",
            cap=max_work,
            estimated=work,
        )
    probs = p.probs
    acc = [[] for _ in range(depth)]

    def expand(used, w, qhi, qlo, d):
        # d = depth of the given prefixes; children live at depth d + 1
        width = m - d
        per_block = max(1, _BLOCK // width)
        for start in range(0, w.size, per_block):
            sl = slice(start, start + per_block)
            rows, cols = np.nonzero(~used[sl])
            pj = probs[cols]
            a = qhi[sl][rows]
            s = a - pj
            bb = s - a
            err = (a - (s - bb)) + (-pj - bb)
            lo = qlo[sl][rows] + err
            cw = w[sl][rows] * pj / (s + lo)
            acc[d].append(math.fsum(cw))
            if d + 1 < depth:
                cu = used[sl][rows]
                cu[np.arange(cols.size), cols] = True
                expand(cu, cw, s, lo, d + 1)

    if depth > 0:
        expand(
            np.zeros((1, m), dtype=bool),
            np.ones(1),
            np.array([math.fsum(probs)]),
            np.zeros(1),
            0,
        )
    return [math.fsum(parts) for parts in acc]


def expected_increment_naive(p: ProbabilityVector, k: int, max_work=MAX_NAIVE_WORK) -> float:
    """``E[X_k]``, the extra draws taken to go from ``k-1`` to ``k`` distinct values."""
    if not isinstance(k, (int, np.integer)) or k < 2:
        raise ValueError(f"k must be an integer >= 2, got {k!r}")
    _check_target(p, k)
    return _naive_increments(p, k - 1, max_work)[-1]


def expected_draws_naive(p: ProbabilityVector, k: int, max_work=MAX_NAIVE_WORK) -> ExpectationTable:
    """Rows ``s = 1..k`` of ``E[X_m(s)] = 1 + E[X_2] + ... + E[X_s]`` by tuple enumeration.

    Cost grows like ``m (m-1) ... (m-k+2)``; use :func:`expected_draws_dp`
    beyond toy sizes.
    """
    _check_target(p, k)
    inc = _naive_increments(p, k - 1, max_work)
    values = [math.fsum([1.0] + inc[:s]) for s in range(k)]
    return _table(p, values, Method.NAIVE)


# ---------------------------------------------------------------------------
# subset-state absorbing chain


def dp_state_count(m: int, k: int) -> int:
    """States ``sum_{j<k} C(m, j)`` held by :func:`expected_draws_dp`."""
    return sum(math.comb(m, j) for j in range(k))


def _colex_levels(m, k, binom):
    """Sorted index arrays of all ``j``-subsets, ``j < k``, in colex rank order."""
    levels = [np.zeros((1, 0), dtype=np.int64)]
    for j in range(1, k):
        prev = levels[-1]
        parts = []
        for b in range(j - 1, m):
            head = prev[: binom[b, j - 1]]
            parts.append(np.hstack([head, np.full((head.shape[0], 1), b, dtype=np.int64)]))
        levels.append(np.vstack(parts))
    return levels


def expected_draws_dp(p: ProbabilityVector, k: int, max_states=MAX_DP_STATES) -> ExpectationTable:
    """Rows ``s = 1..k`` of ``E[X_m(s)]`` from the chain on observed sets.

    With ``q(S) = 1 - sum_{i in S} p_i`` the expected remaining draws satisfy
    ``f(S) = 1/q(S) + sum_{j not in S} p_j / q(S) * f(S | {j})`` and
    ``f(S) = 0`` once ``|S| = s``. All targets are solved together,
    level by level from ``|S| = k-1`` down to the empty set.
    """
    _check_target(p, k)
    m = p.m
    n_states = dp_state_count(m, k)
    if n_states > max_states:
        raise ResourceLimitError(
            f"DP needs {n_states} subset states for m={m}, k={k}; cap is {max_states}",
            cap=max_states,
            estimated=n_states,
        )
    probs = p.probs
    binom = np.zeros((m + 1, k + 1), dtype=np.int64)
    for x in range(m + 1):
        for y in range(min(x, k) + 1):
            binom[x, y] = math.comb(x, y)
    levels = _colex_levels(m, k, binom)

    child = None  # f on level j+1, columns are targets s = j+2..k
    for j in range(k - 1, -1, -1):
        states = levels[j]
        n = states.shape[0]
        q = np.zeros(n)
        acc = np.zeros((n, k - j - 1))
        pos = np.arange(1, j + 1)
        for b in range(m):
            member = (states == b).any(axis=1)
            keep = ~member
            if not keep.any():
                continue
            sub = states[keep]
            q[keep] += probs[b]
            if child is None:
                continue
            below = sub < b
            rank = np.where(below, binom[sub, pos], binom[sub, np.minimum(pos + 1, k)]).sum(axis=1)
            rank += binom[b, below.sum(axis=1) + 1]
            acc[keep] += probs[b] * child[rank]
        f = np.empty((n, k - j))
        f[:, 0] = 1.0 / q
        f[:, 1:] = (1.0 + acc) / q[:, None]
        child = f
    return _table(p, child[0], Method.DP)


def expected_draws(p: ProbabilityVector, k: int, method="dp") -> ExpectationTable:
    """Dispatch to an exact method by name (``naive``, ``dp``, ``maxmin``, ``uniform``)."""
    method = str(method)
    if method == "dp":
        return expected_draws_dp(p, k)
    if method == "naive":
        return expected_draws_naive(p, k)
    if method == "maxmin":
        _check_target(p, k)
        if k != p.m:
            raise ValueError("maxmin only gives the full-collection value k = m")
        v = expected_completion_maxmin(p)
        return ExpectationTable([ExpectationRow(k, v, Method.MAXMIN)], m=p.m, distribution=p.label)
    if method in ("uniform", Method.UNIFORM.value):
        if not np.all(p.probs == p.probs[0]):
            raise ValueError("uniform closed form requires equal probabilities")
        return expected_draws_uniform_table(p.m, k)
    raise ValueError(f"unknown method {method!r}")
