"""Seeded simulation of the record-collection process.

Replicate ``r`` of a run with seed ``s`` draws from its own Philox stream
keyed by ``(s, r)``, so every replicate value is a pure function of
``(p, target, s, r)``. Work is split into contiguous replicate blocks across
threads and reduced in index order; the output never depends on the number
of workers.
"""

from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .distribution import ProbabilityVector
from .exceptions import InsufficientReplicatesError, RunawaySimulationError

DEFAULT_REPLICATES = 10_000
#: Hard ceiling on draws in a single replicate.
MAX_DRAWS = 10**9
THREADS_ENV = "RECORD_COLLECTOR_THREADS"

_MASK64 = (1 << 64) - 1


def worker_count(threads=None) -> int:
    """Resolve the worker count from ``threads`` or ``$RECORD_COLLECTOR_THREADS`` (default 1)."""
    if threads is None:
        raw = os.environ.get(THREADS_ENV, "").strip()
        if not raw:
            return 1
        try:
            threads = int(raw)
        except ValueError:
            raise ValueError(f"{THREADS_ENV} must be a positive integer, got {raw!r}") from None
    if threads < 1:
        raise ValueError(f"worker count must be a positive integer, got {threads!r}")
    return int(threads)


def _check_seed(seed):
    if not isinstance(seed, (int, np.integer)) or not 0 <= seed <= _MASK64:
        raise ValueError(f"seed must be an unsigned 64-bit integer, got {seed!r}")


def replicate_rng(seed: int, replicate: int) -> np.random.Generator:
    """Generator positioned at the start of replicate ``replicate``'s substream.

    Philox keyed by ``seed`` with the 256-bit counter starting at
    ``(0, replicate, 0, 0)``: each replicate owns ``2**64`` counter blocks.
    """
    _check_seed(seed)
    return np.random.Generator(np.random.Philox(counter=[0, int(replicate), 0, 0], key=int(seed)))


class _Substreams:
    """Reusable Philox that seeks between replicate substreams.

    ``seek(r).random(n)`` yields exactly ``replicate_rng(seed, r).random(n)``
    at a fraction of the construction cost. Not shared across threads.
    """

    def __init__(self, seed):
        _check_seed(seed)
        self._bg = np.random.Philox(key=int(seed))
        self._state = self._bg.state

    def seek(self, replicate):
        st = self._state
        st["state"]["counter"][:] = (0, int(replicate), 0, 0)
        st["buffer_pos"] = 4
        st["has_uint32"] = 0
        self._bg.state = st
        return self

    def random(self, size):
        return (self._bg.random_raw(size) >> np.uint64(11)) * (1.0 / 9007199254740992.0)


@dataclass(frozen=True)
class SimulationEstimate:
    """Sample mean and its standard error over independent replicates."""

    mean: float
    stderr: float
    replicates: int
    seed: int
    target: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.replicates < 2:
            raise InsufficientReplicatesError("a standard error needs at least 2 replicates")
        if self.stderr < 0:
            raise ValueError("stderr must be nonnegative")

    def to_dict(self):
        return {
            "mean": self.mean,
            "stderr": self.stderr,
            "replicates": self.replicates,
            "seed": self.seed,
            "target": dict(self.target),
        }


def _summarize(values: np.ndarray, seed, target) -> SimulationEstimate:
    n = values.size
    mean = math.fsum(values) / n
    var = math.fsum((values - mean) ** 2) / (n - 1)
    return SimulationEstimate(mean, math.sqrt(var / n), n, seed, target)


def _record_times(cdf: np.ndarray, k: int, rng, first_chunk=None) -> np.ndarray:
    """Draw until ``k`` distinct values are seen; return the draw count at each new record.

    Entry ``s - 1`` of the result is one realization of ``X_m(s)`` for
    ``s = 1..k``. Draws are inverse-CDF lookups by binary search on ``cdf``.
    Chunk sizes only affect speed: draws are consumed from ``rng`` in order.
    """
    m = cdf.size
    seen = np.zeros(m, dtype=bool)
    times = np.empty(k, dtype=np.int64)
    found = 0
    drawn = 0
    chunk = int(first_chunk) if first_chunk else max(64, 4 * k)
    while True:
        if drawn >= MAX_DRAWS:
            raise RunawaySimulationError(
                f"no {k}-th distinct record after {MAX_DRAWS} draws"
            )
        size = min(chunk, MAX_DRAWS - drawn)
        idx = np.searchsorted(cdf, rng.random(size), side="right")
        np.minimum(idx, m - 1, out=idx)
        vals, first = np.unique(idx, return_index=True)
        fresh = ~seen[vals]
        new_first = np.sort(first[fresh])
        take = min(new_first.size, k - found)
        times[found : found + take] = drawn + new_first[:take] + 1
        found += take
        if found == k:
            return times
        seen[vals] = True
        drawn += size
        chunk *= 2


def draw_until_k_distinct(p: ProbabilityVector, k: int, rng) -> int:
    """One realization of ``X_m(k)``: draws needed until ``k`` distinct values appear.

    ``rng`` is anything with a ``random(size)`` method returning uniforms on
    ``[0, 1)``, typically :func:`replicate_rng`.
    """
    if not 1 <= k <= p.m:
        raise ValueError(f"k must lie in 1..{p.m}, got {k!r}")
    return int(_record_times(p.cdf(), k, rng)[-1])


def _run_blocks(block_fn, replicates, seed, threads, width):
    """Fill a ``(replicates, width)`` int array by contiguous replicate blocks.

    ``block_fn(stream, lo, hi, out)`` writes rows ``lo..hi-1`` into ``out``
    (a view of exactly those rows) using its own :class:`_Substreams`.
    """
    _check_seed(seed)
    out = np.empty((replicates, width), dtype=np.int64)

    def block(lo, hi):
        block_fn(_Substreams(seed), lo, hi, out[lo:hi])

    workers = min(worker_count(threads), replicates)
    if workers == 1:
        block(0, replicates)
    else:
        edges = np.linspace(0, replicates, workers + 1).astype(int)
        with ThreadPoolExecutor(max_workers=workers) as pool:
            futures = [pool.submit(block, lo, hi) for lo, hi in zip(edges, edges[1:])]
            for f in futures:
                f.result()
    return out


class _ChunkTuner:
    """Sizes the shared first chunk near the 95th percentile of recent completions."""

    def __init__(self, k, window=256):
        self.size = max(64, 4 * k)
        self.tuned = False
        self._recent = []
        self._window = window

    def update(self, totals):
        self._recent.extend(int(t) for t in totals)
        if len(self._recent) >= self._window:
            self.size = max(64, int(np.quantile(self._recent, 0.95)))
            self.tuned = True
            self._recent.clear()


# cap on uniforms held per batch in the vectorized record-time path
_BATCH_ELEMENTS = 1 << 21


def _record_times_batch(cdf, k, stream, lo, hi, out):
    """Record times for replicates ``lo..hi-1`` (rows of ``out``).

    Every replicate first gets the same number ``L`` of draws, processed as
    one matrix; the few that have not reached ``k`` records within ``L`` are
    rerun from the start of their substream by :func:`_record_times`.
    """
    m = cdf.size
    tuner = _ChunkTuner(k)
    r = lo
    while r < hi:
        length = tuner.size
        n = min(hi - r, max(1, _BATCH_ELEMENTS // length), 4096 if tuner.tuned else 256)
        raw = np.empty((n, length), dtype=np.uint64)
        for i in range(n):
            stream.seek(r + i)
            raw[i] = stream._bg.random_raw(length)
        u = (raw >> np.uint64(11)) * (1.0 / 9007199254740992.0)
        idx = np.searchsorted(cdf, u.ravel(), side="right")
        np.minimum(idx, m - 1, out=idx)
        first = np.full(n * m, length, dtype=np.int64)
        keys = idx + np.repeat(np.arange(n, dtype=np.int64) * m, length)
        np.minimum.at(first, keys, np.tile(np.arange(length, dtype=np.int64), n))
        first = np.sort(first.reshape(n, m), axis=1)[:, :k]
        rows = out[r - lo : r - lo + n]
        rows[:] = first + 1
        for i in np.flatnonzero(first[:, -1] == length):
            rows[i] = _record_times(cdf, k, stream.seek(r + i), 2 * length)
        tuner.update(rows[:, -1])
        r += n


def _check_replicates(replicates):
    if not isinstance(replicates, (int, np.integer)) or replicates < 2:
        raise InsufficientReplicatesError(
            f"replicates must be an integer >= 2, got {replicates!r}"
        )


def estimate_record_curve(
    p: ProbabilityVector, ks, replicates=DEFAULT_REPLICATES, seed=0, threads=None
):
    """Estimates of ``E[X_m(k)]`` for several ``k`` from one shared set of replicates.

    Each replicate runs until ``max(ks)`` distinct values are seen and
    contributes its record times to every requested ``k``.
    """
    _check_replicates(replicates)
    ks = [int(k) for k in ks]
    if not ks:
        return []
    kmax = max(ks)
    if min(ks) < 1 or kmax > p.m:
        raise ValueError(f"every k must lie in 1..{p.m}")
    cdf = p.cdf()
    times = _run_blocks(
        lambda stream, lo, hi, out: _record_times_batch(cdf, kmax, stream, lo, hi, out),
        replicates,
        seed,
        threads,
        kmax,
    )
    return [
        _summarize(times[:, k - 1], seed, {"m": p.m, "k": k, "distribution": p.label})
        for k in ks
    ]


def estimate_expected_draws(
    p: ProbabilityVector, k: int, replicates=DEFAULT_REPLICATES, seed=0, threads=None
) -> SimulationEstimate:
    """Monte-Carlo estimate of ``E[X_m(k)]``."""
    _check_replicates(replicates)
    if not isinstance(k, (int, np.integer)) or not 1 <= k <= p.m:
        raise ValueError(f"k must be an integer in 1..{p.m}, got {k!r}")
    return estimate_record_curve(p, [k], replicates, seed, threads)[0]


def estimate_expected_records(
    p: ProbabilityVector, n: int, replicates=DEFAULT_REPLICATES, seed=0, threads=None
) -> SimulationEstimate:
    """Monte-Carlo estimate of ``E[R_m(n)]``, the distinct values among ``n`` draws."""
    _check_replicates(replicates)
    if not isinstance(n, (int, np.integer)) or n < 1:
        raise ValueError(f"n must be a positive integer, got {n!r}")
    cdf = p.cdf()
    m = p.m

    def block(stream, lo, hi, out):
        for r in range(lo, hi):
            stream.seek(r)
            seen = np.zeros(m, dtype=bool)
            left = n
            while left:
                size = min(left, 1 << 20)
                idx = np.searchsorted(cdf, stream.random(size), side="right")
                seen[np.minimum(idx, m - 1)] = True
                left -= size
            out[r - lo, 0] = np.count_nonzero(seen)

    counts = _run_blocks(block, replicates, seed, threads, 1)[:, 0]
    return _summarize(counts, seed, {"m": m, "n": int(n), "distribution": p.label})


def empirical_frequencies(p: ProbabilityVector, draws: int, seed=0) -> np.ndarray:
    """Relative frequency of each support point over ``draws`` single inverse-CDF draws."""
    rng = replicate_rng(seed, 0)
    idx = np.searchsorted(p.cdf(), rng.random(draws), side="right")
    return np.bincount(np.minimum(idx, p.m - 1), minlength=p.m) / draws
