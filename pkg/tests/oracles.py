"""Brute-force reference computations, independent of the package's solvers."""

import itertools
import math

import numpy as np


def distinct_records_by_enumeration(p, n):
    """E[R_m(n)] by summing over all m**n draw sequences."""
    total = 0.0
    for seq in itertools.product(range(len(p)), repeat=n):
        total += math.prod(p[i] for i in seq) * len(set(seq))
    return total


def draws_by_tail_series(p, k, eps=1e-17):
    """E[X_m(k)] = sum_{n>=0} P(R_m(n) < k).

    P(observed set is exactly U) = sum_{V subset U} (-1)^{|U|-|V|} p(V)^n by
    Moebius inversion of P(observed set inside U) = p(U)^n.
    """
    m = len(p)
    subsets = [s for r in range(k) for s in itertools.combinations(range(m), r)]
    terms = []
    for u in subsets:
        for r in range(len(u) + 1):
            for v in itertools.combinations(u, r):
                terms.append(((-1) ** (len(u) - r), math.fsum(p[i] for i in v)))
    signs = np.array([t[0] for t in terms], dtype=float)
    bases = np.array([t[1] for t in terms])
    total = [1.0]  # n = 0: nothing observed yet
    n = 1
    while True:
        term = math.fsum(signs * bases**n)
        total.append(term)
        if n > 10 and abs(term) < eps:
            break
        n += 1
    return math.fsum(total)


def random_pmf(rng, m, spread=1.0, floor=1e-6):
    """Dirichlet(spread) probabilities, floored away from zero."""
    w = rng.dirichlet(np.full(m, spread)) + floor
    return w / w.sum()
