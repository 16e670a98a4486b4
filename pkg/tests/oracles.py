"""Reference implementations used only by the tests.

Each one is written from the definition, with no shared code path with the
library: plain loops, Counters and mpmath where the library uses numpy
tables, sorted windows or integer roots.
"""

from __future__ import annotations

import itertools
import math
from collections import Counter
from fractions import Fraction

import mpmath
import numpy as np


def nu_loops(m, d, q, b, a):
    """Points of ``b x_i^d - b x_{i+1}^d = a_i`` in ``Z_q^m`` by full enumeration."""
    return sum(
        1
        for x in itertools.product(range(q), repeat=m)
        if all((b * (pow(x[i], d, q) - pow(x[i + 1], d, q)) - a[i]) % q == 0 for i in range(m - 1))
    )


def power_counts(c, d):
    return Counter(pow(x, d, c) for x in range(c))


def dense_pair_count(m, d, b, q, N, lo, hi):
    """Ordered distinct tuples for a cube ``[lo, hi)^(m-1)``, via an N x N adjacency matrix (m = 2 or 3)."""
    v = np.array([b * pow(n, d, q) % q for n in range(1, N + 1)], dtype=np.int64)
    D = (v[:, None] - v[None, :]) % q
    D = np.where(D > q // 2, D - q, D)
    num_lo, den_lo = lo.numerator, lo.denominator
    num_hi, den_hi = hi.numerator, hi.denominator
    # lo <= N D / q < hi  <=>  num_lo*q <= N D den_lo  and  N D den_hi < num_hi*q
    A = ((N * D * den_lo >= num_lo * q) & (N * D * den_hi < num_hi * q)).astype(np.int64)
    np.fill_diagonal(A, 0)
    if m == 2:
        return int(A.sum())
    return int((A.sum(0) * A.sum(1)).sum() - (A * A.T).sum())


def sorted_gaps(d, b, q, N):
    pts = sorted(Fraction(b * n**d % q, q) for n in range(1, N + 1))
    return Counter([y - x for x, y in zip(pts, pts[1:])] + [1 + pts[0] - pts[-1]])


def log_ratio(u, q, dps=50):
    with mpmath.workdps(dps):
        return mpmath.log(u) / mpmath.log(q)


def floor_root_power(q, num, den, dps=40):
    # enough digits for the integer part plus a margin for the fractional part
    dps += math.ceil(num * math.log10(q) / den)
    with mpmath.workdps(dps):
        return int(mpmath.floor(mpmath.power(q, mpmath.mpf(num) / den)))


def squarefree_u_v(q):
    """``q = u v^2`` by checking every ``v`` with ``v^2 | q`` and keeping the largest."""
    best = 1
    for v in range(1, math.isqrt(q) + 1):
        if q % (v * v) == 0:
            best = v
    return q // (best * best), best
