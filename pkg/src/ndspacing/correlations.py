"""m-level correlations and gaps of ``n^d x mod 1``.

For a rational source ``b/q`` everything is integer arithmetic on the
residues ``v_n = b n^d mod q``: a scaled difference ``N (x_n - x_n') ``
reduced into ``(-N/2, N/2]`` lies in ``[lo, hi)`` exactly when the
circular residue difference lies in the integer window
``[ceil(lo q/N), ceil(hi q/N) - 1]``.

Boxes are half-open, ``[lo, hi)`` in every coordinate, so a degenerate box
is empty and boxes sharing a face are disjoint.
"""

from __future__ import annotations

import bisect
import itertools
import json
import math
import time
from collections import Counter
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence, Union

import numpy as np

from .diophantine import LadderSource, PowerSequence, RationalSource, scaled_distance
from .errors import DomainError, GuardError
from .ffcurves import CurveSpec, _powmod_array, curve_exponential_sum, curve_points, geometric_sum

BRUTE_GUARD = 10**7

Box = tuple[tuple[Fraction, Fraction], ...]


def _frac(x) -> Fraction:
    return x if isinstance(x, Fraction) else Fraction(x)


# ------------------------------------------------------------------ regions

@dataclass(frozen=True)
class Region:
    """Finite union of pairwise disjoint half-open boxes in ``R^(m-1)``."""

    boxes: tuple[Box, ...]

    def __post_init__(self):
        boxes = tuple(tuple((_frac(lo), _frac(hi)) for lo, hi in box) for box in self.boxes)
        object.__setattr__(self, "boxes", boxes)
        if not boxes:
            raise DomainError("region needs at least one box")
        dims = {len(b) for b in boxes}
        if len(dims) != 1 or 0 in dims:
            raise DomainError("all boxes must share one positive dimension")
        for box in boxes:
            if any(lo > hi for lo, hi in box):
                raise DomainError(f"box has lo > hi: {box}")
        for b1, b2 in itertools.combinations(boxes, 2):
            if not (_empty(b1) or _empty(b2)) and all(lo1 < hi2 and lo2 < hi1 for (lo1, hi1), (lo2, hi2) in zip(b1, b2)):
                raise DomainError("region boxes overlap")

    @classmethod
    def cube(cls, lo, hi, dim: int) -> "Region":
        return cls(((( _frac(lo), _frac(hi)),) * dim,))

    @classmethod
    def parse(cls, text: str, dim: int) -> "Region":
        """``"lo,hi"`` (a cube) or ``"lo1,hi1,lo2,hi2"``; boxes separated by ``;``."""
        boxes = []
        for chunk in text.split(";"):
            vals = [Fraction(v.strip()) for v in chunk.split(",") if v.strip()]
            if len(vals) == 2:
                vals = vals * dim
            if len(vals) != 2 * dim:
                raise DomainError(f"box {chunk!r} needs 2 or {2 * dim} endpoints")
            boxes.append(tuple((vals[2 * i], vals[2 * i + 1]) for i in range(dim)))
        return cls(tuple(boxes))

    @property
    def dim(self) -> int:
        return len(self.boxes[0])

    @property
    def volume(self) -> Fraction:
        return sum((math.prod((hi - lo for lo, hi in box), start=Fraction(1)) for box in self.boxes), Fraction(0))

    @property
    def width(self) -> Fraction:
        """``W`` with every box inside ``[-W, W]^(m-1)``."""
        return max(max(abs(lo), abs(hi)) for box in self.boxes for lo, hi in box)

    @property
    def min_half_width(self) -> Fraction:
        return min((hi - lo) / 2 for box in self.boxes for lo, hi in box)

    def contains(self, y: Sequence[Fraction]) -> bool:
        return any(all(lo <= yi < hi for yi, (lo, hi) in zip(y, box)) for box in self.boxes)

    def inflate(self, eps) -> "Region":
        eps = _frac(eps)
        return Region(tuple(tuple((lo - eps, hi + eps) for lo, hi in box) for box in self.boxes))

    def deflate(self, eps) -> "Region":
        eps = _frac(eps)
        if self.boxes and eps >= self.min_half_width and eps > 0:
            raise DomainError("sandwich too wide: margin exceeds smallest box half-width")
        return Region(tuple(tuple((lo + eps, hi - eps) for lo, hi in box) for box in self.boxes))

    def negate(self) -> "Region":
        """Mirror image; half-open ends stay on the low side."""
        return Region(tuple(tuple((-hi, -lo) for lo, hi in box) for box in self.boxes))

    def to_json(self) -> list:
        return [[[str(lo), str(hi)] for lo, hi in box] for box in self.boxes]

    @classmethod
    def from_json(cls, data: list) -> "Region":
        return cls(tuple(tuple((Fraction(lo), Fraction(hi)) for lo, hi in box) for box in data))


def _empty(box: Box) -> bool:
    return any(lo >= hi for lo, hi in box)


# ---------------------------------------------------------------- requests

Source = Union[RationalSource, LadderSource]


@dataclass(frozen=True)
class CorrelationRequest:
    m: int
    d: int
    source: Source
    N: int
    region: Region

    def __post_init__(self):
        if self.m < 2:
            raise DomainError("m must be >= 2")
        if self.d < 1:
            raise DomainError("d must be >= 1")
        if self.N < 1:
            raise DomainError("N must be >= 1")
        if self.region.dim != self.m - 1:
            raise DomainError(f"region dimension {self.region.dim} != m-1 = {self.m - 1}")

    def check_wrap(self) -> None:
        if self.N <= 2 * self.region.width:
            raise DomainError(f"wrap ambiguity: N = {self.N} <= 2W = {2 * self.region.width}")

    def with_region(self, region: Region) -> "CorrelationRequest":
        return CorrelationRequest(self.m, self.d, self.source, self.N, region)

    def with_source(self, source: Source) -> "CorrelationRequest":
        return CorrelationRequest(self.m, self.d, source, self.N, self.region)


@dataclass(frozen=True)
class CorrelationResult:
    request: CorrelationRequest
    value: Fraction
    tuple_count: int
    method: str
    elapsed_ms: float = field(default=0.0, compare=False)

    def to_json(self) -> str:
        r = self.request
        return json.dumps(
            {
                "m": r.m,
                "d": r.d,
                "source": r.source.label(),
                "N": r.N,
                "region": r.region.to_json(),
                "value": f"{self.value.numerator}/{self.value.denominator}",
                "tuple_count": self.tuple_count,
                "method": self.method,
            }
        )


def parse_correlation_record(line: str) -> dict:
    """Parse and validate one serialized :class:`CorrelationResult`."""
    rec = json.loads(line)
    expected = {"m", "d", "source", "N", "region", "value", "tuple_count", "method"}
    if set(rec) != expected:
        raise DomainError(f"correlation record keys {sorted(rec)} != {sorted(expected)}")
    value = Fraction(rec["value"])
    Region.from_json(rec["region"])
    if value * rec["N"] != rec["tuple_count"]:
        raise DomainError("value * N != tuple_count")
    if not 0 <= rec["tuple_count"] <= math.perm(rec["N"], rec["m"]):
        raise DomainError("tuple_count out of range")
    rec["value"] = value
    return rec


# ----------------------------------------------------------------- kernels

def power_residues(d: int, b: int, q: int, n_max: int) -> np.ndarray:
    """``b n^d mod q`` for ``n = 1..n_max``."""
    n = np.arange(1, n_max + 1, dtype=np.int64)
    if q < 3_000_000_000:
        return (_powmod_array(n % q, d, q) * (b % q)) % q
    if q < 2**61:
        return np.array([b * pow(int(x), d, q) % q for x in n], dtype=np.int64)
    return np.array([b * pow(int(x), d, q) % q for x in n], dtype=object)


def _windows(region: Region, q: int, N: int) -> list[list[tuple[int, int]]]:
    """Integer residue-difference windows ``[L, H]`` per box and coordinate."""
    out = []
    for box in region.boxes:
        if _empty(box):
            continue
        out.append([(math.ceil(lo * q / N), math.ceil(hi * q / N) - 1) for lo, hi in box])
    return out


class _Residues:
    """Sorted residues, tripled by ``-q, 0, +q`` so windows never wrap."""

    def __init__(self, v: np.ndarray, q: int):
        self.q = q
        self.v = v
        order = np.argsort(v, kind="stable")
        s = v[order]
        self.ext = np.concatenate([s - q, s, s + q])
        self.ext_idx = np.concatenate([order, order, order])

    def ranges(self, centers: np.ndarray, L: int, H: int):
        start = np.searchsorted(self.ext, centers - H, side="left")
        stop = np.searchsorted(self.ext, centers - L, side="right")
        return start, stop


def _in_window(diff, q: int, L: int, H: int):
    r = diff % q
    r = np.where(r > q // 2, r - q, r)
    return (r >= L) & (r <= H)


def _count_box(res: _Residues, windows: list[tuple[int, int]], m: int) -> int:
    """Ordered tuples of distinct indices whose chained residue differences hit the box."""
    q = res.q
    N = len(res.v)
    cols = [np.arange(N, dtype=np.int64)]
    cur = res.v
    for level, (L, H) in enumerate(windows):
        start, stop = res.ranges(cur, L, H)
        counts = stop - start
        if level == m - 2:
            # last step: count without materializing, drop repeats of earlier indices
            total = int(counts.sum())
            for c in cols:
                total -= int(np.count_nonzero(_in_window(cur - res.v[c], q, L, H)))
            return total
        F = len(cur)
        rows = np.repeat(np.arange(F), counts)
        offs = np.cumsum(counts) - counts
        pos = start[rows] + (np.arange(len(rows)) - offs[rows])
        new_idx = res.ext_idx[pos]
        keep = np.ones(len(rows), dtype=bool)
        for c in cols:
            keep &= c[rows] != new_idx
        cols = [c[rows][keep] for c in cols] + [new_idx[keep]]
        cur = res.v[cols[-1]]
    raise AssertionError("unreachable")


def _count_rational(m: int, d: int, src: RationalSource, N: int, region: Region) -> int:
    v = power_residues(d, src.b, src.q, N)
    res = _Residues(v, src.q)
    return sum(_count_box(res, w, m) for w in _windows(region, src.q, N))


def correlation(req: CorrelationRequest) -> CorrelationResult:
    """``R^(m)(N, d, x, region)`` exactly.

    Ladder sources are answered only when the sandwich around the
    convergent collapses to a single value; otherwise use
    :func:`correlation_sandwich`.
    """
    t0 = time.perf_counter()
    if req.N < req.m:
        return CorrelationResult(req, Fraction(0), 0, "empty", 0.0)
    req.check_wrap()
    if isinstance(req.source, LadderSource):
        lo, hi = correlation_sandwich(req)
        if lo != hi:
            raise DomainError("ladder tail too wide at this N; use correlation_sandwich")
        count = int(lo * req.N)
        return CorrelationResult(req, lo, count, "ladder-sandwich", 1000 * (time.perf_counter() - t0))
    count = _count_rational(req.m, req.d, req.source, req.N, req.region)
    method = "two-pointer" if req.m == 2 else "window-join"
    return CorrelationResult(req, Fraction(count, req.N), count, method, 1000 * (time.perf_counter() - t0))


def correlation_brute(req: CorrelationRequest) -> CorrelationResult:
    """Literal transcription: every ordered tuple of distinct ``n``, every lattice translate.

    A difference ``y`` of two points lies in ``(-1, 1)`` and the region in
    ``[-W, W]`` with ``W < N/2``, so only translates ``l`` in ``{-1, 0, 1}``
    can put ``N (l + y)`` inside; the others are skipped.
    """
    t0 = time.perf_counter()
    if req.N**req.m > BRUTE_GUARD:
        raise GuardError(f"instance too large for oracle: N^m = {req.N**req.m}")
    if isinstance(req.source, LadderSource):
        raise DomainError("brute oracle needs a rational source")
    N, x = req.N, req.source.value
    pts = [(n**req.d * x) % 1 for n in range(1, N + 1)]
    W = req.region.width
    # scaled translates of each ordered difference that can reach the region
    near = [
        [[N * (l + pts[i] - pts[j]) for l in (-1, 0, 1) if abs(N * (l + pts[i] - pts[j])) <= W] for j in range(N)]
        for i in range(N)
    ]
    count = 0
    for tup in itertools.permutations(range(N), req.m):
        cands = [near[tup[i]][tup[i + 1]] for i in range(req.m - 1)]
        for y in itertools.product(*cands):
            if req.region.contains(y):
                count += 1
    return CorrelationResult(req, Fraction(count, N), count, "brute", 1000 * (time.perf_counter() - t0))


def correlation_sandwich(req: CorrelationRequest) -> tuple[Fraction, Fraction]:
    """Bracket the ladder-limit correlation by deflated and inflated regions.

    Each point moves by at most ``eps/N`` on the circle, so every scaled
    difference moves by at most ``2 eps`` where ``eps`` is the scaled
    distance between the limit and its convergent.
    """
    if not isinstance(req.source, LadderSource):
        raise DomainError("sandwich needs a ladder source")
    conv = req.source.convergent
    eps = scaled_distance(PowerSequence(req.d, conv), PowerSequence(req.d, req.source), req.N)
    margin = 2 * eps
    rational = req.with_source(conv)
    if margin == 0:
        v = correlation(rational).value
        return v, v
    inner = rational.with_region(req.region.deflate(margin))
    outer = rational.with_region(req.region.inflate(margin))
    return correlation(inner).value, correlation(outer).value


# -------------------------------------------------------------- identities

def _lattice_points(box: Box, s: Fraction):
    ranges = [range(math.ceil(s * lo), math.ceil(s * hi)) for lo, hi in box]
    return itertools.product(*ranges)


def star_vectors(region: Region, s: Fraction):
    """Integer ``a`` in ``s * region`` whose tail sums ``A_1..A_m`` are distinct (``A_m = 0``)."""
    for box in region.boxes:
        for a in _lattice_points(box, s):
            A = [sum(a[i:]) for i in range(len(a))] + [0]
            if len(set(A)) == len(A):
                yield a


def restricted_count(m: int, d: int, b: int, q: int, N: int, a: Sequence[int]) -> int:
    """``#{1 <= x_i <= N : b x_i^d - b x_{i+1}^d = a_i mod q}``."""
    cnt = Counter(b * pow(x, d, q) % q for x in range(1, N + 1))
    A = [sum(a[i:]) for i in range(len(a))] + [0]
    return sum(math.prod(cnt.get((w + Ai) % q, 0) for Ai in A) for w in range(q))


def star_sum_identity(m: int, d: int, b: int, q: int, N: int, region: Region) -> tuple[int, int]:
    """``(N R, sum* nu(N, d, a, q))``.

    The two agree whenever no two distinct ``n <= N`` share a d-th power
    residue; otherwise the left side can only be larger.
    """
    if q > 200 or N > 60:
        raise GuardError("instance too large for oracle: need q <= 200 and N <= 60")
    req = CorrelationRequest(m, d, RationalSource(b, q), N, region)
    lhs = correlation(req).tuple_count
    s = Fraction(q, N)
    rhs = sum(restricted_count(m, d, b, q, N, a) for a in star_vectors(region, s))
    return lhs, rhs


def fourier_identity_check(m: int, d: int, b: int, q: int, N: int, region: Region) -> tuple[Fraction, complex, float]:
    """Correlation versus its expansion over additive characters mod ``q``."""
    if q > 13 or N > 6 or m > 3:
        raise GuardError("instance too large for oracle: need q <= 13, N <= 6, m <= 3")
    if N >= q:
        raise DomainError("character expansion needs N < q")
    req = CorrelationRequest(m, d, RationalSource(b, q), N, region)
    lhs = correlation(req).value
    G = [geometric_sum(r, N, q) for r in range(q)]
    s = Fraction(q, N)
    total = 0j
    for a in star_vectors(region, s):
        spec = CurveSpec(m, d, q, b, a)
        pts = curve_points(spec)
        for r in itertools.product(range(q), repeat=m):
            total += curve_exponential_sum(spec, r, pts) * math.prod(G[ri] for ri in r)
    rhs = total / (N * q**m)
    return lhs, rhs, abs(complex(lhs) - rhs)


# -------------------------------------------------------------------- gaps

@dataclass(frozen=True)
class GapResult:
    gaps: Counter
    distinct_count: int


def consecutive_gaps(d: int, source: RationalSource, N: int) -> GapResult:
    """Circular gaps between the sorted points ``{n^d b/q}``, ``n <= N``."""
    if N < 1:
        raise DomainError("N must be >= 1")
    q = source.q
    v = power_residues(d, source.b, q, N)
    order = np.argsort(v, kind="stable")
    s = v[order]
    dup = np.nonzero(np.diff(s) == 0)[0]
    if len(dup):
        i = dup[0]
        raise DomainError(f"duplicate points: n={int(order[i]) + 1} and n={int(order[i + 1]) + 1}")
    raw = np.diff(np.append(s, s[0] + q))
    gaps = Counter({Fraction(int(g), q): int(c) for g, c in zip(*np.unique(raw, return_counts=True))})
    return GapResult(gaps, len(gaps))


def distinct_gap_counts(d: int, source: RationalSource, N_max: int) -> list[int]:
    """``consecutive_gaps(d, source, N).distinct_count`` for every ``N <= N_max``.

    Points are inserted one at a time; each insertion splits one gap in
    two, so the gap multiset is updated in O(log N) besides the list insert.
    """
    if N_max < 1:
        raise DomainError("N must be >= 1")
    q = source.q
    v = [int(x) for x in power_residues(d, source.b, q, N_max)]
    pts = [v[0]]
    where = {v[0]: 1}
    gaps = Counter({q: 1})
    out = [1]
    for n, x in enumerate(v[1:], start=2):
        if x in where:
            raise DomainError(f"duplicate points: n={where[x]} and n={n}")
        where[x] = n
        i = bisect.bisect(pts, x)
        left = pts[i - 1] if i > 0 else pts[-1] - q
        right = pts[i] if i < len(pts) else pts[0] + q
        old = right - left
        gaps[old] -= 1
        if not gaps[old]:
            del gaps[old]
        gaps[x - left] += 1
        gaps[right - x] += 1
        pts.insert(i, x)
        out.append(len(gaps))
    return out
