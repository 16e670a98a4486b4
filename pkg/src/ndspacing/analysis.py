"""Experiment runners: Poissonian convergence for squarefree moduli,
divergence for square-rich moduli, and the ladder classifier.
"""

from __future__ import annotations

import csv
import io
import json
import math
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from fractions import Fraction
from typing import Iterable, Mapping, Sequence

import numpy as np
from sympy import integer_nthroot

from .correlations import CorrelationRequest, Region, correlation
from .diophantine import (
    ApproximantLadder,
    RationalSource,
    diophantine_ratio,
    is_squarefree,
    square_decomposition,
    squarefree_ratio,
)
from .errors import DomainError

HOLDS = "condition3_holds"
FAILS = "condition3_fails"
UNDETERMINED = "undetermined"

RECORD_FIELDS = ("kind", "m", "d", "q", "b", "N", "region", "value", "reference", "deviation", "seed", "wall_ms")


def floor_power(q: int, exponent: Fraction) -> int:
    """``floor(q ** exponent)`` for a rational exponent, exactly."""
    exponent = Fraction(exponent)
    if exponent < 0:
        raise DomainError("exponent must be nonnegative")
    root, _ = integer_nthroot(q**exponent.numerator, exponent.denominator)
    return int(root)


def _fmt(x: Fraction) -> str:
    return f"{x.numerator}/{x.denominator}"


# ----------------------------------------------------------------- records

@dataclass(frozen=True)
class ExperimentRecord:
    kind: str
    m: int
    d: int
    q: int
    b: int
    N: int
    region: Region
    value: Fraction
    reference: Fraction
    deviation: Fraction
    seed: int | None = None
    wall_ms: float = field(default=0.0, compare=False)

    def as_row(self) -> dict:
        row = {k: getattr(self, k) for k in RECORD_FIELDS}
        row["region"] = self.region.to_json()
        for k in ("value", "reference", "deviation"):
            row[k] = _fmt(row[k])
        row["wall_ms"] = round(self.wall_ms, 3)
        return row

    def to_json(self) -> str:
        return json.dumps(self.as_row())

    @classmethod
    def from_json(cls, line: str) -> "ExperimentRecord":
        row = json.loads(line)
        return cls._from_row(row, json_region=True)

    @classmethod
    def _from_row(cls, row: Mapping, json_region: bool) -> "ExperimentRecord":
        if set(row) != set(RECORD_FIELDS):
            raise DomainError(f"record fields {sorted(row)} != {sorted(RECORD_FIELDS)}")
        region = row["region"]
        if not json_region:
            region = json.loads(region)
        seed = row["seed"]
        rec = cls(
            kind=str(row["kind"]),
            m=int(row["m"]),
            d=int(row["d"]),
            q=int(row["q"]),
            b=int(row["b"]),
            N=int(row["N"]),
            region=Region.from_json(region),
            value=Fraction(row["value"]),
            reference=Fraction(row["reference"]),
            deviation=Fraction(row["deviation"]),
            seed=None if seed in (None, "") else int(seed),
            wall_ms=float(row["wall_ms"]),
        )
        if rec.kind == "t2" and rec.deviation != abs(rec.value - rec.reference):
            raise DomainError("deviation != |value - reference|")
        return rec


def records_to_csv(records: Iterable[ExperimentRecord]) -> str:
    buf = io.StringIO()
    w = csv.DictWriter(buf, fieldnames=RECORD_FIELDS, lineterminator="\n")
    w.writeheader()
    for r in records:
        row = r.as_row()
        row["region"] = json.dumps(row["region"])
        w.writerow(row)
    return buf.getvalue()


def records_from_csv(text: str) -> list[ExperimentRecord]:
    return [ExperimentRecord._from_row(row, json_region=False) for row in csv.DictReader(io.StringIO(text))]


# ------------------------------------------------------ squarefree moduli

@dataclass(frozen=True)
class T2Config:
    """Correlation sweep over moduli with large squarefree part.

    ``theta`` must sit strictly inside ``(1 - 1/(2m) + delta0, 1 - delta0)``
    and every modulus must have ``log u / log q >= min_squarefree_ratio``.
    """

    m: int
    d: int
    qs: tuple[int, ...]
    theta: Fraction
    delta0: Fraction = Fraction(1, 20)
    region: Region | None = None
    samples: int = 5
    seed: int = 0
    min_squarefree_ratio: float = 0.95

    def __post_init__(self):
        object.__setattr__(self, "theta", Fraction(self.theta))
        object.__setattr__(self, "delta0", Fraction(self.delta0))
        object.__setattr__(self, "qs", tuple(sorted(self.qs)))
        if self.region is None:
            object.__setattr__(self, "region", Region.cube(-1, 1, self.m - 1))
        if self.m < 2:
            raise DomainError("m must be >= 2")
        if not 0 < self.delta0 < Fraction(1, 4 * self.m):
            raise DomainError(f"delta0 must lie in (0, 1/{4 * self.m})")
        lo, hi = 1 - Fraction(1, 2 * self.m) + self.delta0, 1 - self.delta0
        if not lo < self.theta < hi:
            raise DomainError(f"theta {self.theta} outside window ({lo}, {hi})")
        if self.region.dim != self.m - 1:
            raise DomainError("region dimension must be m-1")
        if self.samples < 1:
            raise DomainError("samples must be >= 1")
        for q in self.qs:
            if squarefree_ratio(q) < self.min_squarefree_ratio:
                raise DomainError(f"q = {q} fails the squarefree-ratio gate")


def sample_units(q: int, count: int, seed: int) -> list[int]:
    """``count`` distinct ``b`` in ``[1, q-1]`` coprime to ``q``, by seeded rejection.

    Each ``q`` gets its own stream seeded by ``(seed, q)``, so the draw for
    one modulus does not depend on which other moduli are in the sweep.
    """
    if q < 10**6 and sum(math.gcd(b, q) == 1 for b in range(1, q)) < count:
        raise DomainError(f"fewer than {count} units mod {q}")
    rng = np.random.default_rng([seed, q])
    out: list[int] = []
    while len(out) < count:
        b = int(rng.integers(1, q))
        if b not in out and math.gcd(b, q) == 1:
            out.append(b)
    return out


def _t2_item(args) -> ExperimentRecord:
    m, d, q, b, N, region, seed = args
    t0 = time.perf_counter()
    res = correlation(CorrelationRequest(m, d, RationalSource(b, q), N, region))
    vol = region.volume
    return ExperimentRecord(
        "t2", m, d, q, b, N, region, res.value, vol, abs(res.value - vol), seed, 1000 * (time.perf_counter() - t0)
    )


def _run(items: list, fn, workers: int) -> list:
    if workers <= 1 or len(items) < 2:
        return [fn(it) for it in items]
    with ProcessPoolExecutor(max_workers=workers) as ex:
        return list(ex.map(fn, items))


def t2_experiment(cfg: T2Config, workers: int = 1) -> list[ExperimentRecord]:
    """``R^(m)(floor(q^theta), d, b/q, region)`` for seeded units ``b``.

    Records are sorted by ``(q, b, N)`` whatever the worker count.
    """
    items = []
    for q in cfg.qs:
        N = floor_power(q, cfg.theta)
        for b in sample_units(q, cfg.samples, cfg.seed):
            items.append((cfg.m, cfg.d, q, b, N, cfg.region, cfg.seed))
    recs = _run(items, _t2_item, workers)
    return sorted(recs, key=lambda r: (r.q, r.b, r.N))


def mean_deviation(records: Sequence[ExperimentRecord]) -> Fraction:
    return sum((r.deviation for r in records), Fraction(0)) / len(records)


# ---------------------------------------------------- square-rich moduli

@dataclass(frozen=True)
class DivergenceConfig:
    """``q = u v^2`` with ``u`` squarefree and ``N > q``."""

    u: int
    v: int
    d: int
    m: int
    N: int
    b: int = 1
    region: Region | None = None

    def __post_init__(self):
        if self.region is None:
            object.__setattr__(self, "region", Region.cube(-1, 1, self.m - 1))
        if self.u < 1 or self.v < 1 or not is_squarefree(self.u):
            raise DomainError("u must be a positive squarefree integer")
        if math.gcd(self.b, self.q) != 1:
            raise DomainError("gcd(b, q) != 1")
        if self.d < 2:
            raise DomainError("d must be >= 2")
        if self.N <= self.q:
            raise DomainError("N must exceed q")

    @property
    def q(self) -> int:
        return self.u * self.v**2


@dataclass(frozen=True)
class DivergenceResult:
    R: Fraction
    bound: Fraction
    passed: bool
    M: int

    def __iter__(self):
        return iter((self.R, self.bound, self.passed))


def _zero_interior(region: Region) -> bool:
    return any(all(lo < 0 < hi for lo, hi in box) for box in region.boxes)


def falling_factorial(M: int, m: int) -> int:
    return math.perm(M, m) if M >= m else 0


def divergence_bound(cfg: DivergenceConfig) -> tuple[Fraction, int]:
    """``(M)_m / N`` with ``M = floor(N/(uv))``: tuples of multiples of ``uv`` all sit at 0."""
    if not _zero_interior(cfg.region):
        raise DomainError("bound vacuous: 0 is not interior to the region")
    M = cfg.N // (cfg.u * cfg.v)
    return Fraction(falling_factorial(M, cfg.m), cfg.N), M


def divergence_lower_bound(cfg: DivergenceConfig) -> DivergenceResult:
    bound, M = divergence_bound(cfg)
    uv, q = cfg.u * cfg.v, cfg.q
    # every contributing n = uv*n' must land on residue 0
    if any(cfg.b * pow(uv * k, cfg.d, q) % q for k in range(1, M + 1)):
        raise AssertionError("multiple of uv with nonzero residue")
    R = correlation(CorrelationRequest(cfg.m, cfg.d, RationalSource(cfg.b, q), cfg.N, cfg.region)).value
    return DivergenceResult(R, bound, R >= bound, M)


@dataclass(frozen=True)
class LadderBound:
    j: int
    q: int
    u: int
    v: int
    delta: float
    N: int
    M: int
    bound: Fraction
    R: Fraction | None = None


def ladder_divergence_bounds(
    ladder: ApproximantLadder, m: int, region: Region | None = None, compute_R: bool = False, max_N: int = 5000
) -> list[LadderBound]:
    """Divergence bound at ``N_j = floor(q_j * sqrt(v_j))`` for entries with ``v_j > 1``.

    With ``v_j = q_j^delta`` this is ``N_j = floor(q_j^(1 + delta/2))``.
    ``R`` is filled in only when asked and ``N_j <= max_N``.
    """
    region = region or Region.cube(-1, 1, m - 1)
    out = []
    for j, e in enumerate(ladder.entries):
        sq = square_decomposition(e.q, e.factors)
        if sq.v == 1:
            continue
        N = math.isqrt(e.q * e.q * sq.v)
        cfg = DivergenceConfig(sq.u, sq.v, 2, m, N, e.b % e.q or 1, region)
        bound, M = divergence_bound(cfg)
        R = None
        if compute_R and N <= max_N:
            R = divergence_lower_bound(cfg).R
        out.append(LadderBound(j, e.q, sq.u, sq.v, math.log(sq.v) / math.log(e.q), N, M, bound, R))
    return out


# --------------------------------------------------------------- schedule

@dataclass(frozen=True)
class ScheduleEntry:
    j: int
    k: int
    q: int
    N: int


def default_thresholds(ladder: ApproximantLadder, m: int = 2, k_max: int = 8) -> dict[int, int]:
    """``j_k`` = first ``j`` with ratio ``>= 1 - 1/(100 k m)``, for ``k = 2..k_max``."""
    ratios = [diophantine_ratio(ladder, j) for j in range(len(ladder))]
    out = {}
    for k in range(2, k_max + 1):
        delta = Fraction(1, 100 * k * m)
        j = next((j for j, r in enumerate(ratios) if r >= 1 - delta), None)
        if j is None:
            break
        out[k] = j
    return out


def schedule_Nj(ladder: ApproximantLadder, j_thresholds: Mapping[int, int]) -> list[ScheduleEntry]:
    """``N_j = floor(q_j^(1 - 1/(4k)))`` for ``j_k <= j < j_{k+1}``."""
    if not j_thresholds:
        raise DomainError("empty threshold map")
    ks = sorted(j_thresholds)
    js = [j_thresholds[k] for k in ks]
    if any(b < a for a, b in zip(js, js[1:])):
        raise DomainError("thresholds must be nondecreasing in k")
    out = []
    for i, k in enumerate(ks):
        stop = js[i + 1] if i + 1 < len(ks) else len(ladder)
        for j in range(js[i], min(stop, len(ladder))):
            q = ladder[j].q
            out.append(ScheduleEntry(j, k, q, floor_power(q, 1 - Fraction(1, 4 * k))))
    return out


# ----------------------------------------------------------- classifier

@dataclass(frozen=True)
class Trace:
    d: int
    j: int
    N: int
    value: Fraction | None


@dataclass(frozen=True)
class Verdict:
    ratios: tuple[tuple[int, int, float], ...]
    classification: str
    traces: tuple[Trace, ...] = ()
    thresholds: tuple[float, float] = (0.99, 0.9)

    def to_json(self) -> str:
        d = asdict(self)
        d["traces"] = [
            {**asdict(t), "value": None if t.value is None else _fmt(t.value)} for t in self.traces
        ]
        return json.dumps(d)


def classify_ratios(ratios: Sequence[float], hi: float = 0.99, lo: float = 0.9) -> str:
    """Read the second half of the ratio sequence: all ``>= hi`` holds, any ``< lo`` fails."""
    if not ratios:
        return UNDETERMINED
    tail = list(ratios)[len(ratios) // 2:]
    if all(r >= hi for r in tail):
        return HOLDS
    if any(r < lo for r in tail):
        return FAILS
    return UNDETERMINED


def classify_alpha(
    ladder: ApproximantLadder,
    d_list: Sequence[int],
    budget: int,
    *,
    j_thresholds: Mapping[int, int] | None = None,
    hi: float = 0.99,
    lo: float = 0.9,
    trace_max_N: int = 200_000,
) -> Verdict:
    """Condition-(3) verdict for the ladder limit, with pair-correlation evidence.

    Only ``log u_j / log q_j`` for ``q_j <= budget`` enters the verdict.
    Traces are ``R^(2)`` on ``[-1, 1]`` at the scheduled ``N_j`` (default
    ``floor(q_j^(7/8))``); entries whose ``N_j`` exceeds ``trace_max_N`` or
    is too small for the region get ``value=None``.
    """
    if not ladder.certify():
        raise DomainError("ladder fails certification")
    used = [j for j, e in enumerate(ladder.entries) if e.q <= budget]
    ratios = tuple((j, ladder[j].q, diophantine_ratio(ladder, j)) for j in used)
    verdict = classify_ratios([r for _, _, r in ratios], hi, lo)
    region = Region.cube(-1, 1, 1)
    traces = []
    if used:
        sched = [s for s in schedule_Nj(ladder, j_thresholds or {2: 0}) if s.j in used]
        for d in d_list:
            for s in sched:
                value = None
                if 2 < s.N <= trace_max_N:
                    e = ladder[s.j]
                    value = correlation(CorrelationRequest(2, d, RationalSource(e.b, e.q), s.N, region)).value
                traces.append(Trace(d, s.j, s.N, value))
    return Verdict(ratios, verdict, tuple(traces), (hi, lo))
