"""Exact rational machinery: continued fractions, approximant ladders,
square decompositions and the scaled distance between power sequences.

An irrational ``alpha`` is never held as a float here.  It *is* its
:class:`ApproximantLadder`: a finite certified prefix of rationals
``b_j/q_j`` together with the rule that continues it.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Mapping, NamedTuple, Sequence, Union

from sympy import integer_nthroot, isprime, nextprime

from .errors import DomainError

TRIAL_DIVISION_LIMIT = 10**7

MODES = ("raw", "prime_denominator", "square_rich")


# ---------------------------------------------------------------- factoring

def factorize(n: int, trial_limit: int = TRIAL_DIVISION_LIMIT) -> dict[int, int]:
    """Prime factorization by trial division.

    Divisors up to ``trial_limit`` are stripped; a leftover cofactor is
    accepted only if it is provably prime (below ``trial_limit**2`` or
    passing a deterministic primality test).  Anything else raises, since
    constructed moduli in this package always come with known factors.
    """
    if n < 1:
        raise DomainError(f"cannot factor {n}")
    factors: dict[int, int] = {}
    if n == 1:
        return factors
    if n > trial_limit and isprime(n):
        return {n: 1}
    for p in (2, 3):
        while n % p == 0:
            factors[p] = factors.get(p, 0) + 1
            n //= p
    p, step = 5, 2
    while p * p <= n and p <= trial_limit:
        while n % p == 0:
            factors[p] = factors.get(p, 0) + 1
            n //= p
        p += step
        step = 6 - step
    if n > 1:
        if n < trial_limit * trial_limit or isprime(n):
            factors[n] = factors.get(n, 0) + 1
        else:
            raise DomainError(
                f"cofactor {n} has no factor below {trial_limit}; supply a factorization"
            )
    return factors


def is_squarefree(n: int, factors: Mapping[int, int] | None = None) -> bool:
    if n == 0:
        return False
    f = factors if factors is not None else factorize(abs(n))
    return all(e == 1 for e in f.values())


def _product(factors: Mapping[int, int]) -> int:
    out = 1
    for p, e in factors.items():
        out *= p**e
    return out


def _check_factors(n: int, factors: Mapping[int, int]) -> dict[int, int]:
    if _product(factors) != n or not all(isprime(p) for p in factors):
        raise DomainError(f"invalid factorization certificate for {n}")
    return dict(factors)


# ------------------------------------------------------ square decomposition

@dataclass(frozen=True)
class SquareDecomposition:
    """``q = u * v**2`` with ``u`` squarefree.

    ``simple_part`` is the product of the primes dividing ``q`` exactly
    once, the other common reading of "squarefree part".
    """

    u: int
    v: int
    q: int
    simple_part: int


def square_decomposition(q: int, factors: Mapping[int, int] | None = None) -> SquareDecomposition:
    if q == 0:
        raise DomainError("square decomposition of 0 is undefined")
    if q < 0:
        raise DomainError("square decomposition expects a positive integer")
    f = _check_factors(q, factors) if factors is not None else factorize(q)
    u = v = simple = 1
    for p, e in f.items():
        v *= p ** (e // 2)
        if e % 2:
            u *= p
        if e == 1:
            simple *= p
    return SquareDecomposition(u=u, v=v, q=q, simple_part=simple)


def squarefree_ratio(q: int, factors: Mapping[int, int] | None = None) -> float:
    """``log u / log q`` for ``q = u v^2``; exact at the endpoints 0 and 1.

    Double precision logarithms of big integers are accurate to ~1e-15
    relative, well inside the 1e-9 tolerance used for classification.
    """
    if q < 2:
        raise DomainError("ratio needs q >= 2")
    u = square_decomposition(q, factors).u
    if u == q:
        return 1.0
    if u == 1:
        return 0.0
    return math.log(u) / math.log(q)


# ------------------------------------------------------- continued fractions

@dataclass(frozen=True)
class ContinuedFraction:
    partial_quotients: tuple[int, ...]

    def __post_init__(self):
        pq = tuple(int(a) for a in self.partial_quotients)
        object.__setattr__(self, "partial_quotients", pq)
        if pq and pq[0] < 0:
            raise DomainError("a_0 must be nonnegative")
        if any(a < 1 for a in pq[1:]):
            raise DomainError("partial quotients after a_0 must be >= 1")

    @classmethod
    def golden(cls, length: int) -> "ContinuedFraction":
        return cls((1,) * length)

    @classmethod
    def sqrt2(cls, length: int) -> "ContinuedFraction":
        return cls((1,) + (2,) * (length - 1))


def cf_convergents(cf: ContinuedFraction | Sequence[int], count: int | None = None) -> list[tuple[int, int]]:
    """First ``count`` convergents ``(p_n, q_n)`` of a continued fraction.

    >>> cf_convergents(ContinuedFraction((1, 2, 2, 2, 2)), 5)
    [(1, 1), (3, 2), (7, 5), (17, 12), (41, 29)]
    """
    pq = cf.partial_quotients if isinstance(cf, ContinuedFraction) else ContinuedFraction(tuple(cf)).partial_quotients
    if not pq:
        raise DomainError("empty expansion")
    if count is None:
        count = len(pq)
    if count > len(pq) or count < 0:
        raise DomainError(f"requested {count} convergents from {len(pq)} partial quotients")
    out = []
    p_prev, q_prev, p, q = 1, 0, pq[0], 1
    for n in range(count):
        if n > 0:
            p, p_prev = pq[n] * p + p_prev, p
            q, q_prev = pq[n] * q + q_prev, q
        out.append((p, q))
    return out


# ---------------------------------------------------------- ladder sources

@dataclass(frozen=True)
class LadderEntry:
    """One approximant ``b/q`` with certified order ``k``.

    ``tail`` is an exact bound on ``|alpha - b/q|``; certification checks
    ``tail * q**k <= 1``.
    """

    b: int
    q: int
    k: int
    tail: Fraction
    factors: dict = field(compare=False, hash=False, repr=False)

    @property
    def value(self) -> Fraction:
        return Fraction(self.b, self.q)


@dataclass(frozen=True)
class ApproximantLadder:
    """Certified prefix ``(b_j, q_j, k_j)`` of an irrational of infinite type.

    Increments ``b_{j+1}/q_{j+1} - b_j/q_j`` alternate in sign and strictly
    decrease in size, so ``|alpha - b_j/q_j|`` is at most the next
    increment (the stored ``tail``).  ``horizon`` is the first rational past
    the certified entries; it fixes the last tail but carries no order of
    its own.
    """

    mode: str
    entries: tuple[LadderEntry, ...]
    horizon: tuple[int, int]
    horizon_factors: dict = field(compare=False, hash=False, repr=False, default_factory=dict)

    def __len__(self) -> int:
        return len(self.entries)

    def __getitem__(self, j: int) -> LadderEntry:
        return self.entries[j]

    @property
    def alpha_prefix(self) -> Fraction:
        return Fraction(*self.horizon)

    def fractions(self) -> list[Fraction]:
        return [e.value for e in self.entries] + [self.alpha_prefix]

    def certify(self) -> bool:
        """Re-verify every claim of the ladder with exact arithmetic."""
        vals = self.fractions()
        qs = [e.q for e in self.entries] + [self.horizon[1]]
        bs = [e.b for e in self.entries] + [self.horizon[0]]
        if any(math.gcd(b, q) != 1 for b, q in zip(bs, qs)):
            return False
        if any(q2 <= q1 for q1, q2 in zip(qs, qs[1:])):
            return False
        incs = [v2 - v1 for v1, v2 in zip(vals, vals[1:])]
        for i, inc in enumerate(incs):
            if inc == 0:
                return False
            if i and (inc > 0) == (incs[i - 1] > 0):
                return False
            if i and abs(inc) >= abs(incs[i - 1]):
                return False
        alpha = vals[-1]
        for j, e in enumerate(self.entries):
            if e.tail != abs(incs[j]):
                return False
            if e.tail * e.q**e.k > 1:
                return False
            if abs(alpha - e.value) > e.tail:
                return False
        return True

    def extend(self, k_more: Iterable[int], square_parts: Mapping[int, tuple[int, int]] | None = None) -> "ApproximantLadder":
        """Longer prefix of the same ladder (the existing entries are kept)."""
        ks = [e.k for e in self.entries] + list(k_more)
        _check_k_sequence(ks)
        entries = list(self.entries)
        b, q = self.horizon
        factors = dict(self.horizon_factors) or factorize(q)
        offset = len(entries)
        parts = dict(square_parts or {})
        for i, k in enumerate(ks[offset:]):
            j = offset + i
            q_next, f_next = _next_denominator(q, k, self.mode, factors, parts.get(j))
            b_next, tail = _next_numerator(b, q, q_next, f_next, +1 if j % 2 == 0 else -1)
            entries.append(LadderEntry(b, q, k, tail, factors))
            b, q, factors = b_next, q_next, f_next
        return _finalize(self.mode, entries, (b, q), factors)

    # -- serialization ------------------------------------------------------

    def to_text(self) -> str:
        lines = [f"ladder v1 mode={self.mode}"]
        for j, e in enumerate(self.entries):
            lines.append(f"{j} {e.b} {e.q} {e.k} {_format_factors(e.factors)}")
        b, q = self.horizon
        lines.append(f"horizon {b} {q} {_format_factors(self.horizon_factors)}")
        return "\n".join(lines) + "\n"

    @classmethod
    def from_text(cls, text: str) -> "ApproximantLadder":
        lines = [ln.strip() for ln in text.splitlines() if ln.strip()]
        if not lines or not lines[0].startswith("ladder v1 mode="):
            raise DomainError("missing ladder header")
        mode = lines[0].split("mode=", 1)[1]
        if mode not in MODES:
            raise DomainError(f"unknown ladder mode {mode!r}")
        rows, horizon, hf = [], None, {}
        for ln in lines[1:]:
            tok = ln.split()
            if tok[0] == "horizon":
                horizon = (int(tok[1]), int(tok[2]))
                hf = _parse_factors(tok[3], horizon[1]) if len(tok) > 3 else factorize(horizon[1])
                continue
            j, b, q, k = (int(t) for t in tok[:4])
            if j != len(rows):
                raise DomainError(f"ladder entry index {j} out of order")
            f = _parse_factors(tok[4], q) if len(tok) > 4 else factorize(q)
            rows.append((b, q, k, f))
        if horizon is None:
            raise DomainError("ladder text has no horizon line")
        entries = [LadderEntry(b, q, k, Fraction(0), f) for b, q, k, f in rows]
        ladder = _finalize(mode, entries, horizon, hf)
        if not ladder.certify():
            raise DomainError("ladder text fails certification")
        return ladder


def _format_factors(factors: Mapping[int, int]) -> str:
    if not factors:
        return "1"
    return "*".join(f"{p}^{e}" for p, e in sorted(factors.items()))


def _parse_factors(token: str, n: int) -> dict[int, int]:
    if token == "1":
        return _check_factors(n, {})
    f = {}
    for part in token.split("*"):
        p, e = part.split("^")
        f[int(p)] = int(e)
    return _check_factors(n, f)


def _finalize(mode, entries, horizon, horizon_factors) -> ApproximantLadder:
    vals = [Fraction(e.b, e.q) for e in entries] + [Fraction(*horizon)]
    fixed = tuple(
        LadderEntry(e.b, e.q, e.k, abs(vals[j + 1] - vals[j]), e.factors)
        for j, e in enumerate(entries)
    )
    return ApproximantLadder(mode, fixed, tuple(horizon), dict(horizon_factors))


def _check_k_sequence(ks: Sequence[int]) -> None:
    if not ks:
        raise DomainError("empty k sequence")
    if any(k < 3 for k in ks):
        raise DomainError("every k must be >= 3")
    if any(k2 < k1 for k1, k2 in zip(ks, ks[1:])) or (len(ks) > 1 and ks[-1] == ks[0]):
        raise DomainError("type not unbounded: k sequence must increase")


def _ceil_root(n: int, num: int, den: int) -> int:
    """Smallest integer r with r**den >= n**num."""
    target = n**num
    r, exact = integer_nthroot(target, den)
    return r if exact else r + 1


def _next_denominator(q, k, mode, factors, square_part):
    if mode == "raw":
        return q**k, {p: e * k for p, e in factors.items()}
    if mode == "prime_denominator":
        p = nextprime(q**k - 1)
        return p, {p: 1}
    if mode == "square_rich":
        target = 3 * q**k
        if square_part is not None:
            u, v = square_part
            if not is_squarefree(u) or v < 2 or v < u:
                raise DomainError(f"square part ({u}, {v}) must have u squarefree and v >= u")
            if math.gcd(u, v) != 1:
                raise DomainError("square part needs gcd(u, v) = 1")
        else:
            v = nextprime(_ceil_root(target, 2, 5) - 1)
            u = nextprime(max(1, -(-target // (v * v))) - 1)
            if u == v:
                u = nextprime(u)
        q_next = u * v * v
        if q_next < target:
            raise DomainError(f"q_next = {q_next} is below 3*q^k = {target}")
        f: dict[int, int] = {}
        for p, e in factorize(u).items():
            f[p] = f.get(p, 0) + e
        for p, e in factorize(v).items():
            f[p] = f.get(p, 0) + 2 * e
        return q_next, f
    raise DomainError(f"unknown ladder mode {mode!r}")


def _next_numerator(b, q, q_next, factors_next, sign):
    """Closest admissible numerator on the requested side of ``b/q``."""
    lo, rem = divmod(b * q_next, q)
    for t in range(1, 64):
        b_next = lo + t if sign > 0 else lo - t + (1 if rem else 0)
        if all(b_next % p for p in factors_next):
            tail = abs(Fraction(b_next, q_next) - Fraction(b, q))
            return b_next, tail
    raise DomainError("no numerator coprime to q_next near b/q")


def build_ladder(
    q0: int,
    b0: int,
    k_sequence: Sequence[int],
    mode: str = "raw",
    square_parts: Mapping[int, tuple[int, int]] | None = None,
) -> ApproximantLadder:
    """Construct a certified approximant ladder.

    Step ``j`` sends ``q_j`` to ``q_{j+1} >= q_j**k_j`` (``raw``: exactly
    ``q_j**k_j``; ``prime_denominator``: the least prime ``>= q_j**k_j``;
    ``square_rich``: ``u*v**2 >= 3*q_j**k_j`` with ``v >= u`` so that
    ``v >= q_{j+1}**(1/3)``).  ``square_parts`` overrides ``(u, v)`` for
    chosen steps.  The numerator moves to the adjacent admissible fraction
    alternately above and below, which keeps every tail certificate exact.
    """
    if mode not in MODES:
        raise DomainError(f"unknown ladder mode {mode!r}")
    if q0 < 2:
        raise DomainError("q0 must be >= 2")
    if math.gcd(b0, q0) != 1:
        raise DomainError(f"gcd(b0, q0) = {math.gcd(b0, q0)} != 1")
    _check_k_sequence(list(k_sequence))
    seed = ApproximantLadder(mode, (), (b0, q0), factorize(q0))
    ladder = seed.extend(k_sequence, square_parts)
    if not ladder.certify():  # re-verified, never assumed
        raise DomainError("constructed ladder failed exact certification")
    return ladder


def diophantine_ratio(ladder: ApproximantLadder, j: int) -> float:
    """``log u_j / log q_j`` where ``q_j = u_j v_j^2``."""
    if not 0 <= j < len(ladder):
        raise IndexError(f"ladder has {len(ladder)} entries")
    e = ladder[j]
    return squarefree_ratio(e.q, e.factors)


# ------------------------------------------------------------------ sources

@dataclass(frozen=True)
class RationalSource:
    """The rational ``b/q`` with ``gcd(b, q) = 1``."""

    b: int
    q: int

    def __post_init__(self):
        if self.q < 1:
            raise DomainError("q must be positive")
        if math.gcd(self.b, self.q) != 1:
            raise DomainError(f"gcd(b, q) = {math.gcd(self.b, self.q)} != 1")

    @property
    def value(self) -> Fraction:
        return Fraction(self.b, self.q)

    def label(self) -> str:
        return f"{self.b}/{self.q}"


@dataclass(frozen=True)
class LadderSource:
    """The irrational limit of ``ladder``, to be read at approximant ``j``."""

    ladder: ApproximantLadder
    j: int

    def __post_init__(self):
        if not 0 <= self.j < len(self.ladder):
            raise DomainError("no tail certificate: index outside certified entries")

    @property
    def convergent(self) -> RationalSource:
        e = self.ladder[self.j]
        return RationalSource(e.b, e.q)

    def label(self) -> str:
        return f"ladder[{self.j}]"


Source = Union[RationalSource, LadderSource]


class PowerSequence(NamedTuple):
    """The sequence ``n**d * x mod 1`` for a source ``x``."""

    d: int
    source: Source


def _circular_max(d: int, x: Fraction, y: Fraction, n_max: int) -> Fraction:
    diff = x - y
    num, den = diff.numerator, diff.denominator
    worst = 0
    for n in range(1, n_max + 1):
        r = (pow(n, d, den) * num) % den
        worst = max(worst, min(r, den - r))
    return Fraction(worst, den)


def scaled_distance(seq_a: PowerSequence, seq_b: PowerSequence, n_max: int) -> Fraction:
    """Exact upper bound on ``N * max_{n<=N} ||x_a(n) - x_b(n)||``.

    Distances are taken on the circle R/Z, which is what the wrap-reduced
    correlation counts see.  Two rational sources give the exact maximum;
    a rational against a ladder limit gives ``N**(d+1) * bound`` where
    ``bound`` is the best certified bound on ``|x - alpha|``.
    """
    if n_max < 1:
        raise DomainError("N must be >= 1")
    if seq_a == seq_b:
        return Fraction(0)
    sa, sb = seq_a.source, seq_b.source
    if isinstance(sa, RationalSource) and isinstance(sb, RationalSource):
        if seq_a.d != seq_b.d:
            # different exponents: evaluate each point exactly
            worst = Fraction(0)
            for n in range(1, n_max + 1):
                t = (n**seq_a.d * sa.value - n**seq_b.d * sb.value) % 1
                worst = max(worst, min(t, 1 - t))
            return n_max * worst
        return n_max * _circular_max(seq_a.d, sa.value, sb.value, n_max)
    if seq_a.d != seq_b.d:
        raise DomainError("no tail certificate for sequences with different exponents")
    if isinstance(sa, LadderSource) and isinstance(sb, LadderSource):
        if sa.ladder == sb.ladder:
            return Fraction(0)
        raise DomainError("no tail certificate relating two different ladders")
    lad = sa if isinstance(sa, LadderSource) else sb
    rat = sb if lad is sa else sa
    if not lad.ladder.certify():
        raise DomainError("no tail certificate: ladder fails certification")
    x = rat.value
    best = min(abs(x - e.value) + Fraction(1, e.q**e.k) for e in lad.ladder.entries)
    return Fraction(n_max) ** (seq_a.d + 1) * best
