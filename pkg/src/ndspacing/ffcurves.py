"""Point counts on the chain curves ``b x_i^d - b x_{i+1}^d = a_i (mod q)``.

The fast count reduces every prime-power factor of ``q`` to a table of
d-th power multiplicities: with ``t = x_m^d`` the chain forces
``x_i^d = t + Ahat_i`` where ``Ahat_i`` is the i-th tail sum of ``a`` times
``b^{-1}``, so ``nu = sum_t prod_i N_d(t + Ahat_i)``.
"""

from __future__ import annotations

import cmath
import itertools
import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import Sequence

import numpy as np
from sympy import isprime

from .diophantine import factorize
from .errors import DomainError, GuardError
from .polynomials import Poly, reduce_steps, remainder, s_polynomial

BRUTE_GUARD = 10**8


@dataclass(frozen=True)
class CurveSpec:
    m: int
    d: int
    q: int
    b: int
    a: tuple[int, ...]

    def __post_init__(self):
        a = tuple(int(x) % self.q for x in self.a) if self.q >= 2 else tuple(self.a)
        object.__setattr__(self, "a", a)
        if self.m < 2 or self.d < 1 or self.q < 2:
            raise DomainError(f"need m >= 2, d >= 1, q >= 2 (got m={self.m}, d={self.d}, q={self.q})")
        if len(a) != self.m - 1:
            raise DomainError(f"a must have m-1 = {self.m - 1} entries, got {len(a)}")
        if math.gcd(self.b, self.q) != 1:
            raise DomainError("b not invertible mod q")


@dataclass(frozen=True)
class PowerResidueTable:
    modulus: int
    d: int
    counts: np.ndarray

    def __getitem__(self, t: int) -> int:
        return int(self.counts[t % self.modulus])


def _powmod_array(x: np.ndarray, d: int, c: int) -> np.ndarray:
    if c < 3_000_000_000:
        out = np.ones_like(x)
        base = x % c
        e = d
        while e:
            if e & 1:
                out = (out * base) % c
            base = (base * base) % c
            e >>= 1
        return out
    return np.array([pow(int(v), d, c) for v in x], dtype=object)


@lru_cache(maxsize=256)
def _table(c: int, d: int) -> np.ndarray:
    vals = _powmod_array(np.arange(c, dtype=np.int64), d, c)
    counts = np.bincount(vals.astype(np.int64), minlength=c)
    counts.setflags(write=False)
    return counts


def power_residue_table(c: int, d: int) -> PowerResidueTable:
    """``N_d(t) = #{x mod c : x^d = t}`` by one pass over ``x``."""
    if c < 2 or d < 1:
        raise DomainError("need c >= 2 and d >= 1")
    return PowerResidueTable(c, d, _table(c, d))


# ----------------------------------------------------------- partial sums

@dataclass(frozen=True)
class PartialSumProfile:
    """Tail sums ``A_i = a_i + ... + a_{m-1}`` (``A_m = 0``) of an integer vector.

    ``reduced`` holds ``A_i * b^{-1} mod p``; ``r_eff`` counts its distinct
    values; ``D`` is the product of ``A_i - A_j`` over ``i < j``.
    """

    A: tuple[int, ...]
    modulus: int
    reduced: tuple[int, ...]
    r_eff: int
    D: int


def tail_sums(a: Sequence[int]) -> tuple[int, ...]:
    out = [0]
    for x in reversed(a):
        out.append(out[-1] + int(x))
    return tuple(reversed(out))


def partial_sum_profile(a: Sequence[int], p: int, b: int = 1) -> PartialSumProfile:
    A = tail_sums(a)
    b_inv = pow(b, -1, p) if p > 1 else 0
    reduced = tuple((x * b_inv) % p for x in A)
    D = 1
    for i, j in itertools.combinations(range(len(A)), 2):
        D *= A[i] - A[j]
    return PartialSumProfile(A=A, modulus=p, reduced=reduced, r_eff=len(set(reduced)), D=D)


# ------------------------------------------------------------ point counts

@dataclass(frozen=True)
class PointCountResult:
    spec: CurveSpec
    nu: int
    crt_factors: tuple[tuple[int, int, int, int], ...]  # (p, e, nu_pe, A_pe)

    @property
    def defect(self) -> int:
        return self.nu - self.spec.q

    def reconstruct(self) -> Fraction:
        """``q * sum_S A(c_S)/c_S`` over subsets S of the prime factors."""
        total = Fraction(0)
        facs = self.crt_factors
        for r in range(len(facs) + 1):
            for subset in itertools.combinations(facs, r):
                c, A = 1, 1
                for p, e, _, A_pe in subset:
                    c *= p**e
                    A *= A_pe
                total += Fraction(A, c)
        return self.spec.q * total

    def to_record(self) -> str:
        s = self.spec
        factors = ";".join(f"{p}^{e}:{n}" for p, e, n, _ in self.crt_factors)
        a = ",".join(str(x) for x in s.a)
        return f"nu {s.q} {s.d} {s.m} {s.b} a={a} nu={self.nu} A={self.defect} factors={factors}"

    @classmethod
    def from_record(cls, line: str) -> "PointCountResult":
        tok = line.split()
        if len(tok) != 9 or tok[0] != "nu":
            raise DomainError(f"malformed point-count record: {line!r}")
        q, d, m, b = (int(t) for t in tok[1:5])
        kv = dict(t.split("=", 1) for t in tok[5:])
        a = tuple(int(x) for x in kv["a"].split(",")) if kv["a"] else ()
        spec = CurveSpec(m=m, d=d, q=q, b=b, a=a)
        facs = []
        for part in kv["factors"].split(";"):
            pe, n = part.split(":")
            p, e = (int(x) for x in pe.split("^"))
            facs.append((p, e, int(n), int(n) - p**e))
        res = cls(spec, int(kv["nu"]), tuple(facs))
        if res.defect != int(kv["A"]) or math.prod(f[2] for f in facs) != res.nu:
            raise DomainError("point-count record is inconsistent")
        return res


def _chain_count(c: int, d: int, shifts: Sequence[int]) -> int:
    """``sum_t prod_i N_d(t + shift_i mod c)`` for one modulus."""
    counts = _table(c, d)
    t = np.arange(c, dtype=np.int64)
    if c ** len(shifts) < 2**62:
        prod = np.ones(c, dtype=np.int64)
        for s in shifts:
            prod *= counts[(t + s) % c]
        return int(prod.sum())
    prod = np.ones(c, dtype=object)
    for s in shifts:
        prod = prod * counts[(t + s) % c].astype(object)
    return int(prod.sum())


def nu_prime_power(spec: CurveSpec, p: int, e: int) -> int:
    c = p**e
    b_inv = pow(spec.b, -1, c)
    shifts = [(A * b_inv) % c for A in tail_sums(spec.a)]
    return _chain_count(c, spec.d, shifts)


def nu(spec: CurveSpec, factors: dict[int, int] | None = None) -> PointCountResult:
    """Exact ``nu(d, a, q)`` through the prime-power chain formula and CRT."""
    f = factors if factors is not None else factorize(spec.q)
    out = []
    total = 1
    for p in sorted(f):
        e = f[p]
        n_pe = nu_prime_power(spec, p, e)
        out.append((p, e, n_pe, n_pe - p**e))
        total *= n_pe
    return PointCountResult(spec, total, tuple(out))


def _check_guard(q: int, m: int) -> None:
    if q**m > BRUTE_GUARD:
        raise GuardError(f"instance too large for oracle: q^m = {q**m} > {BRUTE_GUARD}")


def nu_brute(spec: CurveSpec) -> int:
    """Count solutions by enumerating every ``x`` in ``Z_q^m``."""
    _check_guard(spec.q, spec.m)
    q, d, b = spec.q, spec.d, spec.b
    powers = [b * pow(x, d, q) % q for x in range(q)]
    count = 0
    for x in itertools.product(range(q), repeat=spec.m):
        if all((powers[x[i]] - powers[x[i + 1]]) % q == spec.a[i] for i in range(spec.m - 1)):
            count += 1
    return count


def nu_brute_all(m: int, d: int, q: int, b: int) -> np.ndarray:
    """``nu`` for every ``a`` at once: each ``x`` in ``Z_q^m`` lands in exactly one fibre.

    Returns an array of shape ``(q,) * (m-1)`` indexed by ``a``.
    """
    _check_guard(q, m)
    if math.gcd(b, q) != 1:
        raise DomainError("b not invertible mod q")
    powers = (b * _powmod_array(np.arange(q, dtype=np.int64), d, q)) % q
    grids = np.meshgrid(*([powers] * m), indexing="ij")
    idx = np.zeros(grids[0].shape, dtype=np.int64)
    for i in range(m - 1):
        idx = idx * q + (grids[i] - grids[i + 1]) % q
    return np.bincount(idx.ravel(), minlength=q ** (m - 1)).reshape((q,) * (m - 1))


# ------------------------------------------------------ structure of curves

def _require_prime_not_dividing(spec: CurveSpec) -> None:
    if not isprime(spec.q):
        raise DomainError("criterion needs q prime")
    if spec.d % spec.q == 0:
        raise DomainError("criterion hypothesis violated: p divides d")


def is_irreducible_criterion(spec: CurveSpec) -> bool:
    """Tail sums of ``a * b^{-1}`` pairwise distinct and nonzero mod ``p``."""
    _require_prime_not_dividing(spec)
    prof = partial_sum_profile(spec.a, spec.q, spec.b)
    head = prof.reduced[:-1]
    return 0 not in head and len(set(head)) == len(head)


def weil_defect(spec: CurveSpec) -> Fraction:
    """``B`` in ``nu = d^(m - r_eff) (p + B)``, exactly."""
    _require_prime_not_dividing(spec)
    r_eff = partial_sum_profile(spec.a, spec.q, spec.b).r_eff
    return Fraction(nu(spec).nu, spec.d ** (spec.m - r_eff)) - spec.q


def defect_table(m: int, d: int, c: int, b: int) -> np.ndarray:
    """``A(d, a, c)`` for all ``a mod c``, as the product of prime-power defects.

    For a prime power this is ``nu - c``; for composite ``c`` it is the
    multiplicative defect of the subset expansion.
    """
    shape = (c,) * (m - 1)
    if c == 1:
        # the single point of the zero ring: nu - c = 0
        return np.zeros(shape, dtype=object)
    f = factorize(c)
    grids = np.indices(shape).reshape(m - 1, -1) if m > 1 else np.zeros((0, 1), dtype=np.int64)
    total = np.ones(grids.shape[1], dtype=object)
    for p, e in f.items():
        pe = p**e
        local = np.empty((pe,) * (m - 1), dtype=object)
        for a in itertools.product(range(pe), repeat=m - 1):
            spec = CurveSpec(m=m, d=d, q=pe, b=b % pe, a=a)
            local[a] = nu_prime_power(spec, p, e) - pe
        total = total * local[tuple(grids % pe)]
    return total.reshape(shape)


def zero_sum_check(d: int, m: int, c: int, b: int = 1) -> int:
    """``sum_{a mod c} A(d, a, c)``; always zero."""
    if math.gcd(b, c) != 1:
        raise DomainError("b not invertible mod c")
    return int(defect_table(m, d, c, b).sum())


def zero_sum_check_direct(d: int, m: int, c: int, b: int = 1) -> int:
    """Same sum using ``nu(d, a, c) - c`` for composite ``c``."""
    return int(sum(nu(CurveSpec(m, d, c, b, a)).nu - c for a in itertools.product(range(c), repeat=m - 1)))


# ----------------------------------------------------------- Groebner check

def chain_generators(m: int, d: int) -> list[Poly]:
    """``g_j = x_j^d - x_{j+1}^d - a_j`` in ``Z[x_1..x_m, a_1..a_{m-1}]``.

    Variables are ordered ``x_1 > ... > x_m > a_1 > ... > a_{m-1}``, so the
    ``a_j`` behave as coefficients under lex order on the ``x``.
    """
    n = 2 * m - 1
    return [
        Poly.var(j, n, d) - Poly.var(j + 1, n, d) - Poly.var(m + j, n)
        for j in range(m - 1)
    ]


def s_reduction_chain(m: int, d: int, i: int, j: int) -> list[Poly]:
    """``H^0 = S(g_i, g_j)`` and its successive reductions (0-based ``i < j``)."""
    G = chain_generators(m, d)
    return reduce_steps(s_polynomial(G[i], G[j]), G, prefer=[G[i], G[j]])


def groebner_selfcheck(m: int, d: int) -> bool:
    """True iff every s-polynomial of the chain generators reduces to 0."""
    if m < 2 or d < 1:
        raise DomainError("need m >= 2 and d >= 1")
    G = chain_generators(m, d)
    for i, j in itertools.combinations(range(m - 1), 2):
        h = s_polynomial(G[i], G[j])
        if remainder(h, G) or s_reduction_chain(m, d, i, j)[-1]:
            return False
    return True


# --------------------------------------------------------- exponential sums

def curve_points(spec: CurveSpec) -> list[tuple[int, ...]]:
    _check_guard(spec.q, spec.m)
    q, d, b = spec.q, spec.d, spec.b
    powers = [b * pow(x, d, q) % q for x in range(q)]
    return [
        x
        for x in itertools.product(range(q), repeat=spec.m)
        if all((powers[x[i]] - powers[x[i + 1]]) % q == spec.a[i] for i in range(spec.m - 1))
    ]


def curve_exponential_sum(spec: CurveSpec, r: Sequence[int], points: list | None = None) -> complex:
    """``sum_{y on the curve} e(-r.y/q)`` by enumeration."""
    if len(r) != spec.m:
        raise DomainError("r must have m entries")
    pts = curve_points(spec) if points is None else points
    q = spec.q
    if not any(x % q for x in r):
        return complex(len(pts))
    total = 0j
    for y in pts:
        phase = sum(ri * yi for ri, yi in zip(r, y)) % q
        total += cmath.exp(-2j * math.pi * phase / q)
    return total


def geometric_sum(r: int, n: int, q: int) -> complex:
    """``sum_{x=1}^{n} e(r x / q)``."""
    return sum(cmath.exp(2j * math.pi * ((r * x) % q) / q) for x in range(1, n + 1))


def geometric_sum_bound(r: int, n: int, q: int) -> float:
    """``min(n, q / (2|r|))`` with ``r`` reduced into ``[-q/2, q/2]``."""
    r = ((r + q // 2) % q) - q // 2
    if r == 0:
        return float(n)
    return min(float(n), q / (2 * abs(r)))
