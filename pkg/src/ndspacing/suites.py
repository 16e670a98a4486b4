"""Invariant suites behind ``ndspacing verify``.

Each suite returns a list of :class:`Check`; a suite passes when every
check does.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass

from sympy import primerange

from .correlations import CorrelationRequest, Region, distinct_gap_counts, correlation, correlation_brute, star_sum_identity
from .diophantine import ContinuedFraction, RationalSource, cf_convergents
from .ffcurves import CurveSpec, groebner_selfcheck, nu, nu_brute_all, zero_sum_check


@dataclass(frozen=True)
class Check:
    name: str
    passed: bool
    detail: str = ""


def zero_sum_suite(cmax: int = 60) -> list[Check]:
    out = []
    for d, m in itertools.product((2, 3), (2, 3)):
        bad = [c for c in range(1, cmax + 1) if zero_sum_check(d, m, c) != 0]
        out.append(Check(f"zero-sum d={d} m={m} c<={cmax}", not bad, f"nonzero at c={bad}" if bad else ""))
    return out


def closed_form_suite(pmax: int = 199) -> list[Check]:
    bad = []
    for p in primerange(3, pmax + 1):
        if nu(CurveSpec(2, 2, p, 1, (0,))).nu != 2 * p - 1:
            bad.append((p, 0))
        bad += [(p, a) for a in range(1, p) if nu(CurveSpec(2, 2, p, 1, (a,))).nu != p - 1]
    return [Check(f"closed form d=2 m=2 p<={pmax}", not bad, str(bad[:5]) if bad else "")]


def groebner_suite(mmax: int = 5, dmax: int = 4) -> list[Check]:
    return [
        Check(f"groebner m={m} d={d}", groebner_selfcheck(m, d))
        for m in range(2, mmax + 1)
        for d in range(1, dmax + 1)
    ]


def oracle_suite() -> list[Check]:
    out = []
    for q, d, m in itertools.product((5, 8, 9, 12), (2, 3), (2, 3)):
        table = nu_brute_all(m, d, q, 1)
        bad = [a for a in itertools.product(range(q), repeat=m - 1) if nu(CurveSpec(m, d, q, 1, a)).nu != table[a]]
        out.append(Check(f"nu vs brute q={q} d={d} m={m}", not bad))
    for q, N, m in ((31, 12, 2), (31, 9, 3), (64, 14, 2)):
        req = CorrelationRequest(m, 2, RationalSource(3, q), N, Region.cube(-1, 1, m - 1))
        ok = correlation(req).value == correlation_brute(req).value
        out.append(Check(f"correlation vs brute q={q} N={N} m={m}", ok))
    return out


def identity_suite() -> list[Check]:
    out = []
    for m, d, b, q, N in ((2, 2, 1, 7, 3), (3, 2, 3, 11, 4), (2, 3, 2, 29, 9)):
        lhs, rhs = star_sum_identity(m, d, b, q, N, Region.cube(-1, 1, m - 1))
        out.append(Check(f"star identity q={q} N={N} m={m}", lhs == rhs, f"{lhs} vs {rhs}"))
    return out


def gaps_suite(nmax: int = 2000) -> list[Check]:
    out = []
    for name, cf in (("sqrt2", ContinuedFraction.sqrt2(30)), ("golden", ContinuedFraction.golden(40))):
        b, q = cf_convergents(cf)[-1]
        worst = max(distinct_gap_counts(1, RationalSource(b, q), nmax))
        out.append(Check(f"three gaps {name}", worst <= 3, f"max distinct = {worst}"))
    return out


SUITES = {
    "zero-sum": zero_sum_suite,
    "closed-form": closed_form_suite,
    "groebner": groebner_suite,
    "oracle": oracle_suite,
    "identity": identity_suite,
    "gaps": gaps_suite,
}


def run_suite(name: str, cmax: int = 60) -> list[Check]:
    if name == "all":
        return [c for n in SUITES for c in run_suite(n, cmax)]
    if name == "zero-sum":
        return zero_sum_suite(cmax)
    return SUITES[name]()
