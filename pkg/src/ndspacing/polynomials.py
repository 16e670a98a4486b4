"""Sparse multivariate polynomials over the integers, lex order.

Just enough to form s-polynomials and divide by a set of monic-led
generators.  Monomials are exponent tuples; Python's tuple comparison is
exactly the lexicographic order with the first variable largest.
"""

from __future__ import annotations

from typing import Iterable, Mapping


class Poly:
    __slots__ = ("terms", "nvars")

    def __init__(self, terms: Mapping[tuple[int, ...], int], nvars: int):
        self.nvars = nvars
        self.terms = {m: c for m, c in terms.items() if c}

    @classmethod
    def monomial(cls, exps: Iterable[int], coeff: int = 1) -> "Poly":
        exps = tuple(exps)
        return cls({exps: coeff}, len(exps))

    @classmethod
    def var(cls, i: int, nvars: int, power: int = 1) -> "Poly":
        e = [0] * nvars
        e[i] = power
        return cls.monomial(e)

    def __bool__(self) -> bool:
        return bool(self.terms)

    def __eq__(self, other) -> bool:
        return isinstance(other, Poly) and self.terms == other.terms

    def __add__(self, other: "Poly") -> "Poly":
        out = dict(self.terms)
        for m, c in other.terms.items():
            out[m] = out.get(m, 0) + c
        return Poly(out, self.nvars)

    def __neg__(self) -> "Poly":
        return Poly({m: -c for m, c in self.terms.items()}, self.nvars)

    def __sub__(self, other: "Poly") -> "Poly":
        return self + (-other)

    def __mul__(self, other: "Poly | int") -> "Poly":
        if isinstance(other, int):
            return Poly({m: c * other for m, c in self.terms.items()}, self.nvars)
        out: dict[tuple[int, ...], int] = {}
        for m1, c1 in self.terms.items():
            for m2, c2 in other.terms.items():
                m = tuple(a + b for a, b in zip(m1, m2))
                out[m] = out.get(m, 0) + c1 * c2
        return Poly(out, self.nvars)

    __rmul__ = __mul__

    def leading(self) -> tuple[tuple[int, ...], int]:
        m = max(self.terms)
        return m, self.terms[m]

    def __repr__(self) -> str:
        if not self.terms:
            return "0"
        parts = []
        for m in sorted(self.terms, reverse=True):
            mono = "*".join(f"v{i}^{e}" if e > 1 else f"v{i}" for i, e in enumerate(m) if e)
            parts.append(f"{self.terms[m]}" + (f"*{mono}" if mono else ""))
        return " + ".join(parts)


def _divides(a: tuple[int, ...], b: tuple[int, ...]) -> bool:
    return all(x <= y for x, y in zip(a, b))


def s_polynomial(f: Poly, g: Poly) -> Poly:
    """``(L/LT(f)) f - (L/LT(g)) g`` with ``L = lcm`` of the leading monomials.

    Leading coefficients must be +-1 so everything stays integral.
    """
    mf, cf = f.leading()
    mg, cg = g.leading()
    lcm = tuple(max(a, b) for a, b in zip(mf, mg))
    uf = Poly.monomial(tuple(l - a for l, a in zip(lcm, mf)), cg)
    ug = Poly.monomial(tuple(l - a for l, a in zip(lcm, mg)), cf)
    return uf * f - ug * g


def reduce_steps(h: Poly, basis: list[Poly], prefer: list[Poly] = ()) -> list[Poly]:
    """Division of ``h`` by ``basis`` keeping only leading-term cancellations.

    Returns the chain ``H^0, H^1, ...``; each step cancels the current
    leading term with a multiple of a basis element whose leading monomial
    divides it, trying ``prefer`` first.  A leading term nothing divides
    ends the chain.
    """
    chain = [h]
    cur = h
    order = list(prefer) + [g for g in basis if all(g is not p for p in prefer)]
    while cur:
        m, c = cur.leading()
        for g in order:
            mg, cg = g.leading()
            if _divides(mg, m) and c % cg == 0:
                quo = Poly.monomial(tuple(a - b for a, b in zip(m, mg)), c // cg)
                cur = cur - quo * g
                chain.append(cur)
                break
        else:
            break
    return chain


def remainder(h: Poly, basis: list[Poly]) -> Poly:
    """Full multivariate division remainder of ``h`` by ``basis``."""
    rem = Poly({}, h.nvars)
    cur = h
    while cur:
        m, c = cur.leading()
        for g in basis:
            mg, cg = g.leading()
            if _divides(mg, m) and c % cg == 0:
                cur = cur - Poly.monomial(tuple(a - b for a, b in zip(m, mg)), c // cg) * g
                break
        else:
            lead = Poly({m: c}, h.nvars)
            rem = rem + lead
            cur = cur - lead
    return rem
