import math
from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from sympy import isprime

from ndspacing.diophantine import (
    ApproximantLadder,
    ContinuedFraction,
    LadderSource,
    PowerSequence,
    RationalSource,
    build_ladder,
    cf_convergents,
    diophantine_ratio,
    factorize,
    is_squarefree,
    scaled_distance,
    square_decomposition,
    squarefree_ratio,
)
from ndspacing.errors import DomainError

from oracles import log_ratio, squarefree_u_v


# ---------------------------------------------------------- convergents

def test_golden_convergents():
    assert cf_convergents(ContinuedFraction.golden(5), 5) == [(1, 1), (2, 1), (3, 2), (5, 3), (8, 5)]


def test_sqrt2_convergents():
    assert cf_convergents(ContinuedFraction((1, 2, 2, 2, 2)), 5) == [(1, 1), (3, 2), (7, 5), (17, 12), (41, 29)]


def test_leading_zero_expansion():
    assert cf_convergents(ContinuedFraction((0, 3)), 2) == [(0, 1), (1, 3)]


def test_empty_expansion_rejected():
    with pytest.raises(DomainError, match="empty expansion"):
        cf_convergents([], 0)


def test_count_beyond_length_rejected():
    with pytest.raises(DomainError):
        cf_convergents(ContinuedFraction((1, 2)), 3)


@given(st.lists(st.integers(1, 50), min_size=2, max_size=25), st.integers(0, 5))
def test_convergent_determinant_and_spacing(tail, a0):
    conv = cf_convergents(ContinuedFraction((a0, *tail)))
    for n in range(1, len(conv)):
        (p0, q0), (p1, q1) = conv[n - 1], conv[n]
        assert p1 * q0 - p0 * q1 == (-1) ** (n - 1)
        assert abs(Fraction(p0, q0) - Fraction(p1, q1)) == Fraction(1, q0 * q1)
    assert all(math.gcd(p, q) == 1 for p, q in conv)


# ------------------------------------------------------ decompositions

@pytest.mark.parametrize("q,u,v", [(12, 3, 2), (112211, 11, 101), (104729, 104729, 1), (1, 1, 1), (72, 2, 6)])
def test_square_decomposition_examples(q, u, v):
    sd = square_decomposition(q)
    assert (sd.u, sd.v) == (u, v)


def test_square_decomposition_zero_rejected():
    with pytest.raises(DomainError):
        square_decomposition(0)


def test_simple_part_is_product_of_exponent_one_primes():
    # 2^3 * 3 * 5^2: u = 2*3, simple part = 3
    sd = square_decomposition(8 * 3 * 25)
    assert (sd.u, sd.v, sd.simple_part) == (6, 10, 3)


def test_square_decomposition_exhaustive_prefix():
    for q in range(1, 20001):
        sd = square_decomposition(q)
        assert sd.u * sd.v**2 == q
        assert (sd.u, sd.v) == squarefree_u_v(q)


@settings(max_examples=200)
@given(st.integers(1, 10**6))
def test_square_decomposition_property(q):
    sd = square_decomposition(q)
    assert sd.u * sd.v**2 == q
    assert is_squarefree(sd.u)


def test_factorize_large_prime_cofactor():
    p = 1_000_000_007
    assert factorize(6 * p) == {2: 1, 3: 1, p: 1}


# ---------------------------------------------------------------- ratios

def test_ratio_prime_is_one():
    assert squarefree_ratio(104729) == 1.0


def test_ratio_prime_cube_is_one_third():
    assert abs(squarefree_ratio(7**3) - 1 / 3) < 1e-12


def test_ratio_112211():
    expected = log_ratio(11, 112211)
    assert abs(squarefree_ratio(112211) - float(expected)) < 1e-9
    assert abs(squarefree_ratio(112211) - 0.206215) < 1e-6


# --------------------------------------------------------------- ladders

def _exact_tail_ok(ladder):
    alpha = ladder.alpha_prefix
    return all(abs(alpha - e.value) * e.q**e.k <= 1 for e in ladder.entries)


def test_raw_ladder_structure():
    lad = build_ladder(2, 1, [3, 4])
    assert [e.q for e in lad.entries] == [2, 8]
    assert lad.horizon[1] == 8**4
    assert lad.certify() and _exact_tail_ok(lad)
    # the entry at q = 8 is certified to order 4
    assert abs(lad.alpha_prefix - lad[1].value) <= Fraction(1, 8**4)


def test_prime_ladder_denominators_are_prime():
    lad = build_ladder(3, 1, [3, 4, 5], mode="prime_denominator")
    assert all(isprime(e.q) for e in lad.entries)
    assert all(diophantine_ratio(lad, j) == 1.0 for j in range(len(lad)))
    assert _exact_tail_ok(lad)


def test_square_rich_override():
    lad = build_ladder(2, 1, [3, 4, 5], mode="square_rich", square_parts={0: (3, 11)})
    assert lad[1].q == 363
    assert square_decomposition(lad[1].q).v == 11
    assert _exact_tail_ok(lad)


def test_square_rich_default_keeps_big_square():
    lad = build_ladder(2, 1, [3, 4, 5], mode="square_rich")
    for e in lad.entries[1:]:
        sd = square_decomposition(e.q)
        assert sd.v**3 >= e.q
        assert diophantine_ratio(lad, lad.entries.index(e)) <= 1 / 3 + 1e-12


def test_raw_power_ratio_is_one_third():
    lad = build_ladder(3, 1, [3, 4])
    assert abs(diophantine_ratio(lad, 1) - 1 / 3) < 1e-12


@pytest.mark.parametrize("ks", [[3, 3], [5, 4], []])
def test_k_sequence_must_increase(ks):
    with pytest.raises(DomainError):
        build_ladder(2, 1, ks)


def test_gcd_violation_rejected():
    with pytest.raises(DomainError):
        build_ladder(4, 2, [3, 4])


@settings(max_examples=25, deadline=None)
@given(
    st.sampled_from([2, 3, 5, 7, 10, 12]),
    st.integers(1, 11),
    st.sampled_from(["raw", "prime_denominator", "square_rich"]),
    st.lists(st.integers(0, 2), min_size=1, max_size=2),
)
def test_every_ladder_certifies(q0, b0, mode, steps):
    if math.gcd(b0, q0) != 1:
        b0 = 1
    ks = [3]
    for s in steps:
        ks.append(ks[-1] + 1 + s)
    lad = build_ladder(q0, b0, ks, mode=mode)
    assert lad.certify()
    assert _exact_tail_ok(lad)
    qs = [e.q for e in lad.entries]
    assert qs == sorted(set(qs))


def test_extend_keeps_prefix():
    lad = build_ladder(2, 1, [3, 4])
    longer = lad.extend([5])
    assert longer.entries[: len(lad)] == lad.entries
    assert longer.certify()


def test_text_round_trip():
    lad = build_ladder(2, 1, [3, 4, 5], mode="square_rich", square_parts={0: (3, 11)})
    text = lad.to_text()
    assert text.splitlines()[0] == "ladder v1 mode=square_rich"
    assert ApproximantLadder.from_text(text) == lad


def test_tampered_text_fails_certification():
    lines = build_ladder(2, 1, [3, 4]).to_text().splitlines()
    j, b, q, k, f = lines[2].split()
    lines[2] = " ".join([j, b, q, str(int(k) + 3), f])
    with pytest.raises(DomainError):
        ApproximantLadder.from_text("\n".join(lines))


# ------------------------------------------------------- scaled distance

def test_identical_sources_distance_zero():
    s = PowerSequence(2, RationalSource(3, 7))
    assert scaled_distance(s, s, 10) == 0


def test_formula_bound_example():
    # entry (1, 8, 4) against a limit within 8^-4: N * N^d * 8^-4 at N = 4, d = 2
    lad = build_ladder(2, 1, [3, 4])
    e = lad[1]
    assert (e.q, e.k) == (8, 4)
    bound = Fraction(4) ** 3 * Fraction(1, 8**4)
    assert bound == Fraction(1, 64)
    eps = scaled_distance(PowerSequence(2, RationalSource(e.b, e.q)), PowerSequence(2, LadderSource(lad, 1)), 4)
    assert eps <= bound


def test_distance_dominates_longer_prefix():
    lad = build_ladder(2, 1, [3, 4, 5])
    j = 1
    N = int(lad[j].q ** 0.8)
    conv = PowerSequence(2, RationalSource(lad[j].b, lad[j].q))
    bound = scaled_distance(conv, PowerSequence(2, LadderSource(lad, j)), N)
    for later in list(lad.entries[j + 1:]) + [None]:
        b, q = (later.b, later.q) if later else lad.horizon
        exact = scaled_distance(conv, PowerSequence(2, RationalSource(b, q)), N)
        assert exact <= bound


@settings(max_examples=60)
@given(st.integers(2, 60), st.integers(1, 59), st.integers(1, 59), st.integers(1, 3), st.integers(1, 12))
def test_rational_distance_is_zero_iff_sequences_agree(q, b1, b2, d, N):
    if math.gcd(b1, q) != 1 or math.gcd(b2, q) != 1:
        return
    s1, s2 = PowerSequence(d, RationalSource(b1, q)), PowerSequence(d, RationalSource(b2, q))
    agree = all((b1 - b2) * n**d % q == 0 for n in range(1, N + 1))
    assert (scaled_distance(s1, s2, N) == 0) == agree


@settings(max_examples=60)
@given(st.integers(2, 40), st.integers(1, 39), st.integers(1, 39), st.integers(1, 39), st.integers(1, 8))
def test_rational_distance_triangle(q, b1, b2, b3, N):
    bs = [b for b in (b1, b2, b3) if math.gcd(b, q) == 1]
    if len(bs) < 3:
        return
    s = [PowerSequence(2, RationalSource(b, q)) for b in bs]
    assert scaled_distance(s[0], s[2], N) <= scaled_distance(s[0], s[1], N) + scaled_distance(s[1], s[2], N)
