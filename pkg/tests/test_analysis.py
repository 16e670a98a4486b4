import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from ndspacing.analysis import (
    FAILS,
    HOLDS,
    UNDETERMINED,
    DivergenceConfig,
    ExperimentRecord,
    T2Config,
    classify_alpha,
    classify_ratios,
    default_thresholds,
    divergence_bound,
    divergence_lower_bound,
    floor_power,
    ladder_divergence_bounds,
    records_from_csv,
    records_to_csv,
    sample_units,
    schedule_Nj,
    t2_experiment,
)
from ndspacing.correlations import Region
from ndspacing.diophantine import build_ladder
from ndspacing.errors import DomainError

from oracles import floor_root_power

F = Fraction


@pytest.fixture(scope="module")
def prime_ladder():
    return build_ladder(3, 1, [3, 4], mode="prime_denominator")


@pytest.fixture(scope="module")
def square_ladder():
    return build_ladder(2, 1, [3, 4, 5], mode="square_rich", square_parts={0: (3, 11)})


# --------------------------------------------------------------- schedule

def test_floor_power_example():
    assert floor_power(2**10, F(7, 8)) == 430 == floor_root_power(2**10, 7, 8)


@given(st.integers(2, 10**12), st.integers(1, 12), st.integers(1, 12))
def test_floor_power_matches_high_precision(q, num, den):
    assert floor_power(q, F(num, den)) == floor_root_power(q, num, den)


def test_single_order_schedule(prime_ladder):
    sched = schedule_Nj(prime_ladder, {2: 0})
    assert [s.N for s in sched] == [floor_root_power(e.q, 7, 8) for e in prime_ladder.entries]


def test_schedule_transitions():
    lad = build_ladder(2, 1, [3, 4, 5, 6])
    sched = schedule_Nj(lad, {2: 0, 3: 2, 5: 3})
    assert [s.k for s in sched] == [2, 2, 3, 5]
    exps = [1 - F(1, 4 * s.k) for s in sched]
    assert exps == sorted(exps)
    ratios = [math.log(s.N) / math.log(s.q) for s in sched if s.N > 1]
    assert ratios == sorted(ratios)


def test_empty_thresholds_rejected(prime_ladder):
    with pytest.raises(DomainError, match="empty threshold map"):
        schedule_Nj(prime_ladder, {})


def test_decreasing_thresholds_rejected(prime_ladder):
    with pytest.raises(DomainError):
        schedule_Nj(prime_ladder, {2: 1, 3: 0})


def test_default_thresholds(prime_ladder, square_ladder):
    assert default_thresholds(prime_ladder) == {k: 0 for k in range(2, 9)}
    # ratios 1.0, 0.186, 0.1999: only j = 0 qualifies
    assert default_thresholds(square_ladder) == {k: 0 for k in range(2, 9)}


# -------------------------------------------------------- classification

def test_prime_ladder_holds(prime_ladder):
    v = classify_alpha(prime_ladder, [2], 10**12)
    assert v.classification == HOLDS
    assert all(r == 1.0 for _, _, r in v.ratios)


def test_square_rich_fails(square_ladder):
    v = classify_alpha(square_ladder, [2], 10**12)
    assert v.classification == FAILS
    assert all(r < 1 / 3 + 1e-12 for _, q, r in v.ratios if q > 2)


def test_raw_ladder_fails():
    lad = build_ladder(3, 1, [3, 4])
    v = classify_alpha(lad, [2], 10**12)
    assert abs(v.ratios[1][2] - 1 / 3) < 1e-12
    assert v.classification == FAILS


@pytest.mark.parametrize("which", ["prime", "square"])
def test_verdict_independent_of_d_list(which, prime_ladder, square_ladder):
    lad = prime_ladder if which == "prime" else square_ladder
    a = classify_alpha(lad, [2], 10**12)
    b = classify_alpha(lad, [2, 3, 4], 10**12)
    assert a.classification == b.classification and a.ratios == b.ratios
    assert {t.d for t in b.traces} == {2, 3, 4}


def test_budget_excluding_everything(prime_ladder):
    v = classify_alpha(prime_ladder, [2], 2)
    assert v.classification == UNDETERMINED and v.traces == ()


@given(st.lists(st.floats(0, 1), max_size=12))
def test_classification_pure_function_of_ratios(ratios):
    v = classify_ratios(ratios)
    tail = ratios[len(ratios) // 2:]
    if not ratios:
        assert v == UNDETERMINED
    elif all(r >= 0.99 for r in tail):
        assert v == HOLDS
    elif any(r < 0.9 for r in tail):
        assert v == FAILS
    else:
        assert v == UNDETERMINED


def test_trace_values_are_recomputable(square_ladder):
    v = classify_alpha(square_ladder, [2], 10**12)
    from ndspacing.correlations import CorrelationRequest, correlation
    from ndspacing.diophantine import RationalSource

    for t in v.traces:
        if t.value is not None:
            e = square_ladder[t.j]
            r = CorrelationRequest(2, t.d, RationalSource(e.b, e.q), t.N, Region.cube(-1, 1, 1))
            assert correlation(r).value == t.value


# ----------------------------------------------------------- divergence

def test_divergence_q44():
    cfg = DivergenceConfig(11, 2, 2, 2, 50)
    assert cfg.q == 44
    assert 22**2 % 44 == 0 and 44**2 % 44 == 0
    res = divergence_lower_bound(cfg)
    assert res.M == 2 and res.bound == F(1, 25)
    assert res.passed and res.R >= res.bound


def test_divergence_q112211():
    N = floor_root_power(112211, 11, 10)
    cfg = DivergenceConfig(11, 101, 3, 2, N)
    res = divergence_lower_bound(cfg)
    assert res.passed
    # q/N < 1, so only equal residues are within the window: R = (sum c_r^2 - N) / N
    counts = np.bincount([pow(n, 3, 112211) for n in range(1, N + 1)], minlength=112211)
    assert res.R == F(int((counts.astype(np.int64) ** 2).sum()) - N, N)
    # the measured ratio to the volume is about 2.7
    assert 2.7 < res.R / 2 < 2.72


def test_bound_zero_when_M_below_m():
    cfg = DivergenceConfig(7, 5, 2, 6, 176)  # q = 175, M = floor(176 / 35) = 5 < m
    bound, M = divergence_bound(cfg)
    assert (M, bound) == (5, 0)
    assert divergence_lower_bound(cfg).passed


def test_bound_is_falling_factorial():
    cfg = DivergenceConfig(3, 11, 2, 4, 400, region=Region.cube(-1, 1, 3))
    assert divergence_bound(cfg) == (F(12 * 11 * 10 * 9, 400), 12)


def test_bound_vacuous():
    with pytest.raises(DomainError, match="bound vacuous"):
        divergence_bound(DivergenceConfig(11, 2, 2, 2, 50, region=Region.parse("1/2,1", 1)))


@settings(max_examples=30, deadline=None)
@given(st.sampled_from([1, 2, 3, 5, 6, 7]), st.integers(2, 9), st.integers(2, 4), st.integers(2, 3), st.integers(1, 40), st.integers(1, 30))
def test_divergence_bound_always_holds(u, v, d, m, extra, b):
    q = u * v * v
    if math.gcd(b, q) != 1:
        b = 1
    cfg = DivergenceConfig(u, v, d, m, q + extra, b)
    res = divergence_lower_bound(cfg)
    assert res.R >= res.bound


def test_square_rich_ladder_bound_exceeds_volume(square_ladder):
    m = 6
    bounds = ladder_divergence_bounds(square_ladder, m)
    first = bounds[0]
    assert (first.q, first.u, first.v) == (363, 3, 11)
    assert m > 1 + 2 / first.delta
    assert first.bound > 10 * 2 ** (m - 1)
    for lb in bounds:
        assert float(lb.bound) >= lb.q ** ((lb.delta / 2) * (m - 1) - 1)
    growth = [float(lb.bound) for lb in bounds]
    assert growth == sorted(growth)


def test_ladder_bound_with_correlation(square_ladder):
    lb = ladder_divergence_bounds(square_ladder, 4, compute_R=True)[0]
    assert lb.R is not None and lb.R >= lb.bound > 10 * 8


# ------------------------------------------------------------------ T2

def test_window_enforced():
    with pytest.raises(DomainError):
        T2Config(2, 2, (101,), F(3, 4))
    with pytest.raises(DomainError):
        T2Config(2, 2, (101,), F("0.97"))
    with pytest.raises(DomainError):
        T2Config(2, 2, (101,), F("0.85"), delta0=F(1, 8))


def test_squarefree_gate():
    with pytest.raises(DomainError):
        T2Config(2, 2, (11 * 101**2,), F("0.85"))


def test_sampled_units_are_units_and_seeded():
    a = sample_units(1000, 6, 7)
    assert a == sample_units(1000, 6, 7)
    assert all(math.gcd(b, 1000) == 1 for b in a) and len(set(a)) == 6
    assert a != sample_units(1000, 6, 8)


def test_t2_deterministic_and_sorted():
    cfg = T2Config(2, 2, (10007, 1009), F("0.85"), samples=3, seed=11)
    r1, r2 = t2_experiment(cfg), t2_experiment(cfg)
    assert r1 == r2
    assert [(r.q, r.b) for r in r1] == sorted((r.q, r.b) for r in r1)
    assert all(r.deviation == abs(r.value - 2) for r in r1)


def test_t2_parallel_matches_serial():
    cfg = T2Config(2, 3, (10007, 1009), F("0.85"), samples=3, seed=3)
    assert t2_experiment(cfg, workers=2) == t2_experiment(cfg, workers=1)


def test_t2_zero_volume_region():
    cfg = T2Config(2, 2, (10007,), F("0.85"), region=Region.parse("1/2,1/2", 1), samples=2)
    assert all(r.value == 0 for r in t2_experiment(cfg))


def test_record_round_trips():
    cfg = T2Config(3, 2, (1009,), F("0.9"), samples=2, seed=5)
    recs = t2_experiment(cfg)
    for r in recs:
        assert ExperimentRecord.from_json(r.to_json()) == r
    assert records_from_csv(records_to_csv(recs)) == recs


def test_tampered_record_rejected():
    rec = t2_experiment(T2Config(2, 2, (1009,), F("0.85"), samples=1))[0]
    line = rec.to_json().replace('"deviation": "', '"deviation": "1')
    with pytest.raises((DomainError, ValueError)):
        ExperimentRecord.from_json(line)
