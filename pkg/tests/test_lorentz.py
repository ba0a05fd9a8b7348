import math
import random
from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

from apcharge import charge_core as cc
from apcharge import lorentz as lz
from apcharge.errors import InvalidParameter

F = Fraction
P = lz.LorentzParams


def rel_close(a, b, rel=1e-12):
    return abs(a - b) <= rel * max(1.0, abs(a), abs(b))


@st.composite
def step_distributions(draw, max_steps=6):
    n = draw(st.integers(0, max_steps))
    ts = sorted(set(draw(st.lists(st.floats(0.01, 20), min_size=n, max_size=n))))
    cs = sorted(draw(st.lists(st.floats(0.001, 5), min_size=len(ts), max_size=len(ts))), reverse=True)
    return cc.StepDistribution(tuple(ts), tuple(cs))


exponents = st.sampled_from([0.5, 0.75, 1.0, 1.5, 2.0, 3.0, 4.5])


def test_rearrange_examples():
    assert lz.rearrange_seq([1, 3, 2]).values == (3, 2, 1)
    assert lz.rearrange_seq([0, 0]).values == (0, 0)
    assert lz.rearrange_seq([-2 + 0j, 1j]).values == (2, 1)


def test_seq_norm_examples():
    for p, q in [(1, 1), (2, 3), (0.5, math.inf)]:
        assert lz.seq_lorentz_norm([1, 0, 0], P(p, q)) == pytest.approx(1, abs=1e-15)
    assert lz.seq_lorentz_norm([1, 1], P(2, 2)) == pytest.approx(math.sqrt(2), rel=1e-15)
    assert lz.seq_lorentz_norm([3, 2, 1], P(1, math.inf)) == 4


def test_params_validation():
    for bad in [(0, 1), (-1, 2), (2, 0), (2, -1)]:
        with pytest.raises(InvalidParameter):
            P(*bad)
    assert P(2).p_conjugate == 2
    assert lz.conjugate_exponent(1) == math.inf
    assert lz.conjugate_exponent(1.5) == pytest.approx(3)


def test_distribution_norm_examples():
    d = cc.StepDistribution((1,), (F(1, 3),))
    assert lz.lorentz_norm_from_distribution(d, P(2, 1)) == pytest.approx(2 / math.sqrt(3), rel=1e-14)
    for p in (1, 2, 3.5):
        assert lz.lorentz_norm_from_distribution(d, P(p, p)) == pytest.approx((1 / 3) ** (1 / p), rel=1e-14)
    assert lz.lorentz_norm_from_distribution(cc.StepDistribution((), ()), P(2, 1)) == 0


def test_indicator_closed_form():
    for m in (0.2, 1.0, 3.0):
        for p, q in [(2, 1), (1.5, 3), (4, 2)]:
            d = cc.StepDistribution((1,), (m,))
            assert lz.lorentz_norm_from_distribution(d, P(p, q)) == pytest.approx((p / q) ** (1 / q) * m ** (1 / p), rel=1e-13)


def test_rearrangement_examples():
    d = cc.StepDistribution((1, 2), (F(3, 4), F(1, 2)))
    fs = lz.rearrangement_from_distribution(d)
    assert fs.breakpoints == (F(1, 2), F(3, 4)) and fs.values == (2, 1)
    single = lz.rearrangement_from_distribution(cc.StepDistribution((5,), (F(1, 3),)))
    assert single.breakpoints == (F(1, 3),) and single.values == (5,)
    assert len(lz.rearrangement_from_distribution(cc.StepDistribution((), ()))) == 0


def _lebesgue_distribution_brute(fstar: cc.StepDistribution, s):
    """lambda{t : f*(t) > s} by summing piece lengths."""
    return sum((b - a) for a, b, v in fstar.pieces() if v > s)


@given(step_distributions())
def test_generalized_inverse(d):
    fs = lz.rearrangement_from_distribution(d)
    assert lz.lebesgue_distribution(fs) == d
    for s in [0.0] + [t * 0.999 for t in d.breakpoints] + [t * 1.001 for t in d.breakpoints]:
        assert _lebesgue_distribution_brute(fs, s) == pytest.approx(float(d(s)), abs=1e-12)


@given(step_distributions(), exponents, st.one_of(exponents, st.just(math.inf)))
def test_two_routes_agree(d, p, q):
    a = lz.lorentz_norm_from_distribution(d, P(p, q))
    b = lz.lorentz_norm_from_rearrangement(lz.rearrangement_from_distribution(d), P(p, q))
    assert rel_close(a, b)


@given(step_distributions(), exponents, exponents)
def test_change_of_variables(d, p, q):
    assert rel_close(lz.lorentz_norm_from_distribution(d, P(p, q)), lz.lorentz_norm_via_power(d, P(p, q)))


@given(step_distributions(), step_distributions(), exponents, exponents)
def test_gap_routes_agree(d1, d2, p, q):
    a = lz.lorentz_gap(d1, d2, P(p, q))
    b = lz.lorentz_gap_via_power(d1, d2, P(p, q))
    assert abs(a - b) <= 1e-12 * max(1.0, a, b)


def test_gap_brute_force():
    rng = random.Random(4)
    for _ in range(50):
        d1 = cc.StepDistribution(tuple(sorted(rng.sample(range(1, 20), 3))), (3, 2, 1))
        d2 = cc.StepDistribution(tuple(sorted(rng.sample(range(1, 20), 2))), (2.5, 0.5))
        p, q = 2.0, 1.5
        r = q / p
        n = 200000
        h = 20 / n
        brute = math.fsum(abs(float(d1((k + .5) * h)) ** r - float(d2((k + .5) * h)) ** r) * ((k + .5) * h) ** (q - 1) * h
                          for k in range(n))
        assert lz.lorentz_gap(d1, d2, P(p, q)) == pytest.approx(brute, rel=1e-4)


@settings(max_examples=200)
@given(st.lists(st.floats(-10, 10), min_size=1, max_size=12), st.sampled_from([1.0, 1.5, 2.0, 3.0, 6.0]),
       st.data())
def test_norm_nesting(a, p, data):
    """For q <= r <= p the l^{p,r} norm is dominated by the l^{p,q} norm."""
    qs = [x for x in (0.5, 1.0, 1.5, 2.0, 3.0, 6.0) if x <= p] + [math.inf]
    q = data.draw(st.sampled_from(qs[:-1]))
    r = data.draw(st.sampled_from([x for x in qs if x >= q]))
    assert lz.seq_lorentz_norm(a, P(p, r)) <= lz.seq_lorentz_norm(a, P(p, q)) * (1 + 1e-12) + 1e-300


def test_norm_nesting_needs_p_at_least_r():
    # With r > p the discrete weights n^(r/p - 1) grow and the order can reverse.
    a = [1, 1]
    assert lz.seq_lorentz_norm(a, P(0.5, math.inf)) > lz.seq_lorentz_norm(a, P(0.5, 1))


@given(st.lists(st.complex_numbers(max_magnitude=50, allow_nan=False, allow_infinity=False), max_size=10),
       st.floats(-5, 5), exponents, st.one_of(exponents, st.just(math.inf)))
def test_seq_homogeneity(a, lam, p, q):
    lhs = lz.seq_lorentz_norm([lam * x for x in a], P(p, q))
    assert rel_close(lhs, abs(lam) * lz.seq_lorentz_norm(a, P(p, q)), 1e-11)


@given(step_distributions(), st.floats(0.01, 100), exponents, st.one_of(exponents, st.just(math.inf)))
def test_distribution_homogeneity(d, lam, p, q):
    scaled = cc.StepDistribution(tuple(lam * t for t in d.breakpoints), d.values)
    assert rel_close(lz.lorentz_norm_from_distribution(scaled, P(p, q)),
                     lam * lz.lorentz_norm_from_distribution(d, P(p, q)), 1e-11)


@given(st.lists(st.floats(0, 10), min_size=1, max_size=10), st.sampled_from([0.5, 1.0, 2.0, 3.0]))
def test_seq_norm_equals_lp_when_q_equals_p(a, p):
    expected = math.fsum(x ** p for x in a) ** (1 / p)
    assert rel_close(lz.seq_lorentz_norm(a, P(p, p)), expected, 1e-12)


def test_seq_norm_matches_counting_measure_distribution():
    rng = random.Random(2)
    for _ in range(100):
        a = [rng.choice([0, 1, 2, 3, 5]) for _ in range(rng.randint(1, 8))]
        mass = {}
        for x in a:
            if x:
                mass[x] = mass.get(x, 0) + 1
        levels = sorted(mass)
        d = cc.StepDistribution(tuple(levels), tuple(sum(mass[v] for v in levels[i:]) for i in range(len(levels))))
        for p, q in [(2, 2), (1, 1), (3, math.inf)]:
            # for q = p (and for the sup) the counting-measure Lorentz norm coincides with the sequence norm
            assert lz.seq_lorentz_norm(a, P(p, q)) == pytest.approx(lz.lorentz_norm_from_distribution(d, P(p, q)), rel=1e-12)
