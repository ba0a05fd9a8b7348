import math
import random
from fractions import Fraction

import pytest

from apcharge import charge_core as cc
from apcharge import tm_spaces as tm
from apcharge.errors import HorizonTooSmall, NotCauchy, NotCauchyL1, NotCauchyLorentz
from apcharge.lorentz import LorentzParams

F = Fraction


def prefixes(mu, horizon=32):
    return tm.SimpleFunctionSequence(lambda n: cc.indicator(mu.field, cc.finite(*range(1, n + 1))), mu, horizon)


def test_is_cauchy_prefix_example(ex_charge):
    diag = tm.is_cauchy(prefixes(ex_charge), 0.1, 2.0 ** -16)
    assert diag.residual == pytest.approx(math.fsum(2.0 ** -k for k in range(17, 33)), rel=1e-15)
    assert diag.residual == pytest.approx(1.526e-5, rel=1e-3)
    assert diag.converged and diag.indices_used == (16, 32)


def test_is_cauchy_constant_and_alternating(ex_charge):
    f = cc.indicator(ex_charge.field, cc.finite(1, 2), 3)
    assert tm.is_cauchy(tm.SimpleFunctionSequence.constant(f, ex_charge), 0.1).residual == 0
    mu = cc.Charge.power_set({0: 0.3, 1: 0.3})
    alt = tm.SimpleFunctionSequence(lambda n: cc.indicator(mu.field, cc.finite(n % 2)), mu, 10)
    diag = tm.is_cauchy(alt, 0.1)
    assert diag.residual == pytest.approx(0.6) and not diag.converged
    # the example's single-atom reading: mass 0.3 on each disagreeing atom
    assert mu.measure(cc.finite(0)) == 0.3


def test_horizon_too_small(ex_charge):
    with pytest.raises(HorizonTooSmall):
        tm.is_cauchy(prefixes(ex_charge, 3), 0.1)


def test_converges_to_examples(ex_charge):
    seq = prefixes(ex_charge)
    diag = tm.converges_to(seq, cc.indicator(ex_charge.field, cc.cofinite()), 0.1)
    assert diag.residual >= 4 and not diag.converged
    const = tm.SimpleFunctionSequence.constant(cc.indicator(ex_charge.field, cc.finite(1)), ex_charge)
    assert tm.converges_to(const, const[1], 0.1).residual == 0
    ramp = tm.SimpleFunctionSequence(lambda n: cc.indicator(ex_charge.field, cc.finite(1), 1 - F(1, 2 ** n)),
                                     ex_charge, 8)
    assert tm.converges_to(ramp, cc.indicator(ex_charge.field, cc.finite(1)), 0.1).converged
    assert tm.converges_to(ramp.with_horizon(4), cc.indicator(ex_charge.field, cc.finite(1)), 0.1).converged
    assert not tm.converges_to(ramp.with_horizon(4), cc.indicator(ex_charge.field, cc.finite(1)), 0.05).converged
    assert tm.converges_to(ramp.with_horizon(5), cc.indicator(ex_charge.field, cc.finite(1)), 0.05).converged


def test_tmdot_norm_examples(ex_charge):
    diag = tm.tmdot_norm(prefixes(ex_charge))
    assert diag.estimate == pytest.approx(1 - 2.0 ** -32, abs=1e-15)
    zero = tm.SimpleFunctionSequence.constant(cc.SimpleFunction.zero(ex_charge.field), ex_charge)
    assert tm.tmdot_norm(zero).estimate == 0
    f = cc.SimpleFunction(ex_charge.field, ((2, cc.finite(1)), (1, cc.finite(2))))
    assert tm.tmdot_norm(tm.SimpleFunctionSequence.constant(f, ex_charge)).estimate == 0.75


def test_order_examples(ex_charge):
    assert tm.order_geq_zero(prefixes(ex_charge))
    mu = cc.Charge.power_set({1: 0.3, 2: 0.7})
    neg = tm.SimpleFunctionSequence.constant(-cc.indicator(mu.field, cc.finite(1)), mu)
    assert not tm.order_geq_zero(neg)
    shrinking = tm.SimpleFunctionSequence(lambda n: cc.indicator(mu.field, mu.field.universe(), -F(1, 2 ** n)), mu)
    assert tm.order_geq_zero(shrinking)


def test_integrate_sequence_examples(ex_charge):
    seq = prefixes(ex_charge, 64)
    assert tm.integrate_sequence(seq).estimate == pytest.approx(1, abs=1e-15)
    zero = tm.SimpleFunctionSequence.constant(cc.SimpleFunction.zero(ex_charge.field), ex_charge)
    assert tm.integrate_sequence(zero).estimate == 0
    one = tm.SimpleFunctionSequence.constant(cc.indicator(ex_charge.field, cc.finite(1)), ex_charge)
    assert tm.integrate_sequence(one).estimate == 0.5


def test_integrate_rejects_non_cauchy(ex_charge):
    # spikes n * I_{n}: Cauchy in charge but the L1 gap stays large
    spikes = tm.SimpleFunctionSequence(lambda n: cc.indicator(ex_charge.field, cc.finite(n), 2 ** n), ex_charge, 32)
    with pytest.raises(NotCauchyL1):
        tm.integrate_sequence(spikes, 1e-3)
    with pytest.raises(NotCauchy):
        tm.integrate_sequence(prefixes(ex_charge, 8))


def test_ldot_p_examples(ex_charge):
    seq = prefixes(ex_charge, 64)
    assert tm.ldot_p_norm(seq, 1).estimate == pytest.approx(1, abs=1e-15)
    assert tm.ldot_p_norm(seq, 2).estimate == pytest.approx(1, abs=1e-15)
    three = tm.SimpleFunctionSequence.constant(cc.indicator(ex_charge.field, cc.cofinite(), 3), ex_charge)
    assert tm.ldot_p_norm(three, math.inf).estimate == 3


def test_ldot_pq_examples(ex_charge):
    seq = prefixes(ex_charge, 64)
    assert tm.ldot_pq_norm(seq, LorentzParams(2, 1)).estimate == pytest.approx(2 * (1 - 2.0 ** -64) ** .5, abs=1e-15)
    zero = tm.SimpleFunctionSequence.constant(cc.SimpleFunction.zero(ex_charge.field), ex_charge)
    assert tm.ldot_pq_norm(zero, LorentzParams(2, 1)).estimate == 0


def test_ldot_pq_rejects_mass_escaping_to_large_values(ex_charge):
    """2^(2n/p) I_{n}: charge of the support vanishes, the L^{p,q} mass does not."""
    p = 2.0
    seq = tm.SimpleFunctionSequence(lambda n: cc.indicator(ex_charge.field, cc.finite(n), 2.0 ** (2 * n / p)),
                                    ex_charge, 32)
    assert tm.is_cauchy(seq, 1e-6, 1e-4).converged
    with pytest.raises(NotCauchyLorentz):
        tm.ldot_pq_norm(seq, LorentzParams(p, 1), 1e-4)
    with pytest.raises(NotCauchyLorentz):
        tm.ldot_pq_norm(seq, LorentzParams(p, math.inf), 1e-4)


def test_ldot_pq_rejects_refinements_of_power_set():
    """Finite power-set analogue: atoms of charge 2^-k carrying height 2^(k/p)."""
    K, p = 40, 2.0
    mu = cc.Charge.power_set({k: F(1, 2 ** k) for k in range(1, K + 1)})
    seq = tm.SimpleFunctionSequence(lambda n: cc.indicator(mu.field, cc.finite(n), 2.0 ** (2 * n / p)), mu, K)
    with pytest.raises(NotCauchyLorentz):
        tm.ldot_pq_norm(seq, LorentzParams(p, 2), 1e-4)


def _perturbed(base: tm.SimpleFunctionSequence, rng: random.Random) -> tm.SimpleFunctionSequence:
    """Change values on the single point 4n (charge 2^-4n <= 2^-n), by a bounded amount."""
    bumps = {n: rng.uniform(-2, 2) for n in range(1, base.horizon + 1)}

    def gen(n):
        f = base[n]
        return f + cc.indicator(f.field, cc.finite(4 * n), bumps[n])
    return tm.SimpleFunctionSequence(gen, base.charge, base.horizon)


def _random_base(mu, rng, horizon=64):
    vals = [rng.uniform(-3, 3) for _ in range(6)]
    tail = rng.choice([0.0, rng.uniform(-3, 3)])
    grow = rng.uniform(-3, 3)

    def gen(n):
        terms = [(v, cc.finite(k + 1)) for k, v in enumerate(vals)]
        terms.append((grow, cc.finite(*range(7, 8 + n))))
        terms.append((tail, cc.cofinite(*range(1, 8 + n))))
        return cc.SimpleFunction(mu.field, tuple(terms))
    return tm.SimpleFunctionSequence(gen, mu, horizon)


@pytest.mark.parametrize("q", [1.0, 2.0, math.inf])
def test_representative_independence(ex_charge, q):
    rng = random.Random(21)
    for _ in range(10):
        base = _random_base(ex_charge, rng)
        other = _perturbed(base, rng)
        assert tm.equivalent(base, other, 1e-6)
        params = LorentzParams(rng.choice([1.5, 2.0, 3.0]), q)
        a, b = tm.ldot_pq_norm(base, params, 1e-6), tm.ldot_pq_norm(other, params, 1e-6)
        assert abs(a.estimate - b.estimate) <= a.residual + b.residual + 1e-9 + _perturbation_bound(base, params)


def _perturbation_bound(seq, params):
    """Lorentz mass of a bump of height <= 2 on a set of charge 2^-4N, with room to spare."""
    N = seq.horizon
    q = params.q
    scale = 1.0 if math.isinf(q) else (params.p / q) ** (1 / q)
    return 8 * scale * 2.0 ** (-4 * N / params.p)


def test_lattice_and_linear_closure(ex_charge):
    rng = random.Random(8)
    tol = 1e-6
    for _ in range(10):
        f, g = _random_base(ex_charge, rng), _random_base(ex_charge, rng)
        assert tm.is_cauchy(f, tol, tol).converged and tm.is_cauchy(g, tol, tol).converged
        for op in ("max", "min", "+"):
            assert tm.is_cauchy(f.combine(g, op), 2 * tol, 2 * tol).converged
        a, b = rng.uniform(-2, 2), rng.uniform(-2, 2)
        lin = tm.SimpleFunctionSequence(lambda n: a * f[n] + b * g[n], ex_charge, f.horizon)
        assert tm.is_cauchy(lin, 2 * tol * max(1, abs(a) + abs(b)), 2 * tol).converged


def test_integration_is_linear(ex_charge):
    rng = random.Random(12)
    for _ in range(20):
        f, g = _random_base(ex_charge, rng), _random_base(ex_charge, rng)
        a, b = rng.uniform(-2, 2), rng.uniform(-2, 2)
        lin = tm.SimpleFunctionSequence(lambda n: a * f[n] + b * g[n], ex_charge, f.horizon)
        lhs = tm.integrate_sequence(lin, 1e-6).estimate
        rhs = a * tm.integrate_sequence(f, 1e-6).estimate + b * tm.integrate_sequence(g, 1e-6).estimate
        assert lhs == pytest.approx(rhs, abs=1e-12)


def test_non_completeness_witness(ex_charge):
    """Cauchy in charge, yet no {0,1}-valued candidate on prefixes or co-finite sets is a limit."""
    seq = prefixes(ex_charge, 32)
    tol = 2.0 ** -16
    assert tm.is_cauchy(seq, 0.1, tol).converged
    fld = ex_charge.field
    for k in range(0, 33):
        for cut in ([], [k] if k else []):
            E = cc.cofinite(*range(1, k + 1), *cut) if k else cc.cofinite()
            diag = tm.converges_to(seq, cc.indicator(fld, E), 0.1, tol)
            assert diag.residual >= 4 - 1e-9 and not diag.converged
    for k in range(0, 16):
        diag = tm.converges_to(seq, cc.indicator(fld, cc.finite(*range(1, k + 1))), 0.1, tol)
        assert not diag.converged
