import json
import math

import pytest
from hypothesis import given, settings, strategies as st

from apcharge import ap_poly as ap
from apcharge import inequalities as iq
from apcharge.errors import InvalidParameter

TWO_COS = ap.parse_poly("1@1;1@-1")


def test_bessel_exact_on_lattice():
    rec = iq.check_bessel(ap.parse_poly("1,1@0;2@3;0.5,-0.5@-7"))
    assert rec.ratio == pytest.approx(1, abs=1e-12)
    assert not rec.violated and rec.residual == 0


def test_hausdorff_young_endpoints():
    P = ap.parse_poly("1@0;1@1;1@2")
    r2 = iq.check_hausdorff_young(P, 2)
    assert r2.ratio == pytest.approx(1, abs=1e-12)
    r1 = iq.check_hausdorff_young(P, 1)  # max |a| <= B^1
    assert r1.lhs == 1 and r1.ratio <= 1
    with pytest.raises(InvalidParameter):
        iq.check_hausdorff_young(P, 2.5)


def test_paley_spot_value():
    spot = iq.paley_spot_check()
    assert spot["lhs"] == pytest.approx((1 + 2 ** -0.5) ** (2 / 3), abs=1e-12)
    assert spot["rhs"] == pytest.approx(iq.PALEY_SPOT_RHS_ORACLE, abs=1e-9)
    assert spot["agrees"]


def test_paley_rhs_oracle_from_mpmath():
    mp = pytest.importorskip("mpmath")
    mp.mp.dps = 25
    nodes = [0, mp.pi / 2, mp.pi, 3 * mp.pi / 2, 2 * mp.pi]
    v = (mp.quad(lambda x: abs(2 * mp.cos(x)) ** 1.5, nodes) / (2 * mp.pi)) ** (mp.mpf(2) / 3)
    assert float(v) == pytest.approx(iq.PALEY_SPOT_RHS_ORACLE, rel=1e-15)


def test_l1_bound_and_skip():
    rec = iq.check_l1_bound(TWO_COS, 1.0)
    assert rec.lhs == 1 and rec.rhs == pytest.approx(4 / math.pi) and not rec.violated
    empty = iq.check_bessel(ap.TrigPolynomial())
    assert empty.skipped and not empty.violated


def test_lorentz_paley_domain():
    with pytest.raises(InvalidParameter):
        iq.check_lorentz_paley(TWO_COS, 2.5, 1)
    rec = iq.check_lorentz_paley(TWO_COS, 1.5, 3)
    assert math.isfinite(rec.ratio) and rec.ratio > 0


@given(st.integers(0, 2 ** 31), st.integers(1, 8))
def test_generator_deterministic(seed, n):
    a = iq.gen_random_poly(seed, n)
    assert a == iq.gen_random_poly(seed, n)
    assert len(a) <= n and all(float(e).is_integer() for e in a.freqs)
    assert all(abs(c) <= 1 + 1e-12 for c in a.coeffs)


def test_generator_modes():
    g = iq.gen_random_poly(3, 6, freq_range=(-4, 4), mode="generic-real", min_gap=0.25)
    assert all(b - a >= 0.25 for a, b in zip(g.freqs, g.freqs[1:]))
    with pytest.raises(InvalidParameter):
        iq.gen_random_poly(3, 2, mode="weird")


def test_campaign_deterministic_and_thread_independent(monkeypatch):
    cfg = dict(inequality="paley", q=1.25, trials=24, base_seed=11)
    monkeypatch.setenv("APCHARGE_THREADS", "1")
    one = iq.run_campaign(cfg).to_json()
    monkeypatch.setenv("APCHARGE_THREADS", "4")
    four = iq.run_campaign(cfg).to_json()
    assert one == four
    assert one["violations"] == 0 and one["passed"]
    assert one["spot_check"]["agrees"]
    assert [r["seed"] for r in one["records"]] == list(range(11, 35))


def test_campaign_config_validation(monkeypatch):
    with pytest.raises(InvalidParameter):
        iq.CampaignConfig("nonsense")
    with pytest.raises(InvalidParameter):
        iq.CampaignConfig("paley")
    with pytest.raises(InvalidParameter):
        iq.CampaignConfig("bessel", trials=0)
    with pytest.raises(InvalidParameter):
        iq.CampaignConfig.from_dict({"inequality": "bessel", "colour": 1})
    cfg = iq.CampaignConfig.from_dict({"inequality": "paley", "params": {"q": 1.5}, "generator": {"n_terms": 3}})
    assert cfg.q == 1.5 and cfg.n_terms == 3
    monkeypatch.setenv("APCHARGE_THREADS", "many")
    with pytest.raises(InvalidParameter):
        iq.run_campaign(dict(inequality="bessel", trials=2))


def test_report_json_round_trip():
    rep = iq.run_campaign(dict(inequality="hausdorff_young", q=1.5, trials=5, base_seed=2))
    text = json.dumps(rep.to_json())
    back = iq.report_from_json(json.loads(text))
    assert back == rep


def test_trivial_campaign_all_skipped():
    rep = iq.run_campaign(dict(inequality="bessel", trials=1, coeff_bound=0.0))
    assert rep.trials == 1 and rep.skipped == 1
    json.dumps(rep.to_json(), allow_nan=False)


def test_records_csv_header():
    rep = iq.run_campaign(dict(inequality="bessel", trials=3))
    lines = iq.records_csv(rep.records).splitlines()
    assert lines[0] == "seed,lhs,rhs,ratio,residual" and len(lines) == 4
