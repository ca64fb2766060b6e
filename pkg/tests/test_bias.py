import math

import numpy as np
import pytest

from relbelief import BiasSpec, DomainError, Hyperparameters, RandomStream, bias_report, design_scan
from relbelief import bias as bm
from relbelief import relative_belief as rbm
from relbelief.trial_data import SufficientStats


def test_rb_zero_matches_table(elicited, stats):
    for mode in rbm.MODES:
        a = rbm.analyze(rbm.difference_laws(elicited, stats, mode), 0.5)
        r = bm.rb_zero_from_stats(elicited, stats.diff, stats.s2, 12, 12, 0.5, mode, xbar_R=stats.xbar_R)
        assert r == pytest.approx(a.rb0, abs=1e-9)


def test_rb_zero_unequal_arms_derived(elicited):
    s = SufficientStats(3.0, 1.0, 20.0, 10, 15)
    a = rbm.analyze(rbm.difference_laws(elicited, s, "derived"), 0.5)
    assert bm.rb_zero_from_stats(elicited, 2.0, 20.0, 10, 15, 0.5, "derived", xbar_R=1.0) == pytest.approx(a.rb0, abs=1e-9)
    with pytest.raises(DomainError):
        bm.rb_zero_from_stats(elicited, 2.0, 20.0, 10, 15, 0.5, "derived")


def test_rb_zero_direct_evaluation(diffuse):
    r = bm.rb_zero_from_stats(diffuse, 0.0, 0.5, 30, 30, 0.5)
    laws = rbm.difference_laws(diffuse, SufficientStats(0.0, 0.0, 0.5, 30, 30))
    direct = laws.posterior.interval_prob(-0.5, 0.5) / laws.prior.interval_prob(-0.5, 0.5)
    assert r == pytest.approx(direct, rel=1e-14)
    assert r > 1


def test_rb_zero_wide_margin(elicited):
    assert bm.rb_zero_from_stats(elicited, 1.0, 40.0, 12, 12, 1e7) == pytest.approx(1.0, abs=1e-9)


def test_rb_zero_vectorized(elicited):
    d = np.linspace(-3, 3, 7)
    r = bm.rb_zero_from_stats(elicited, d, np.full(7, 30.0), 12, 12, 0.5)
    assert r.shape == (7,)
    np.testing.assert_allclose(r, r[::-1], rtol=1e-12)


def test_rb_zero_errors(elicited):
    with pytest.raises(DomainError):
        bm.rb_zero_from_stats(elicited, 0.0, -1.0, 12, 12, 0.5)
    with pytest.raises(DomainError):
        bm.rb_zero_from_stats(elicited, 0.0, 1.0, 12, 12, 0.5, mode="other")
    with pytest.raises(bm.UnstableError):
        bm.rb_zero_from_stats(Hyperparameters(0, 1e30, 1, 1), 0.0, 1.0, 12, 12, 0.5)


def test_conditional_prior_predictive():
    n = 100_000
    d, s2 = bm.sample_cond_prior_predictive(None, 1.5, 4.0, 12, 12, RandomStream(6), n)
    se_d = math.sqrt(4.0 * (2 / 12) / n)
    assert abs(d.mean() - 1.5) < 3 * se_d
    se_s = math.sqrt(2 * 16.0 / 22 / n)
    assert abs(s2.mean() - 4.0) < 3 * se_s
    assert abs(np.corrcoef(d, s2)[0, 1]) < 3 / math.sqrt(n)
    with pytest.raises(DomainError):
        bm.sample_cond_prior_predictive(None, 0.0, 0.0, 12, 12, RandomStream(0), 3)


@pytest.mark.parametrize("kw", [dict(n_E=1), dict(delta=0.0), dict(alternative_bin=0), dict(reps=0), dict(mode="x")])
def test_spec_validation(elicited, kw):
    with pytest.raises(DomainError):
        BiasSpec(elicited, **kw)


def test_report_invariants_and_determinism(elicited):
    spec = BiasSpec(elicited, reps=1000, seed=17)
    a, b = bias_report(spec), bias_report(spec)
    assert a == b
    for p, se in ((a.p_against, a.se_against), (a.p_for, a.se_for)):
        assert 0 <= p <= 1
        assert se == pytest.approx(math.sqrt(p * (1 - p) / 1000), rel=1e-15)


def test_workers_do_not_change_results(elicited):
    a = bias_report(BiasSpec(elicited, reps=40_000, seed=3))
    b = bias_report(BiasSpec(elicited, reps=40_000, seed=3, workers=4))
    assert a == b


def test_alternative_sign_symmetry(diffuse):
    plus = bm.simulate_bias_for(BiasSpec(diffuse, reps=50_000, seed=1, alternative_bin=1))
    minus = bm.simulate_bias_for(BiasSpec(diffuse, reps=50_000, seed=2, alternative_bin=-1))
    assert abs(plus[0] - minus[0]) < 3 * math.hypot(plus[1], minus[1])


def test_se_halves_with_four_times_reps(elicited):
    _, se1 = bm.simulate_bias_against(BiasSpec(elicited, reps=10_000, seed=4))
    _, se2 = bm.simulate_bias_against(BiasSpec(elicited, reps=40_000, seed=4))
    assert se2 == pytest.approx(se1 / 2, rel=0.1)


def test_wide_margin_no_bias_against(elicited):
    p, _ = bm.simulate_bias_against(BiasSpec(elicited, delta=1e6, reps=10_000))
    assert p <= 0.05


def test_design_scan_monotone(diffuse):
    reports = design_scan(diffuse, 0.5, [(12, 12), (50, 50), (200, 200)], reps=20_000, seed=9)
    for a, b in zip(reports, reports[1:]):
        assert b.p_against <= a.p_against + 3 * math.hypot(a.se_against, b.se_against)
        assert b.p_for <= a.p_for + 3 * math.hypot(a.se_for, b.se_for)


def test_design_scan_single_entry_matches(elicited):
    [r] = design_scan(elicited, 0.5, [(12, 12)], reps=5000, seed=2)
    spec = BiasSpec(elicited, reps=5000, seed=2)
    assert (r.p_against, r.se_against) == bm.simulate_bias_against(spec)
    assert (r.p_for, r.se_for) == bm.simulate_bias_for(spec)


def test_design_scan_empty(elicited):
    with pytest.raises(DomainError):
        design_scan(elicited, 0.5, [])


def test_design_csv(tmp_path, elicited):
    reports = design_scan(elicited, 0.5, [(12, 12), (20, 30)], reps=2000)
    p = tmp_path / "d.csv"
    bm.write_design_csv(reports, p)
    lines = p.read_text().splitlines()
    assert lines[0] == ",".join(bm.DESIGN_COLUMNS)
    assert lines[2].startswith("20,30,")
