import dataclasses

import numpy as np
import pytest

from oracle import oracle_metrics

from cracksim import default_config, derive_rng
from cracksim.channel import (channel_set_for_trial, downlink_actual, eve_downlink,
                              uplink_composite)
from cracksim.precoding import build_precoder, normalize_power, zf
from cracksim.ris import AttackSchedule, attack_schedule, diagonal_config, identity_config
from cracksim.tdd_sim import (LinkReport, aggregate_reports, downlink_sinr,
                              estimate_uplink, eve_sinr, eve_sinr_all, monte_carlo,
                              rate_from_sinr, run_block)


def cgauss(rng, *shape):
    return rng.standard_normal(shape) + 1j * rng.standard_normal(shape)


def test_rate_from_sinr_hand_values():
    assert np.allclose(rate_from_sinr(np.array([0.0, 1.0, 3.0])), [0.0, 1.0, 2.0])


def test_downlink_sinr_single_user():
    rng = np.random.default_rng(0)
    h = cgauss(rng, 1, 4)
    W = cgauss(rng, 4, 1)
    sigma2 = 0.3
    eta = downlink_sinr(h, W, sigma2)
    expected = abs((h @ W)[0, 0]) ** 2 / sigma2
    assert eta[0] == pytest.approx(expected, rel=1e-12)


def test_downlink_sinr_matches_scalar_oracle():
    rng = np.random.default_rng(1)
    hd = cgauss(rng, 3, 5)
    W = cgauss(rng, 5, 3)
    he = cgauss(rng, 5)
    sigma2 = 0.2
    jam = np.array([0.1, 0.0, 0.4])
    ref = oracle_metrics(hd, he, W, sigma2, jam=jam)
    eta = downlink_sinr(hd, W, sigma2, jam_power_at_users=jam)
    eta_e = eve_sinr_all(he, W, sigma2)
    assert np.allclose(eta, ref["sinr"], rtol=1e-12)
    assert np.allclose(eta_e, ref["eve_sinr"], rtol=1e-12)
    assert np.allclose(rate_from_sinr(eta), ref["rate"], rtol=1e-12)


def test_eve_sinr_zero_when_beams_orthogonal():
    he = np.zeros(4, dtype=complex)
    he[0] = 1.0
    W = np.zeros((4, 2), dtype=complex)
    W[1, 0] = 1.0
    W[2, 1] = 1.0
    eta = eve_sinr_all(he, W, 1e-3)
    assert np.allclose(eta, 0.0)
    assert eve_sinr(he, W, 1e-3, 1) == 0.0


def test_eve_sinr_target_indexing():
    rng = np.random.default_rng(2)
    he = cgauss(rng, 5)
    W = cgauss(rng, 5, 3)
    all_eta = eve_sinr_all(he, W, 0.1)
    for k in range(3):
        assert eve_sinr(he, W, 0.1, k) == pytest.approx(all_eta[k])


def test_run_block_zf_reaches_interference_free_sinr(small_config):
    # with no attack, ZF pins every user's SINR at xi^2 / sigma2
    chan = channel_set_for_trial(small_config, 0)
    sched = AttackSchedule(identity_config(small_config.n),
                           [identity_config(small_config.n)])
    report = run_block(small_config, chan, sched, precoder_kind="zf")
    prec = zf(uplink_composite(chan, sched.phi_pt), small_config.p_total)
    expected = prec.xi ** 2 / small_config.sigma2
    assert np.allclose(report.sinr, expected, rtol=1e-6)
    assert report.sum_rate == pytest.approx(report.rate.sum())
    assert (report.secrecy_rate >= 0).all()


def test_run_block_symmetric_static_config_adapts_perfectly(small_config):
    # a reciprocal surface reshapes the channel but the precoder tracks it
    chan = channel_set_for_trial(small_config, 1)
    rng = np.random.default_rng(3)
    diag = diagonal_config(rng.uniform(0, 2 * np.pi, small_config.n))
    report = run_block(small_config, chan, AttackSchedule(diag, [diag]), "zf")
    prec = zf(uplink_composite(chan, diag), small_config.p_total)
    assert np.allclose(report.sinr, prec.xi ** 2 / small_config.sigma2, rtol=1e-6)


def test_run_block_matches_scalar_oracle_per_strategy(small_config):
    chan = channel_set_for_trial(small_config, 2)
    jam_power = small_config.p_jam * np.abs(chan.g_ju) ** 2
    for strategy, precoder in (("none", "zf"), ("nr-blind", "zf"),
                               ("nr-blind", "mrt"), ("nd-ris", "zf"),
                               ("dris1", "mrt"), ("dris2", "zf"),
                               ("jammer", "zf")):
        sched = attack_schedule(strategy, 2, small_config, chan,
                                derive_rng(small_config, "attack", 2))
        report = run_block(small_config, chan, sched, precoder)
        prec = build_precoder(uplink_composite(chan, sched.phi_pt),
                              small_config.p_total, precoder)
        hd = downlink_actual(chan, sched.phi_dt[0])
        he = eve_downlink(chan, sched.phi_dt[0])
        ref = oracle_metrics(hd, he, prec.W, small_config.sigma2,
                             jam=jam_power if sched.jam else None)
        assert np.allclose(report.sinr, ref["sinr"], rtol=1e-10), strategy
        assert np.allclose(report.rate, ref["rate"], rtol=1e-10), strategy
        assert np.allclose(report.eve_rate, ref["eve_rate"], rtol=1e-10), strategy
        assert np.allclose(report.secrecy_rate, ref["secrecy"], rtol=1e-10, atol=1e-12)
        assert report.outage.tolist() == ref["outage"], strategy


def test_run_block_multi_slot_rates_average(small_config):
    chan = channel_set_for_trial(small_config, 3)
    rng = np.random.default_rng(4)
    pt = diagonal_config(rng.uniform(0, 2 * np.pi, small_config.n))
    dts = [diagonal_config(rng.uniform(0, 2 * np.pi, small_config.n)) for _ in range(3)]
    combined = run_block(small_config, chan, AttackSchedule(pt, dts), "zf")
    singles = [run_block(small_config, chan, AttackSchedule(pt, [dt]), "zf")
               for dt in dts]
    mean_rate = np.mean([s.rate for s in singles], axis=0)
    mean_eve = np.mean([s.eve_rate for s in singles], axis=0)
    assert np.allclose(combined.rate, mean_rate, rtol=1e-12)
    assert np.allclose(combined.eve_rate, mean_eve, rtol=1e-12)
    # secrecy and outage are evaluated on the averaged rates
    assert np.allclose(combined.secrecy_rate,
                       np.maximum(0.0, mean_rate - mean_eve), rtol=1e-12)
    assert combined.outage.tolist() == (mean_rate < mean_eve).tolist()


def test_run_block_dris2_pilot_phase_is_silent(small_config):
    chan = channel_set_for_trial(small_config, 0)
    sched = attack_schedule("dris2", 0, small_config, chan,
                            derive_rng(small_config, "attack", 0))
    assert np.array_equal(uplink_composite(chan, sched.phi_pt), chan.H_ub)


def test_no_attack_equals_channel_without_surface(small_config):
    # strategy none must be indistinguishable from removing the surface link
    chan = channel_set_for_trial(small_config, 0)
    gone = dataclasses.replace(chan, H_rb=np.zeros_like(chan.H_rb))
    sched = attack_schedule("none", 0, small_config, chan,
                            derive_rng(small_config, "attack", 0))
    a = run_block(small_config, chan, sched, "zf")
    b = run_block(small_config, gone, sched, "zf")
    assert np.array_equal(a.rate, b.rate)
    assert np.array_equal(a.eve_rate, b.eve_rate)


def test_reciprocal_attack_is_null(small_config):
    # a static symmetric configuration equals an unattacked run on the
    # channel it reshapes: reciprocity holds, the precoder adapts
    chan = channel_set_for_trial(small_config, 1)
    rng = np.random.default_rng(5)
    diag = diagonal_config(rng.uniform(0, 2 * np.pi, small_config.n))
    attacked = run_block(small_config, chan, AttackSchedule(diag, [diag]), "zf")

    reshaped = dataclasses.replace(
        chan,
        H_ub=uplink_composite(chan, diag),
        h_eb=eve_downlink(chan, diag),
        H_rb=np.zeros_like(chan.H_rb))
    clean = run_block(small_config, reshaped,
                      AttackSchedule(identity_config(small_config.n),
                                     [identity_config(small_config.n)]), "zf")
    assert np.allclose(attacked.rate, clean.rate, rtol=1e-9)
    assert np.allclose(attacked.eve_rate, clean.eve_rate, rtol=1e-9)


def test_nr_blind_degrades_rates_paired():
    # needs enough surface elements for the mismatch to beat the extra
    # scattering energy the surface adds
    cfg = default_config(m=8, k=2, n=32, l=32, trials=60, seed=7)
    for precoder in ("mrt", "zf"):
        base = monte_carlo(cfg, "none", precoder)
        hit = monte_carlo(cfg, "nr-blind", precoder)
        diff = base.per_trial_sum_rate - hit.per_trial_sum_rate
        se = diff.std(ddof=1) / np.sqrt(diff.size)
        assert diff.mean() > 1.96 * se


def test_monte_carlo_single_trial_matches_run_block(small_config):
    cfg = dataclasses.replace(small_config, trials=1)
    agg = monte_carlo(cfg, "nr-blind", "zf")
    chan = channel_set_for_trial(cfg, 0)
    sched = attack_schedule("nr-blind", 0, cfg, chan, derive_rng(cfg, "attack", 0))
    ref = run_block(cfg, chan, sched, "zf")
    assert agg.trials == 1
    assert agg.sum_rate == pytest.approx(ref.sum_rate, rel=1e-12)
    assert agg.sum_secrecy == pytest.approx(ref.sum_secrecy, rel=1e-12)
    assert agg.sum_rate_ci95 == 0.0
    assert agg.sop == pytest.approx(ref.outage.mean())


def test_monte_carlo_deterministic(small_config):
    a = monte_carlo(small_config, "nr-blind", "zf")
    b = monte_carlo(small_config, "nr-blind", "zf")
    assert np.array_equal(a.per_trial_sum_rate, b.per_trial_sum_rate)
    assert np.array_equal(a.per_trial_outage_frac, b.per_trial_outage_frac)
    assert a.sum_rate == b.sum_rate


def test_monte_carlo_overrides(small_config):
    r = monte_carlo(small_config, "none", "mrt", trials=2, seed=123)
    assert r.trials == 2
    s = monte_carlo(small_config, "none", "mrt", trials=2, seed=124)
    assert not np.array_equal(r.per_trial_sum_rate, s.per_trial_sum_rate)


def test_monte_carlo_rejects_unknown_strategy(small_config):
    with pytest.raises(ValueError, match="unknown strategy"):
        monte_carlo(small_config, "worst-case", "zf")


def test_monte_carlo_static_phi_bypasses_strategy_check(small_config):
    phi = diagonal_config(np.zeros(small_config.n))
    r = monte_carlo(small_config, "static-diag", "zf", trials=2, static_phi=phi)
    assert r.strategy == "static-diag"
    base = monte_carlo(small_config, "none", "zf", trials=2)
    # identity static configuration is exactly the unattacked system
    assert np.array_equal(r.per_trial_sum_rate, base.per_trial_sum_rate)


def _fake_report(rates, eve_rates):
    rates = np.asarray(rates, float)
    eve = np.asarray(eve_rates, float)
    secrecy = np.maximum(0.0, rates - eve)
    outage = rates < eve
    return LinkReport(sinr=2.0 ** rates - 1.0, rate=rates,
                      eve_sinr=2.0 ** eve - 1.0, eve_rate=eve,
                      secrecy_rate=secrecy, outage=outage,
                      sum_rate=float(rates.sum()), sum_secrecy=float(secrecy.sum()))


def test_aggregate_reports_outage_accounting(small_config):
    reports = [_fake_report([2.0, 3.0], [1.0, 1.0]) for _ in range(4)]
    agg = aggregate_reports(reports, "none", "zf", small_config)
    assert agg.sop == 0.0
    assert agg.sop_any_user == 0.0

    # flipping one user-trial pair into outage moves SOP by exactly 1/(k*T)
    flipped = list(reports)
    flipped[2] = _fake_report([0.5, 3.0], [1.0, 1.0])
    agg2 = aggregate_reports(flipped, "none", "zf", small_config)
    assert agg2.sop == pytest.approx(1.0 / 8.0, abs=1e-15)
    assert agg2.sop_any_user == pytest.approx(1.0 / 4.0, abs=1e-15)
    assert agg2.sum_secrecy < agg.sum_secrecy


def test_aggregate_reports_ci_shrinks_with_samples(small_config):
    rng = np.random.default_rng(6)
    few = [_fake_report(rng.uniform(1, 3, 2), [0.5, 0.5]) for _ in range(10)]
    many = few * 16
    ci_few = aggregate_reports(few, "none", "zf", small_config).sum_rate_ci95
    ci_many = aggregate_reports(many, "none", "zf", small_config).sum_rate_ci95
    assert ci_many < ci_few


def test_estimate_uplink_noiseless_is_exact_copy(small_config):
    chan = channel_set_for_trial(small_config, 0)
    phi = identity_config(small_config.n)
    est = estimate_uplink(chan, phi, pilot_power=1.0)
    truth = uplink_composite(chan, phi)
    assert np.array_equal(est, truth)
    est[0, 0] = 0.0
    assert truth[0, 0] == uplink_composite(chan, phi)[0, 0]


def test_estimate_uplink_equals_correlation_receiver(small_config):
    # recompute the least-squares estimate with explicit per-user correlation
    chan = channel_set_for_trial(small_config, 1)
    phi = identity_config(small_config.n)
    p, nv, tau = 2.0, 0.1, small_config.k
    est = estimate_uplink(chan, phi, p, rng=np.random.default_rng(77),
                          noise_power=nv)

    H = uplink_composite(chan, phi)
    m, k = H.shape
    rng = np.random.default_rng(77)
    noise = np.sqrt(nv / 2.0) * (rng.standard_normal((m, tau))
                                 + 1j * rng.standard_normal((m, tau)))
    pilots = np.exp(-2j * np.pi * np.outer(np.arange(k), np.arange(tau)) / tau)
    Y = np.sqrt(p) * H @ pilots + noise
    manual = np.empty_like(H)
    for kk in range(k):
        acc = np.zeros(m, dtype=complex)
        for t in range(tau):
            acc += Y[:, t] * np.conj(pilots[kk, t])
        manual[:, kk] = acc / (np.sqrt(p) * tau)
    assert np.allclose(est, manual, rtol=1e-12)


def test_estimate_uplink_error_variance(small_config):
    chan = channel_set_for_trial(small_config, 2)
    phi = identity_config(small_config.n)
    truth = uplink_composite(chan, phi)
    p, nv, runs = 4.0, 0.09, 4000
    rng = np.random.default_rng(8)
    sq = []
    for _ in range(runs):
        est = estimate_uplink(chan, phi, p, rng=rng, noise_power=nv)
        sq.append(np.abs(est - truth) ** 2)
    sq = np.concatenate([s.ravel() for s in sq])
    expected = nv / (small_config.k * p)
    se = sq.std(ddof=1) / np.sqrt(sq.size)
    assert abs(sq.mean() - expected) < 4 * se


def test_estimate_uplink_longer_pilots_cut_variance(small_config):
    chan = channel_set_for_trial(small_config, 2)
    phi = identity_config(small_config.n)
    truth = uplink_composite(chan, phi)
    p, nv, runs, tau = 1.0, 0.09, 2000, 8
    rng = np.random.default_rng(9)
    sq = []
    for _ in range(runs):
        est = estimate_uplink(chan, phi, p, rng=rng, noise_power=nv, pilot_len=tau)
        sq.append(np.abs(est - truth) ** 2)
    sq = np.concatenate([s.ravel() for s in sq])
    expected = nv / (tau * p)
    se = sq.std(ddof=1) / np.sqrt(sq.size)
    assert abs(sq.mean() - expected) < 4 * se


def test_estimate_uplink_validation(small_config):
    chan = channel_set_for_trial(small_config, 0)
    phi = identity_config(small_config.n)
    with pytest.raises(ValueError, match="pilot length"):
        estimate_uplink(chan, phi, 1.0, pilot_len=small_config.k - 1)
    with pytest.raises(ValueError, match="generator"):
        estimate_uplink(chan, phi, 1.0, noise_power=0.1)


def test_run_block_accepts_noisy_estimate(small_config):
    chan = channel_set_for_trial(small_config, 0)
    sched = attack_schedule("none", 0, small_config, chan,
                            derive_rng(small_config, "attack", 0))
    noisy = estimate_uplink(chan, sched.phi_pt, 1.0,
                            rng=np.random.default_rng(10), noise_power=1e-9)
    exact = run_block(small_config, chan, sched, "zf")
    rough = run_block(small_config, chan, sched, "zf", h_up=noisy)
    assert not np.array_equal(exact.rate, rough.rate)
    # residual interference from the estimation error caps the rates
    assert rough.sum_rate < exact.sum_rate


def test_run_block_external_precoder(small_config):
    chan = channel_set_for_trial(small_config, 0)
    sched = attack_schedule("none", 0, small_config, chan,
                            derive_rng(small_config, "attack", 0))
    rng = np.random.default_rng(11)
    W = cgauss(rng, small_config.m, small_config.k)
    prec = normalize_power(W, small_config.p_total)
    report = run_block(small_config, chan, sched, external_w=prec)
    ref = oracle_metrics(downlink_actual(chan, sched.phi_dt[0]),
                         eve_downlink(chan, sched.phi_dt[0]),
                         prec.W, small_config.sigma2)
    assert np.allclose(report.rate, ref["rate"], rtol=1e-10)
