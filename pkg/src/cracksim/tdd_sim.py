"""One-block TDD simulation, secrecy metrics, and Monte Carlo aggregation.

A coherence block runs uplink estimation under the pilot-phase surface
configuration, builds the precoder from the estimate under the reciprocity
assumption, then evaluates every user and the eavesdropper on the true
downlink channel under the downlink-phase configuration(s). Degradation can
only come from a PT/DT configuration change or from non-reciprocity of the
surface; with a symmetric, static configuration the precoder adapts
perfectly.
"""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass
from typing import List, Optional, Sequence

import numpy as np

from .channel import (ChannelSet, channel_set_for_trial, downlink_actual,
                      eve_downlink, uplink_composite)
from .precoding import Precoder, build_precoder
from .ris import AttackSchedule, attack_schedule
from .scenario import STRATEGIES, ScenarioConfig, derive_rng


@dataclass
class LinkReport:
    """Per-block metrics: rates in bit/s/Hz, SINRs linear.

    With several downlink sub-configurations the per-user rate entries are
    sub-slot averages; secrecy and outage are evaluated on those averages.
    """

    sinr: np.ndarray
    rate: np.ndarray
    eve_sinr: np.ndarray
    eve_rate: np.ndarray
    secrecy_rate: np.ndarray
    outage: np.ndarray
    sum_rate: float
    sum_secrecy: float


@dataclass
class ErgodicReport:
    """Monte-Carlo-aggregated metrics with 95% confidence half-widths.

    ``sop`` is the fraction of user-trial pairs in secrecy outage;
    ``sop_any_user`` is the per-trial any-user variant kept for diagnostics.
    Per-trial arrays are retained so paired comparisons across strategies
    stay possible after aggregation.
    """

    strategy: str
    precoder: str
    n: int
    m: int
    l: int
    trials: int
    bandwidth: float
    sum_rate: float
    sum_rate_ci95: float
    sum_secrecy: float
    sum_secrecy_ci95: float
    sop: float
    sop_ci95: float
    sop_any_user: float
    per_trial_sum_rate: np.ndarray
    per_trial_sum_secrecy: np.ndarray
    per_trial_outage_frac: np.ndarray


def _precoder_matrix(W) -> np.ndarray:
    return np.asarray(getattr(W, "W", W), dtype=complex)


def downlink_sinr(H_star_down: np.ndarray, W, sigma2: float,
                  jam_power_at_users: Optional[np.ndarray] = None) -> np.ndarray:
    """Per-user linear SINR on the true downlink channel.

    eta_k = |h_k w_k|^2 / (sum_{i != k} |h_k w_i|^2 + jam_k + sigma2).
    """
    Wm = _precoder_matrix(W)
    gains = H_star_down @ Wm
    power = np.abs(gains) ** 2
    signal = np.diag(power).copy()
    interference = power.sum(axis=1) - signal
    jam = np.zeros_like(signal) if jam_power_at_users is None else np.asarray(jam_power_at_users)
    return signal / (interference + jam + sigma2)


def eve_sinr_all(h_star_eve: np.ndarray, W, sigma2: float) -> np.ndarray:
    """Eavesdropper's SINR for each user's stream.

    While intercepting stream k the other streams are interference; jamming
    does not appear because the eavesdropper is assumed able to cancel it.
    """
    Wm = _precoder_matrix(W)
    power = np.abs(h_star_eve @ Wm) ** 2
    total = power.sum()
    return power / (total - power + sigma2)


def eve_sinr(h_star_eve: np.ndarray, W, sigma2: float, target_k: int) -> float:
    return float(eve_sinr_all(h_star_eve, W, sigma2)[target_k])


def rate_from_sinr(eta: np.ndarray) -> np.ndarray:
    """Achievable rate log2(1 + eta) in bit/s/Hz."""
    return np.log2(1.0 + eta)


def run_block(config: ScenarioConfig, chan: ChannelSet, schedule: AttackSchedule,
              precoder_kind: str = "zf", external_w: Optional[Precoder] = None,
              h_up: Optional[np.ndarray] = None) -> LinkReport:
    """Run one coherence block end to end and report all metrics.

    The uplink estimate defaults to the exact composite under the pilot-phase
    configuration (perfect CSI); pass ``h_up`` to precode from a noisy
    estimate instead. ``external_w`` bypasses the built-in precoders.
    """
    if h_up is None:
        h_up = uplink_composite(chan, schedule.phi_pt)
    if external_w is not None:
        prec = external_w
    else:
        prec = build_precoder(h_up, config.p_total, precoder_kind)

    jam_vec = None
    if schedule.jam:
        jam_vec = config.p_jam * np.abs(chan.g_ju) ** 2

    k = config.k
    sinr_acc = np.zeros(k)
    rate_acc = np.zeros(k)
    eve_sinr_acc = np.zeros(k)
    eve_rate_acc = np.zeros(k)
    for phi in schedule.phi_dt:
        H_star = downlink_actual(chan, phi)
        h_eve = eve_downlink(chan, phi)
        eta = downlink_sinr(H_star, prec, config.sigma2, jam_vec)
        eta_e = eve_sinr_all(h_eve, prec, config.sigma2)
        sinr_acc += eta
        rate_acc += rate_from_sinr(eta)
        eve_sinr_acc += eta_e
        eve_rate_acc += rate_from_sinr(eta_e)
    slots = len(schedule.phi_dt)
    sinr = sinr_acc / slots
    rate = rate_acc / slots
    ev_sinr = eve_sinr_acc / slots
    ev_rate = eve_rate_acc / slots

    secrecy = np.maximum(0.0, rate - ev_rate)
    outage = rate < ev_rate
    return LinkReport(sinr=sinr, rate=rate, eve_sinr=ev_sinr, eve_rate=ev_rate,
                      secrecy_rate=secrecy, outage=outage,
                      sum_rate=float(rate.sum()), sum_secrecy=float(secrecy.sum()))


def _mean_ci(samples: np.ndarray) -> tuple:
    mean = float(samples.mean())
    if samples.size < 2:
        return mean, 0.0
    half = 1.96 * float(samples.std(ddof=1)) / np.sqrt(samples.size)
    return mean, half


def aggregate_reports(reports: Sequence[LinkReport], strategy: str, precoder: str,
                      config: ScenarioConfig) -> ErgodicReport:
    """Collapse per-block reports into ergodic means with normal-theory CIs."""
    per_rate = np.array([r.sum_rate for r in reports])
    per_secrecy = np.array([r.sum_secrecy for r in reports])
    per_outage = np.array([r.outage.mean() for r in reports])
    any_outage = np.array([bool(r.outage.any()) for r in reports])
    rate_mean, rate_ci = _mean_ci(per_rate)
    sec_mean, sec_ci = _mean_ci(per_secrecy)
    sop_mean, sop_ci = _mean_ci(per_outage)
    return ErgodicReport(
        strategy=strategy, precoder=precoder, n=config.n, m=config.m, l=config.l,
        trials=len(reports), bandwidth=config.bandwidth,
        sum_rate=rate_mean, sum_rate_ci95=rate_ci,
        sum_secrecy=sec_mean, sum_secrecy_ci95=sec_ci,
        sop=sop_mean, sop_ci95=sop_ci,
        sop_any_user=float(any_outage.mean()),
        per_trial_sum_rate=per_rate, per_trial_sum_secrecy=per_secrecy,
        per_trial_outage_frac=per_outage)


def monte_carlo(config: ScenarioConfig, strategy: str, precoder_kind: str,
                trials: Optional[int] = None, seed: Optional[int] = None,
                static_phi=None) -> ErgodicReport:
    """Ergodic metrics over fresh user positions and channels per trial.

    Deterministic given (config, seed): every trial derives its own
    substreams, so results do not depend on execution order. The block index
    advances with the trial index, which lets multi-block schedules cycle
    exactly as they would in a live system. ``static_phi`` pins one fixed
    configuration for every trial and both phases (used for per-configuration
    histograms); ``strategy`` is then only a label.
    """
    overrides = {}
    if trials is not None:
        overrides["trials"] = trials
    if seed is not None:
        overrides["seed"] = seed
    cfg = dataclasses.replace(config, **overrides) if overrides else config
    if static_phi is None and strategy not in STRATEGIES:
        raise ValueError(f"unknown strategy: {strategy!r} (choose from {STRATEGIES})")

    memo: dict = {}
    reports: List[LinkReport] = []
    for t in range(cfg.trials):
        chan = channel_set_for_trial(cfg, t)
        if static_phi is not None:
            schedule = AttackSchedule(static_phi, [static_phi])
        else:
            schedule = attack_schedule(strategy, t, cfg, chan,
                                       derive_rng(cfg, "attack", t), memo)
        reports.append(run_block(cfg, chan, schedule, precoder_kind))
    return aggregate_reports(reports, strategy, precoder_kind, cfg)


def estimate_uplink(chan: ChannelSet, phi_pt, pilot_power: float,
                    rng: Optional[np.random.Generator] = None,
                    noise_power: float = 0.0,
                    pilot_len: Optional[int] = None) -> np.ndarray:
    """Least-squares uplink estimate from orthogonal pilots.

    Pilots are rows of a DFT matrix, unit modulus with row energy tau, so the
    per-entry estimation error variance is noise_power / (tau * pilot_power).
    With noise disabled this returns the exact composite channel, the default
    assumption everywhere else.
    """
    k = chan.H_ub.shape[1]
    tau = k if pilot_len is None else int(pilot_len)
    if tau < k:
        raise ValueError(f"pilot length must be at least k (got {tau} < {k})")
    H = uplink_composite(chan, phi_pt)
    if noise_power == 0.0:
        return H.copy()
    if rng is None:
        raise ValueError("noisy estimation requires a generator")
    t_idx = np.arange(tau)
    pilots = np.exp(-2j * np.pi * np.outer(np.arange(k), t_idx) / tau)
    m = H.shape[0]
    noise = np.sqrt(noise_power / 2.0) * (rng.standard_normal((m, tau))
                                          + 1j * rng.standard_normal((m, tau)))
    received = np.sqrt(pilot_power) * H @ pilots + noise
    # orthogonal rows with energy tau: S S^H = tau I
    return received @ pilots.conj().T / (np.sqrt(pilot_power) * tau)
