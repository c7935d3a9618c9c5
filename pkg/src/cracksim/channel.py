"""Rician channel generation and composite uplink/downlink assembly.

Links follow a Rician model: sqrt(alpha) * (sqrt(kappa/(1+kappa)) * los +
sqrt(1/(1+kappa)) * tilde) with tilde i.i.d. circular complex Gaussian of
unit variance and alpha = rho * d**-iota. Line-of-sight components are
uniform-linear-array responses at the geometric azimuths, all arrays oriented
along the global x axis.

The surface contributes through its scattering matrix Phi minus the identity:
the structural reflection of the static surface is part of the environment,
so Phi = I means the surface adds nothing beyond the direct paths.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .scenario import ScenarioConfig, derive_rng


@dataclass
class ChannelSet:
    """One coherence block's channel realization plus cached LoS parts.

    Shapes: H_ub (M, K) users to BS direct, H_ur (N, K) users to surface,
    H_rb (M, N) surface to BS, h_eb (M,) and h_er (N,) eavesdropper links,
    g_ju (K,) jammer to users, g_je scalar jammer to eavesdropper.
    beta_k weights the knowledge-driven search: the product of the cascaded
    LoS power fractions for each user.
    """

    H_ub: np.ndarray
    H_ur: np.ndarray
    H_rb: np.ndarray
    h_eb: np.ndarray
    h_er: np.ndarray
    g_ju: np.ndarray
    g_je: complex
    los_ub: np.ndarray
    los_ur: np.ndarray
    los_rb: np.ndarray
    beta_k: np.ndarray
    user_positions: np.ndarray


def ula_response(num_elements: int, angle: float) -> np.ndarray:
    """Half-wavelength ULA response: entry i is exp(j*pi*i*sin(angle))."""
    if num_elements < 1:
        raise ValueError("num_elements must be at least 1")
    return np.exp(1j * np.pi * np.arange(num_elements) * np.sin(angle))


def path_loss(rho: float, d: float, iota: float) -> float:
    """Large-scale gain rho * d**-iota with rho referenced at 1 m."""
    if d <= 0:
        raise ValueError(f"distance must be positive, got {d}")
    return rho * d ** (-iota)


def sample_rician(alpha: float, kappa: float, los, rng: np.random.Generator) -> np.ndarray:
    """Draw one Rician realization around the given LoS component."""
    los = np.asarray(los, dtype=complex)
    tilde = (rng.standard_normal(los.shape) + 1j * rng.standard_normal(los.shape)) / np.sqrt(2.0)
    return np.sqrt(alpha) * (np.sqrt(kappa / (1.0 + kappa)) * los
                             + np.sqrt(1.0 / (1.0 + kappa)) * tilde)


def azimuth(src, dst) -> float:
    """Azimuth of dst as seen from an x-axis array at src, in radians."""
    src = np.asarray(src, dtype=float)
    dst = np.asarray(dst, dtype=float)
    delta = dst - src
    dist = np.linalg.norm(delta)
    if dist == 0:
        raise ValueError("degenerate geometry: coincident endpoints")
    return float(np.arcsin(np.clip(delta[0] / dist, -1.0, 1.0)))


def draw_user_positions(config: ScenarioConfig, rng: np.random.Generator) -> np.ndarray:
    """Uniform positions in the horizontal disc of the user region, one per user."""
    center = np.asarray(config.user_center, dtype=float)
    radii = config.user_radius * np.sqrt(rng.random(config.k))
    angles = 2.0 * np.pi * rng.random(config.k)
    pos = np.empty((config.k, 3))
    pos[:, 0] = center[0] + radii * np.cos(angles)
    pos[:, 1] = center[1] + radii * np.sin(angles)
    pos[:, 2] = center[2]
    return pos


def gen_channel_set(config: ScenarioConfig, user_positions, rng: np.random.Generator) -> ChannelSet:
    """Generate all links for one coherence block.

    Draw order is fixed (per-user direct then surface link, surface-BS,
    eavesdropper, jammer) so a given generator state always yields the same
    set. The jammer links reuse the user-BS statistics since nothing else is
    specified for them.
    """
    m, k, n = config.m, config.k, config.n
    bs = np.asarray(config.bs_pos, float)
    ris = np.asarray(config.ris_pos, float)
    eve = np.asarray(config.eve_pos, float)
    jam = np.asarray(config.jammer_pos, float)
    pos = np.asarray(user_positions, dtype=float).reshape(k, 3)

    H_ub = np.empty((m, k), dtype=complex)
    H_ur = np.empty((n, k), dtype=complex)
    los_ub = np.empty((m, k), dtype=complex)
    los_ur = np.empty((n, k), dtype=complex)
    beta_k = np.empty(k)

    d_rb = np.linalg.norm(bs - ris)
    alpha_rb = path_loss(config.rho, d_rb, config.iota_rb)

    for i in range(k):
        d_kb = np.linalg.norm(pos[i] - bs)
        d_kr = np.linalg.norm(pos[i] - ris)
        alpha_kb = path_loss(config.rho, d_kb, config.iota_kb)
        alpha_kr = path_loss(config.rho, d_kr, config.iota_kr)
        los_ub[:, i] = ula_response(m, azimuth(bs, pos[i]))
        los_ur[:, i] = ula_response(n, azimuth(ris, pos[i]))
        H_ub[:, i] = sample_rician(alpha_kb, config.kappa_kb, los_ub[:, i], rng)
        H_ur[:, i] = sample_rician(alpha_kr, config.kappa_kr, los_ur[:, i], rng)
        beta_k[i] = (alpha_kr * alpha_rb * config.kappa_kr * config.kappa_rb
                     / ((1.0 + config.kappa_kr) * (1.0 + config.kappa_rb)))

    # Rank-one LoS for the surface-BS link, unit-amplitude entries so the
    # large-scale gain enters exactly once through sample_rician.
    los_rb = np.outer(ula_response(m, azimuth(bs, ris)),
                      ula_response(n, azimuth(ris, bs)).conj())
    H_rb = sample_rician(alpha_rb, config.kappa_rb, los_rb, rng)

    alpha_eb = path_loss(config.rho, np.linalg.norm(eve - bs), config.iota_eb)
    alpha_er = path_loss(config.rho, np.linalg.norm(eve - ris), config.iota_er)
    h_eb = sample_rician(alpha_eb, config.kappa_eb, ula_response(m, azimuth(bs, eve)), rng)
    h_er = sample_rician(alpha_er, config.kappa_er, ula_response(n, azimuth(ris, eve)), rng)

    g_ju = np.empty(k, dtype=complex)
    for i in range(k):
        alpha_ju = path_loss(config.rho, np.linalg.norm(pos[i] - jam), config.iota_kb)
        g_ju[i] = sample_rician(alpha_ju, config.kappa_kb, np.ones(()), rng)
    alpha_je = path_loss(config.rho, np.linalg.norm(eve - jam), config.iota_kb)
    g_je = complex(sample_rician(alpha_je, config.kappa_kb, np.ones(()), rng))

    return ChannelSet(H_ub=H_ub, H_ur=H_ur, H_rb=H_rb, h_eb=h_eb, h_er=h_er,
                      g_ju=g_ju, g_je=g_je, los_ub=los_ub, los_ur=los_ur,
                      los_rb=los_rb, beta_k=beta_k, user_positions=pos)


def channel_set_for_trial(config: ScenarioConfig, trial: int) -> ChannelSet:
    """Regenerate trial ``trial``'s channel set from the config seed alone.

    Uses the same substream labels as the Monte Carlo driver, so any consumer
    (multi-block attack schedules in particular) sees exactly the set that
    trial produced, without needing it passed around.
    """
    positions = draw_user_positions(config, derive_rng(config, "positions", trial))
    return gen_channel_set(config, positions, derive_rng(config, "channels", trial))


def _phi_values(phi) -> np.ndarray:
    return np.asarray(getattr(phi, "values", phi), dtype=complex)


def uplink_composite(chan: ChannelSet, phi) -> np.ndarray:
    """Uplink channel the BS observes: H_rb (Phi - I) H_ur + H_ub, (M, K)."""
    values = _phi_values(phi)
    n = chan.H_ur.shape[0]
    if values.shape != (n, n):
        raise ValueError(f"scattering matrix must be {n}x{n}, got {values.shape}")
    scatter = values - np.eye(n)
    return chan.H_rb @ (scatter @ chan.H_ur) + chan.H_ub


def downlink_actual(chan: ChannelSet, phi) -> np.ndarray:
    """True downlink channel rows: H_ur^T (Phi - I) H_rb^T + H_ub^T, (K, M).

    The cascade traverses the surface in the reverse direction, so Phi enters
    untransposed here; for symmetric Phi this is exactly the transpose of the
    uplink composite, and reciprocity holds.
    """
    values = _phi_values(phi)
    n = chan.H_ur.shape[0]
    if values.shape != (n, n):
        raise ValueError(f"scattering matrix must be {n}x{n}, got {values.shape}")
    scatter = values - np.eye(n)
    return chan.H_ur.T @ (scatter @ chan.H_rb.T) + chan.H_ub.T


def eve_downlink(chan: ChannelSet, phi) -> np.ndarray:
    """Eavesdropper's downlink row: h_er^T (Phi - I) H_rb^T + h_eb^T, (M,)."""
    values = _phi_values(phi)
    n = chan.h_er.shape[0]
    if values.shape != (n, n):
        raise ValueError(f"scattering matrix must be {n}x{n}, got {values.shape}")
    scatter = values - np.eye(n)
    return chan.h_er @ (scatter @ chan.H_rb.T) + chan.h_eb
