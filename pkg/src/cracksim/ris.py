"""Scattering-matrix constructors and attacker-side configuration strategies.

A conventional surface has a diagonal unitary scattering matrix, which is
always symmetric, so TDD reciprocity survives whatever phases it applies. The
non-reciprocal constructions here pair elements inside blocks of size L
through two-port units whose off-diagonal phases differ, giving a unitary but
non-symmetric matrix. The pi-offset phase rule sets the two phases of each
pair exactly pi apart, which makes the matrix antisymmetric and maximizes the
uplink/downlink mismatch energy per pair.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import List, Optional, Tuple

import numpy as np

from .channel import ChannelSet, channel_set_for_trial
from .scenario import ScenarioConfig, STRATEGIES, derive_rng

KINDS = ("diagonal", "perm-phase", "nr-block")


@dataclass
class ScatteringMatrix:
    """N x N unitary scattering matrix with a declared structural kind.

    ``pairing`` lists the element pairs of a non-reciprocal block structure
    (a fixed-point-free involution within each block); ``phases`` holds the
    phase draws that produced the nonzero entries.
    """

    values: np.ndarray
    kind: str
    pairing: Optional[List[Tuple[int, int]]] = None
    phases: Optional[np.ndarray] = None

    @property
    def n(self) -> int:
        return self.values.shape[0]


def unitarity_defect(phi) -> float:
    """Frobenius distance of Phi Phi^H from the identity."""
    values = np.asarray(getattr(phi, "values", phi), dtype=complex)
    n = values.shape[0]
    return float(np.linalg.norm(values @ values.conj().T - np.eye(n)))


def identity_config(n: int) -> ScatteringMatrix:
    """Surface switched off: Phi = I contributes nothing beyond direct paths."""
    return ScatteringMatrix(values=np.eye(n, dtype=complex), kind="diagonal",
                            phases=np.zeros(n))


def diagonal_config(phases) -> ScatteringMatrix:
    """Conventional surface: diag(exp(j*phi_i)), symmetric and unitary."""
    phases = np.asarray(phases, dtype=float)
    values = np.diag(np.exp(1j * phases))
    return ScatteringMatrix(values=values, kind="diagonal", phases=phases)


def dual_unit(phi1: float, phi2: float) -> ScatteringMatrix:
    """Two-port non-reciprocal unit: [[0, e^{j phi1}], [e^{j phi2}, 0]]."""
    values = np.array([[0.0, np.exp(1j * phi1)],
                       [np.exp(1j * phi2), 0.0]], dtype=complex)
    return ScatteringMatrix(values=values, kind="nr-block", pairing=[(0, 1)],
                            phases=np.array([[phi1, phi2]]))


def nr_block_from_pairing(n: int, pairs: List[Tuple[int, int]],
                          phases: np.ndarray) -> ScatteringMatrix:
    """Assemble a block-structured non-reciprocal matrix from explicit pairs.

    ``pairs`` must cover every element exactly once; ``phases[p]`` gives the
    forward and reverse phase of pair p.
    """
    seen = set()
    for a, b in pairs:
        if a == b:
            raise ValueError("pairing must have no fixed points")
        seen.update((a, b))
    if seen != set(range(n)):
        raise ValueError("pairing must cover every element exactly once")
    phases = np.asarray(phases, dtype=float).reshape(len(pairs), 2)
    values = np.zeros((n, n), dtype=complex)
    for (a, b), (p_ab, p_ba) in zip(pairs, phases):
        values[a, b] = np.exp(1j * p_ab)
        values[b, a] = np.exp(1j * p_ba)
    return ScatteringMatrix(values=values, kind="nr-block",
                            pairing=list(pairs), phases=phases)


def sample_nr_block(n: int, l: int, phase_rule: str, rng: np.random.Generator) -> ScatteringMatrix:
    """Random block-structured non-reciprocal configuration.

    Each size-L block gets a uniformly random perfect pairing (shuffle, then
    adjacent elements pair up). Under the pi-offset rule the reverse phase of
    each pair is the forward phase minus pi, so paired entries negate each
    other; under the independent rule both phases are drawn separately.
    """
    if l % 2 != 0 or l < 2 or n % l != 0:
        raise ValueError(f"block size must be even and divide n (got l={l}, n={n})")
    if phase_rule not in ("pi-offset", "independent"):
        raise ValueError(f"unknown phase rule: {phase_rule}")
    firsts = []
    seconds = []
    fwd = []
    rev = []
    for g in range(n // l):
        order = g * l + rng.permutation(l)
        firsts.append(order[0::2])
        seconds.append(order[1::2])
        p_ab = rng.uniform(0.0, 2.0 * np.pi, l // 2)
        p_ba = p_ab - np.pi if phase_rule == "pi-offset" \
            else rng.uniform(0.0, 2.0 * np.pi, l // 2)
        fwd.append(p_ab)
        rev.append(p_ba)
    a_idx = np.concatenate(firsts)
    b_idx = np.concatenate(seconds)
    p_ab = np.concatenate(fwd)
    p_ba = np.concatenate(rev)
    values = np.zeros((n, n), dtype=complex)
    values[a_idx, b_idx] = np.exp(1j * p_ab)
    values[b_idx, a_idx] = np.exp(1j * p_ba)
    pairing = list(zip(a_idx.tolist(), b_idx.tolist()))
    return ScatteringMatrix(values=values, kind="nr-block", pairing=pairing,
                            phases=np.stack([p_ab, p_ba], axis=1))


def sample_nd_ris(n: int, rng: np.random.Generator) -> ScatteringMatrix:
    """Idealized non-diagonal surface: arbitrary permutation with i.i.d. phases."""
    if n < 1:
        raise ValueError("n must be at least 1")
    perm = rng.permutation(n)
    phases = rng.uniform(0.0, 2.0 * np.pi, n)
    values = np.zeros((n, n), dtype=complex)
    values[np.arange(n), perm] = np.exp(1j * phases)
    return ScatteringMatrix(values=values, kind="perm-phase", phases=phases)


def ha_objective(chan: ChannelSet, phi) -> float:
    """LoS-mismatch energy a candidate configuration would create.

    Sum over users of beta_k times the squared norm of the cascaded LoS
    difference between the uplink the BS will estimate and the downlink the
    users will see. Symmetric matrices score exactly zero.
    """
    values = np.asarray(getattr(phi, "values", phi), dtype=complex)
    pairing = getattr(phi, "pairing", None)
    if pairing:
        # sparse route: (values - values.T) has support only on the pairs
        a_idx = np.fromiter((p[0] for p in pairing), dtype=np.intp, count=len(pairing))
        b_idx = np.fromiter((p[1] for p in pairing), dtype=np.intp, count=len(pairing))
        d = values[a_idx, b_idx] - values[b_idx, a_idx]
        mixed = np.zeros((values.shape[0], chan.los_ur.shape[1]), dtype=complex)
        mixed[a_idx] = d[:, None] * chan.los_ur[b_idx]
        mixed[b_idx] = -d[:, None] * chan.los_ur[a_idx]
        cascades = chan.los_rb @ mixed
    else:
        diff = values - values.T
        cascades = chan.los_rb @ (diff @ chan.los_ur)
    return float(np.sum(chan.beta_k * np.sum(np.abs(cascades) ** 2, axis=0)))


def ha_search(chan: ChannelSet, num_candidates: int, n: int, l: int,
              rng: np.random.Generator, phase_rule: str = "pi-offset",
              return_scores: bool = False):
    """Knowledge-driven configuration search: argmax of ha_objective.

    Draws ``num_candidates`` block-structured candidates and keeps the one
    with the largest LoS-mismatch energy. Deterministic given the channel set
    and generator state.
    """
    if num_candidates < 1:
        raise ValueError("num_candidates must be at least 1")
    best = None
    best_score = -np.inf
    scores = np.empty(num_candidates)
    for c in range(num_candidates):
        candidate = sample_nr_block(n, l, phase_rule, rng)
        score = ha_objective(chan, candidate)
        scores[c] = score
        if score > best_score:
            best, best_score = candidate, score
    if return_scores:
        return best, scores
    return best


@dataclass
class AttackSchedule:
    """Configurations the surface applies in one coherence block.

    ``phi_pt`` is active while the BS estimates the uplink; ``phi_dt`` lists
    the configurations cycled through during the downlink phase (one entry
    unless the strategy switches within the block). ``jam`` marks an active
    jammer aimed at the users.
    """

    phi_pt: ScatteringMatrix
    phi_dt: List[ScatteringMatrix]
    jam: bool = False


def attack_schedule(strategy: str, block_index: int, config: ScenarioConfig,
                    chan: Optional[ChannelSet], rng: np.random.Generator,
                    memo: Optional[dict] = None) -> AttackSchedule:
    """Build the surface schedule for one coherence block.

    The knowledge-driven strategy holds its searched configuration for
    ``ha_hold`` consecutive blocks; the winner is derived entirely from the
    anchor block's substreams, so any block of the group reproduces it
    without outside state. ``memo`` optionally caches winners per anchor.
    """
    n, l = config.n, config.l
    if strategy == "none":
        ident = identity_config(n)
        return AttackSchedule(ident, [ident])
    if strategy == "nr-blind":
        phi = sample_nr_block(n, l, config.nr_phase_rule, rng)
        return AttackSchedule(phi, [phi])
    if strategy == "nr-ha":
        anchor = config.ha_hold * (block_index // config.ha_hold)
        phi = None if memo is None else memo.get(anchor)
        if phi is None:
            if anchor == block_index and chan is not None:
                anchor_chan = chan
            else:
                anchor_chan = channel_set_for_trial(config, anchor)
            phi = ha_search(anchor_chan, config.ha_candidates, n, l,
                            derive_rng(config, "attack", anchor),
                            config.nr_phase_rule)
            if memo is not None:
                memo[anchor] = phi
        return AttackSchedule(phi, [phi])
    if strategy == "nd-ris":
        phi = sample_nd_ris(n, rng)
        return AttackSchedule(phi, [phi])
    if strategy == "dris1":
        pt = diagonal_config(rng.uniform(0.0, 2.0 * np.pi, n))
        dt = diagonal_config(rng.uniform(0.0, 2.0 * np.pi, n))
        return AttackSchedule(pt, [dt])
    if strategy == "dris2":
        dt = diagonal_config(rng.uniform(0.0, 2.0 * np.pi, n))
        return AttackSchedule(identity_config(n), [dt])
    if strategy == "dris3":
        pt = diagonal_config(rng.uniform(0.0, 2.0 * np.pi, n))
        dts = [diagonal_config(rng.uniform(0.0, 2.0 * np.pi, n))
               for _ in range(config.dris3_subslots)]
        return AttackSchedule(pt, dts)
    if strategy == "jammer":
        ident = identity_config(n)
        return AttackSchedule(ident, [ident], jam=True)
    raise ValueError(f"unknown strategy: {strategy!r} (choose from {STRATEGIES})")


def matrix_to_text(phi: ScatteringMatrix) -> str:
    """Serialize to the debug text format: header, then one row per line,
    one complex entry per cell, row-major."""
    lines = [f"n {phi.n} kind {phi.kind}"]
    for row in phi.values:
        lines.append(" ".join(f"{z.real:.17g}{z.imag:+.17g}j" for z in row))
    return "\n".join(lines) + "\n"


def matrix_from_text(text: str) -> ScatteringMatrix:
    """Parse the debug text format back into a ScatteringMatrix."""
    lines = [ln for ln in text.splitlines() if ln.strip()]
    header = lines[0].split()
    if len(header) != 4 or header[0] != "n" or header[2] != "kind":
        raise ValueError(f"bad matrix header: {lines[0]!r}")
    n = int(header[1])
    kind = header[3]
    if kind not in KINDS:
        raise ValueError(f"unknown matrix kind: {kind}")
    if len(lines) != n + 1:
        raise ValueError(f"expected {n} rows, got {len(lines) - 1}")
    values = np.array([[complex(cell) for cell in ln.split()] for ln in lines[1:]],
                      dtype=complex)
    if values.shape != (n, n):
        raise ValueError(f"expected {n}x{n} entries, got {values.shape}")
    return ScatteringMatrix(values=values, kind=kind)
