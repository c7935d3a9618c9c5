"""Fast invariant suite runnable from the command line.

Exercises the structural properties the rest of the system leans on, at
small sizes so the whole suite finishes in seconds. Each check returns its
name, a pass flag and a short detail string.
"""

from __future__ import annotations

import json

import numpy as np

from .channel import (channel_set_for_trial, downlink_actual, uplink_composite)
from .env_bridge import (EnvAction, PrecodingEnv, ProtocolSession,
                         decode_action)
from .precoding import mrt, normalize_power, zf
from .ris import (diagonal_config, dual_unit, matrix_from_text,
                  matrix_to_text, nr_block_from_pairing, sample_nd_ris,
                  sample_nr_block, unitarity_defect)
from .scenario import default_config, derive_rng
from .tdd_sim import monte_carlo


def _small_config():
    return default_config(m=8, k=2, n=8, l=4, trials=5, seed=7)


def _symmetric_pairing(n, rng):
    # paired structure with equal forward/reverse phases stays symmetric
    order = rng.permutation(n)
    pairs = [(int(a), int(b)) for a, b in order.reshape(-1, 2)]
    phases = np.repeat(rng.uniform(0, 2 * np.pi, (len(pairs), 1)), 2, axis=1)
    return nr_block_from_pairing(n, pairs, phases)


def run_selfcheck(config=None) -> list:
    cfg = config if config is not None else _small_config()
    results = []

    def record(name, ok, detail=""):
        results.append((name, bool(ok), detail))

    rng = derive_rng(cfg, "selfcheck", 0)
    worst_sym = 0.0
    worst_nr = np.inf
    for t in range(20):
        chan = channel_set_for_trial(cfg, t)
        up = uplink_composite
        for phi in (diagonal_config(rng.uniform(0, 2 * np.pi, cfg.n)),
                    _symmetric_pairing(cfg.n, rng)):
            gap = np.linalg.norm(downlink_actual(chan, phi) - up(chan, phi).T)
            worst_sym = max(worst_sym, gap / np.linalg.norm(up(chan, phi)))
        phi_nr = sample_nr_block(cfg.n, cfg.l, "pi-offset", rng)
        gap = np.linalg.norm(downlink_actual(chan, phi_nr) - up(chan, phi_nr).T)
        worst_nr = min(worst_nr, gap / np.linalg.norm(up(chan, phi_nr)))
    record("reciprocity-symmetric", worst_sym < 1e-12, f"worst ratio {worst_sym:.2e}")
    record("reciprocity-broken-by-nr", worst_nr > 1e-3, f"smallest ratio {worst_nr:.2e}")

    defects = [unitarity_defect(sample_nr_block(cfg.n, cfg.l, "pi-offset", rng)),
               unitarity_defect(sample_nd_ris(cfg.n, rng)),
               unitarity_defect(diagonal_config(rng.uniform(0, 7, cfg.n))),
               unitarity_defect(dual_unit(0.3, 2.0))]
    record("unitarity", max(defects) < 1e-10, f"max defect {max(defects):.2e}")

    phi = sample_nr_block(cfg.n, cfg.l, "pi-offset", rng)
    mags = np.abs(phi.values)
    structure_ok = (np.allclose(mags.sum(axis=0), 1.0) and
                    np.allclose(mags.sum(axis=1), 1.0) and
                    np.all(np.diag(mags) == 0.0))
    record("nr-block-structure", structure_ok, "one unit entry per row/col, zero diagonal")

    chan = channel_set_for_trial(cfg, 0)
    h_up = uplink_composite(chan, diagonal_config(np.zeros(cfg.n)))
    prec = zf(h_up, cfg.p_total)
    coupling = h_up.T @ prec.W
    off = np.abs(coupling - np.diag(np.diag(coupling))).max()
    record("zf-nulling", off < 1e-8 * abs(prec.xi), f"max off-diagonal {off:.2e}")

    powers = [abs(p.power - cfg.p_total) / cfg.p_total
              for p in (prec, mrt(h_up, cfg.p_total),
                        normalize_power(h_up, cfg.p_total))]
    record("power-constraint", max(powers) < 1e-9, f"max relative error {max(powers):.2e}")

    rep_a = monte_carlo(cfg, "nr-blind", "zf", trials=5)
    rep_b = monte_carlo(cfg, "nr-blind", "zf", trials=5)
    record("monte-carlo-determinism",
           rep_a.sum_rate == rep_b.sum_rate and rep_a.sop == rep_b.sop,
           f"sum rate {rep_a.sum_rate:.6f}")

    action = EnvAction(w_amp=np.full((cfg.m, cfg.k), 0.5),
                       w_phase=np.zeros((cfg.m, cfg.k)))
    dec = decode_action(action, cfg.p_total)
    record("env-decode-power", abs(dec.power - cfg.p_total) / cfg.p_total < 1e-9,
           f"power {dec.power:.6f}")

    session = ProtocolSession(PrecodingEnv(cfg, "none"))
    ok = True
    for line in ('{"cmd":"config"}', '{"cmd":"reset","seed":3}',
                 '{"cmd":"step","action":{"amp":' +
                 json.dumps(action.w_amp.tolist()) + ',"phase":' +
                 json.dumps(action.w_phase.tolist()) + '}}',
                 '{"cmd":"close"}'):
        reply = json.loads(session.handle_line(line))
        ok = ok and reply.get("ok") is True
    bad = json.loads(session.handle_line("not json"))
    ok = ok and bad.get("ok") is False
    record("wire-session", ok, "config/reset/step/close plus malformed line")

    restored = matrix_from_text(matrix_to_text(phi))
    record("matrix-text-roundtrip",
           np.array_equal(restored.values, phi.values) and restored.kind == phi.kind,
           "entries survive serialization exactly")

    return results
