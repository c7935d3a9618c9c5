"""Episodic decision environment over the simulator, plus a wire protocol.

State is the uplink CSI the BS just estimated, split into scaled amplitudes
and phases; the action is a precoding matrix in the same amplitude/phase
form, normalized to the power budget on decode; the reward is the sum over
users of ln(1 + rate). Every step faces a fresh coherence block, so with an
undiscounted objective the problem is effectively per-step and the horizon
only structures rollout batching.

The wire protocol is newline-delimited JSON over stdio or TCP: requests are
{"cmd":"config"}, {"cmd":"reset","seed":int}, {"cmd":"step","action":
{"amp":[[...]],"phase":[[...]]}} and {"cmd":"close"}; replies carry ok plus
state/reward/done/info, or ok:false with an error message. Malformed lines
get an error reply and the session continues.
"""

from __future__ import annotations

import dataclasses
import json
import socket
import sys
from dataclasses import dataclass
from typing import Optional, Tuple

import numpy as np

from .channel import channel_set_for_trial, uplink_composite
from .precoding import Precoder, normalize_power
from .ris import attack_schedule
from .scenario import STRATEGIES, ScenarioConfig, derive_rng
from .tdd_sim import run_block


@dataclass
class EnvState:
    """Encoded uplink CSI: amplitudes scaled to O(1), phases in [0, 1)."""

    amp: np.ndarray
    phase: np.ndarray
    t: int
    horizon: int


@dataclass
class EnvAction:
    """Precoder in amplitude/phase form, every entry in [0, 1]."""

    w_amp: np.ndarray
    w_phase: np.ndarray


def amp_scale(config: ScenarioConfig) -> float:
    """Fixed amplitude normalization: root of the direct-link path gain at
    the user-region center, so typical state amplitudes are order one."""
    center = np.asarray(config.user_center, float)
    bs = np.asarray(config.bs_pos, float)
    d = float(np.linalg.norm(bs - center))
    return float(np.sqrt(config.rho * d ** (-config.iota_kb)))


def encode_state(H_up: np.ndarray, a0: float, t: int, horizon: int) -> EnvState:
    amp = np.abs(H_up) / a0
    phase = np.mod(np.angle(H_up) / (2.0 * np.pi), 1.0)
    phase = np.where(phase >= 1.0, phase - 1.0, phase)
    return EnvState(amp=amp, phase=phase, t=t, horizon=horizon)


def decode_action(action: EnvAction, p_total: float) -> Precoder:
    """Rebuild the precoding matrix: amplitudes set the power split across
    entries, phases rotate each entry, total power is pinned to p_total."""
    amp = np.asarray(action.w_amp, dtype=float)
    phase = np.asarray(action.w_phase, dtype=float)
    if amp.shape != phase.shape:
        raise ValueError("amplitude and phase shapes differ")
    if not np.all(np.isfinite(amp)) or not np.all(np.isfinite(phase)):
        raise ValueError("action entries must be finite")
    if amp.min() < 0.0 or amp.max() > 1.0 or phase.min() < 0.0 or phase.max() > 1.0:
        raise ValueError("action entries must lie in [0, 1]")
    if not amp.any():
        raise ValueError("action amplitude is all zero")
    raw = amp * np.exp(2j * np.pi * phase)
    return normalize_power(raw, p_total)


class PrecodingEnv:
    """Single-session environment: one episode is ``episode_steps`` fresh
    coherence blocks under a fixed attack strategy."""

    def __init__(self, config: ScenarioConfig, strategy: str = "nr-blind"):
        if strategy not in STRATEGIES:
            raise ValueError(f"unknown strategy: {strategy!r} (choose from {STRATEGIES})")
        self.config = config
        self.strategy = strategy
        self.a0 = amp_scale(config)
        self._cfg_run: Optional[ScenarioConfig] = None
        self._t = 0
        self._done = True
        self._memo: dict = {}
        self._chan = None
        self._schedule = None

    def _prepare_block(self, t: int) -> EnvState:
        cfg = self._cfg_run
        self._chan = channel_set_for_trial(cfg, t)
        self._schedule = attack_schedule(self.strategy, t, cfg, self._chan,
                                         derive_rng(cfg, "attack", t), self._memo)
        h_up = uplink_composite(self._chan, self._schedule.phi_pt)
        return encode_state(h_up, self.a0, t, cfg.episode_steps)

    def reset(self, seed: Optional[int] = None) -> EnvState:
        run_seed = self.config.seed if seed is None else int(seed)
        self._cfg_run = dataclasses.replace(self.config, seed=run_seed)
        self._memo = {}
        self._t = 0
        self._done = False
        return self._prepare_block(0)

    def step(self, action: EnvAction) -> Tuple[EnvState, float, bool, dict]:
        if self._cfg_run is None:
            raise RuntimeError("reset the environment before stepping")
        if self._done:
            raise RuntimeError("episode finished, call reset")
        prec = decode_action(action, self._cfg_run.p_total)
        report = run_block(self._cfg_run, self._chan, self._schedule,
                           external_w=prec)
        reward = float(np.log1p(report.rate).sum())
        info = {
            "rates": [float(x) for x in report.rate],
            "sum_rate": float(report.sum_rate),
            "secrecy_rates": [float(x) for x in report.secrecy_rate],
            "sum_secrecy": float(report.sum_secrecy),
            "eve_rates": [float(x) for x in report.eve_rate],
            "outage": [bool(x) for x in report.outage],
        }
        self._t += 1
        done = self._t >= self._cfg_run.episode_steps
        self._done = done
        next_state = self._prepare_block(self._t)
        return next_state, reward, done, info


def _dump(obj) -> str:
    return json.dumps(obj, sort_keys=True, separators=(",", ":"))


class ProtocolSession:
    """Line-oriented request handler around one environment instance."""

    def __init__(self, env: PrecodingEnv):
        self.env = env
        self.closed = False

    def _state_payload(self, state: EnvState) -> dict:
        return {"amp": state.amp.tolist(), "phase": state.phase.tolist(),
                "t": state.t, "horizon": state.horizon}

    def handle_line(self, line: str) -> str:
        try:
            msg = json.loads(line)
        except json.JSONDecodeError as exc:
            return _dump({"ok": False, "error": f"bad json: {exc.msg}"})
        if not isinstance(msg, dict) or "cmd" not in msg:
            return _dump({"ok": False, "error": "message must be an object with a cmd field"})
        cmd = msg["cmd"]
        try:
            if cmd == "config":
                payload = dataclasses.asdict(self.env.config)
                payload.update({"ok": True, "strategy": self.env.strategy,
                                "amp_scale": self.env.a0})
                return _dump(payload)
            if cmd == "reset":
                seed = msg.get("seed")
                if seed is not None and not isinstance(seed, int):
                    return _dump({"ok": False, "error": "seed must be an integer"})
                state = self.env.reset(seed)
                return _dump({"ok": True, "state": self._state_payload(state),
                              "reward": None, "done": False, "info": {}})
            if cmd == "step":
                action = msg.get("action")
                if not isinstance(action, dict) or "amp" not in action or "phase" not in action:
                    return _dump({"ok": False, "error": "step needs action.amp and action.phase"})
                env_action = EnvAction(w_amp=np.asarray(action["amp"], dtype=float),
                                       w_phase=np.asarray(action["phase"], dtype=float))
                expected = (self.env.config.m, self.env.config.k)
                if env_action.w_amp.shape != expected or env_action.w_phase.shape != expected:
                    return _dump({"ok": False,
                                  "error": f"action matrices must be {expected[0]}x{expected[1]}"})
                state, reward, done, info = self.env.step(env_action)
                return _dump({"ok": True, "state": self._state_payload(state),
                              "reward": reward, "done": done, "info": info})
            if cmd == "close":
                self.closed = True
                return _dump({"ok": True})
            return _dump({"ok": False, "error": f"unknown cmd: {cmd}"})
        except (ValueError, RuntimeError) as exc:
            return _dump({"ok": False, "error": str(exc)})


def serve_stdio(config: ScenarioConfig, strategy: str = "nr-blind",
                stdin=None, stdout=None) -> None:
    """Serve one protocol session over standard input and output."""
    stdin = sys.stdin if stdin is None else stdin
    stdout = sys.stdout if stdout is None else stdout
    session = ProtocolSession(PrecodingEnv(config, strategy))
    for line in stdin:
        stdout.write(session.handle_line(line.rstrip("\n")) + "\n")
        stdout.flush()
        if session.closed:
            break


def serve_tcp(config: ScenarioConfig, strategy: str = "nr-blind",
              host: str = "127.0.0.1", port: int = 0,
              max_connections: Optional[int] = None, announce=print) -> None:
    """Serve the protocol over TCP, one session per connection, sequentially."""
    server = socket.create_server((host, port))
    actual_port = server.getsockname()[1]
    announce(f"listening on {host}:{actual_port}")
    served = 0
    try:
        while max_connections is None or served < max_connections:
            conn, _ = server.accept()
            served += 1
            session = ProtocolSession(PrecodingEnv(config, strategy))
            with conn, conn.makefile("r", encoding="utf-8") as reader:
                for line in reader:
                    reply = session.handle_line(line.rstrip("\n")) + "\n"
                    conn.sendall(reply.encode("utf-8"))
                    if session.closed:
                        break
    except KeyboardInterrupt:
        pass
    finally:
        server.close()
