"""Training loop, evaluation, checkpoints, learning-curve output.

One cycle collects episodes until the buffer reaches the batch size, builds
the update batch (fresh episodes plus retained high-reward ones), and runs
the clipped-surrogate update. Ablations: "standard" is the flat-MLP body
with no retention, "cnn" adds the convolutional encoder, "enhanced" adds
high-reward retention on top.
"""

from __future__ import annotations

import csv
import dataclasses
import math
import os
from typing import Callable, List, Optional, Tuple

import numpy as np
import torch

from .envclient import ProtocolError
from .nets import build_actor_critic
from .policy import BetaPolicy
from .ppo import ppo_update
from .replay import Episode, HighRewardReplay, to_batch

ABLATIONS = ("standard", "cnn", "enhanced")
CURVE_WINDOW = 50


@dataclasses.dataclass
class TrainConfig:
    episodes: int = 500
    ablation: str = "enhanced"
    batch_size: int = 2000
    minibatch: int = 256
    epochs: int = 10
    clip_eps: float = 0.2
    entropy_beta: float = 1e-4
    learning_rate: float = 0.005
    momentum: float = 0.99
    gamma: float = 0.0
    per_fraction: float = 0.25
    hidden: int = 256
    seed: int = 0
    env_seed_base: int = 1000
    out_dir: Optional[str] = None

    def __post_init__(self):
        if self.ablation not in ABLATIONS:
            raise ValueError(f"unknown ablation: {self.ablation!r} "
                             f"(choose from {ABLATIONS})")
        if self.episodes < 1:
            raise ValueError("episodes must be positive")


@dataclasses.dataclass
class TrainResult:
    returns: np.ndarray
    policy: BetaPolicy
    diagnostics: List[dict]
    config: TrainConfig

    def final_mean(self, window: int = CURVE_WINDOW) -> float:
        return float(self.returns[-window:].mean())


def _arch_and_fraction(cfg: TrainConfig) -> Tuple[str, float]:
    if cfg.ablation == "standard":
        return "mlp", 0.0
    if cfg.ablation == "cnn":
        return "cnn", 0.0
    return "cnn", cfg.per_fraction


def collect_episode(env, policy: BetaPolicy, seed: int,
                    deterministic: bool = False) -> Tuple[Episode, List[dict]]:
    """Roll one episode; returns the stored trajectory and per-step infos."""
    state = env.reset(seed)
    m, k = env.m, env.k
    states, actions, log_probs, rewards, values, infos = [], [], [], [], [], []
    for _ in range(env.horizon):
        action, log_prob, value = policy.act(state, deterministic)
        w = action.reshape(2, m, k)
        next_state, reward, done, info = env.step(w[0], w[1])
        states.append(np.asarray(state, dtype=np.float32))
        actions.append(action.astype(np.float32))
        log_probs.append(log_prob)
        rewards.append(reward)
        values.append(value)
        infos.append(info)
        state = next_state
        if done:
            break
    # successor values: each state's value is the next step's stored one,
    # only the final successor needs a fresh critic pass
    next_values = values[1:] + [policy.value(state)]
    episode = Episode(states=np.stack(states),
                      actions=np.stack(actions),
                      log_probs=np.asarray(log_probs, dtype=np.float32),
                      rewards=np.asarray(rewards, dtype=np.float32),
                      values=np.asarray(values, dtype=np.float32),
                      next_values=np.asarray(next_values, dtype=np.float32))
    return episode, infos


def _to_torch(batch: dict) -> dict:
    return {key: torch.as_tensor(val, dtype=torch.float32)
            for key, val in batch.items()}


def train(env, cfg: TrainConfig,
          log: Optional[Callable[[str], None]] = None) -> TrainResult:
    torch.manual_seed(cfg.seed)
    arch, fraction = _arch_and_fraction(cfg)
    actor, critic = build_actor_critic(env.m, env.k, arch, cfg.hidden)
    policy = BetaPolicy(actor, critic)
    # an adaptive optimizer at this rate shoves the joint density of a
    # many-dimensional action past the clip range within one cycle (ratios
    # collapse, everything clips). Dampened momentum keeps the step at the
    # configured rate while averaging minibatch gradients over roughly a
    # cycle, which the noisy many-dimensional credit assignment needs.
    opt_actor = torch.optim.SGD(actor.parameters(), lr=cfg.learning_rate,
                                momentum=cfg.momentum, dampening=cfg.momentum)
    # the critic is plain regression, safe under an adaptive step
    opt_critic = torch.optim.Adam(critic.parameters(), lr=cfg.learning_rate)
    replay = HighRewardReplay(fraction)
    per_cycle = max(1, math.ceil(cfg.batch_size / env.horizon))
    returns: List[float] = []
    diagnostics: List[dict] = []
    fresh: List[Episode] = []
    for z in range(cfg.episodes):
        try:
            episode, _ = collect_episode(env, policy, cfg.env_seed_base + z)
        except ProtocolError as exc:
            raise ProtocolError(f"episode {z}: {exc}") from exc
        fresh.append(episode)
        returns.append(episode.episode_return)
        if len(fresh) >= per_cycle:
            batch = _to_torch(to_batch(replay.select(fresh), cfg.gamma))
            diagnostics.append(ppo_update(
                policy, opt_actor, opt_critic, batch,
                clip_eps=cfg.clip_eps, entropy_beta=cfg.entropy_beta,
                epochs=cfg.epochs, minibatch=cfg.minibatch))
            fresh = []
            if cfg.out_dir:
                # refresh the artifacts after every update so long runs can
                # be inspected or resumed from mid-flight
                os.makedirs(cfg.out_dir, exist_ok=True)
                write_curve(os.path.join(cfg.out_dir, "curve.csv"),
                            np.asarray(returns, dtype=float))
                save_checkpoint(os.path.join(cfg.out_dir, "checkpoint.pt"),
                                policy, env.m, env.k, cfg)
            if log:
                window = returns[-per_cycle:]
                log(f"episode {z + 1}: cycle return mean "
                    f"{float(np.mean(window)):.3f}, entropy "
                    f"{diagnostics[-1]['entropy']:.1f}")
    result = TrainResult(returns=np.asarray(returns, dtype=float),
                         policy=policy, diagnostics=diagnostics, config=cfg)
    if cfg.out_dir:
        os.makedirs(cfg.out_dir, exist_ok=True)
        write_curve(os.path.join(cfg.out_dir, "curve.csv"), result.returns)
        save_checkpoint(os.path.join(cfg.out_dir, "checkpoint.pt"),
                        policy, env.m, env.k, cfg)
    return result


def moving_average(x: np.ndarray, window: int = CURVE_WINDOW) -> np.ndarray:
    """Trailing mean over up to `window` points, defined from the start."""
    sums = np.concatenate([[0.0], np.cumsum(x, dtype=float)])
    idx = np.arange(1, len(x) + 1)
    lo = np.maximum(idx - window, 0)
    return (sums[idx] - sums[lo]) / (idx - lo)


def write_curve(path: str, returns: np.ndarray) -> None:
    ma = moving_average(returns)
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["episode", "return", f"ma{CURVE_WINDOW}"])
        for i, (r, m) in enumerate(zip(returns, ma)):
            writer.writerow([i, repr(float(r)), repr(float(m))])


def save_checkpoint(path: str, policy: BetaPolicy, m: int, k: int,
                    cfg: TrainConfig) -> None:
    arch, _ = _arch_and_fraction(cfg)
    torch.save({"actor": policy.actor.state_dict(),
                "critic": policy.critic.state_dict(),
                "m": m, "k": k, "arch": arch, "hidden": cfg.hidden,
                "ablation": cfg.ablation}, path)


def load_checkpoint(path: str) -> Tuple[BetaPolicy, dict]:
    blob = torch.load(path, map_location="cpu", weights_only=True)
    actor, critic = build_actor_critic(blob["m"], blob["k"], blob["arch"],
                                       blob["hidden"])
    actor.load_state_dict(blob["actor"])
    critic.load_state_dict(blob["critic"])
    meta = {key: blob[key] for key in ("m", "k", "arch", "hidden", "ablation")}
    return BetaPolicy(actor, critic), meta


def evaluate(env, policy: BetaPolicy, episodes: int, seed_base: int = 10 ** 6,
             deterministic: bool = True) -> dict:
    """Mean return, mean sum rate, and outage fractions over fresh seeds."""
    returns, sum_rates = [], []
    user_outages, block_outages = [], []
    for i in range(episodes):
        episode, infos = collect_episode(env, policy, seed_base + i,
                                         deterministic=deterministic)
        returns.append(episode.episode_return)
        for info in infos:
            if "sum_rate" in info:
                sum_rates.append(float(info["sum_rate"]))
            if "outage" in info:
                flags = [bool(x) for x in info["outage"]]
                user_outages.extend(flags)
                block_outages.append(any(flags))
    return {
        "episodes": episodes,
        "mean_return": float(np.mean(returns)),
        "mean_sum_rate": float(np.mean(sum_rates)) if sum_rates else float("nan"),
        "sop": float(np.mean(user_outages)) if user_outages else float("nan"),
        "sop_any_user": float(np.mean(block_outages)) if block_outages else float("nan"),
        "returns": np.asarray(returns, dtype=float),
    }
