"""Clipped-surrogate policy updates.

Targets come from one-step bootstrapping, V_target(s_t) = r_t + gamma
V(s_{t+1}); with gamma 0 the target is the reward itself and the advantage
is r_t - V(s_t). Advantages are standardized once per buffer. Actor and
critic take separate Adam steps on each minibatch.
"""

from __future__ import annotations

from typing import Optional

import numpy as np
import torch

# exp of a large log-ratio would overflow; transitions this far off-policy
# are fully clipped anyway, so flattening their gradient loses nothing
LOG_RATIO_BOUND = 20.0


def td_targets(rewards: torch.Tensor, next_values: torch.Tensor,
               gamma: float) -> torch.Tensor:
    return rewards + gamma * next_values


def standardize(x: torch.Tensor, eps: float = 1e-8) -> torch.Tensor:
    return (x - x.mean()) / (x.std(correction=0) + eps)


def clipped_objective(ratio: torch.Tensor, advantages: torch.Tensor,
                      clip_eps: float) -> torch.Tensor:
    """Per-transition pessimistic surrogate min(rho A, clip(rho) A)."""
    clipped = ratio.clamp(1.0 - clip_eps, 1.0 + clip_eps)
    return torch.minimum(ratio * advantages, clipped * advantages)


def ppo_update(policy, opt_actor, opt_critic, batch: dict,
               clip_eps: float = 0.2, entropy_beta: float = 1e-4,
               epochs: int = 10, minibatch: int = 256,
               generator: Optional[torch.Generator] = None) -> dict:
    """Several passes over one buffer in shuffled minibatches.

    batch holds states, actions, log_probs (collection-time), advantages
    (raw), v_targets, all torch tensors on the first dimension together.
    Returns mean diagnostics over all minibatches.
    """
    states = batch["states"]
    actions = batch["actions"]
    old_log_probs = batch["log_probs"]
    v_targets = batch["v_targets"]
    advantages = standardize(batch["advantages"])
    n = states.shape[0]
    if n == 0:
        raise ValueError("empty update buffer")
    stats: dict = {"ratio": [], "clip_fraction": [], "entropy": [],
                   "actor_loss": [], "critic_loss": []}
    for _ in range(epochs):
        perm = torch.randperm(n, generator=generator)
        for lo in range(0, n, minibatch):
            idx = perm[lo:lo + minibatch]
            log_probs, entropy, values = policy.evaluate(states[idx], actions[idx])
            log_ratio = (log_probs - old_log_probs[idx]).clamp(
                -LOG_RATIO_BOUND, LOG_RATIO_BOUND)
            ratio = torch.exp(log_ratio)
            surrogate = clipped_objective(ratio, advantages[idx], clip_eps).mean()
            actor_loss = -(surrogate + entropy_beta * entropy.mean())
            opt_actor.zero_grad()
            actor_loss.backward()
            opt_actor.step()
            critic_loss = torch.mean((values - v_targets[idx]) ** 2)
            opt_critic.zero_grad()
            critic_loss.backward()
            opt_critic.step()
            with torch.no_grad():
                stats["ratio"].append(float(ratio.mean()))
                stats["clip_fraction"].append(float(
                    (torch.abs(ratio - 1.0) > clip_eps).float().mean()))
                stats["entropy"].append(float(entropy.mean()))
                stats["actor_loss"].append(float(actor_loss))
                stats["critic_loss"].append(float(critic_loss))
    return {key: float(np.mean(vals)) for key, vals in stats.items()}
