"""Beta policy on the unit hypercube.

Each action coordinate has its own Beta distribution; the joint log
probability is the sum of the marginals'. Deterministic mode returns the
distribution mean, which is what evaluation uses.
"""

from __future__ import annotations

from typing import Tuple

import numpy as np
import torch
from torch.distributions import Beta

# keep log densities finite at the support edges
ACTION_EPS = 1e-6


def state_tensor(state: np.ndarray) -> torch.Tensor:
    return torch.as_tensor(np.asarray(state), dtype=torch.float32).unsqueeze(0)


class BetaPolicy:
    """Actor/critic pair with sampling, deterministic action, and the
    gradient-carrying batch evaluation used by updates."""

    def __init__(self, actor, critic):
        self.actor = actor
        self.critic = critic

    def distribution(self, states: torch.Tensor) -> Beta:
        a, b = self.actor(states)
        return Beta(a, b)

    @torch.no_grad()
    def act(self, state: np.ndarray,
            deterministic: bool = False) -> Tuple[np.ndarray, float, float]:
        """One action for one state: (action, log_prob, value)."""
        st = state_tensor(state)
        dist = self.distribution(st)
        action = dist.mean if deterministic else dist.sample()
        action = action.clamp(ACTION_EPS, 1.0 - ACTION_EPS)
        log_prob = dist.log_prob(action).sum(-1)
        value = self.critic(st)
        return (action.squeeze(0).numpy().astype(np.float64),
                float(log_prob.item()), float(value.item()))

    @torch.no_grad()
    def value(self, state: np.ndarray) -> float:
        return float(self.critic(state_tensor(state)).item())

    def evaluate(self, states: torch.Tensor, actions: torch.Tensor):
        """Log-probs, entropies, and values for an update minibatch."""
        dist = self.distribution(states)
        acts = actions.clamp(ACTION_EPS, 1.0 - ACTION_EPS)
        log_probs = dist.log_prob(acts).sum(-1)
        entropy = dist.entropy().sum(-1)
        values = self.critic(states)
        return log_probs, entropy, values
