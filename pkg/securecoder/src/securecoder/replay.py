"""Episode storage and high-reward retention.

Each update cycle trains on the fresh rollout plus the top fraction of the
previous cycle's episodes ranked by return. Retained episodes carry their
original log-probabilities and collection-time value estimates, and live at
most one extra cycle.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Dict, List

import numpy as np


@dataclass
class Episode:
    states: np.ndarray       # (T, 2, m, k) float32
    actions: np.ndarray      # (T, action_dim) float32
    log_probs: np.ndarray    # (T,)
    rewards: np.ndarray      # (T,)
    values: np.ndarray       # (T,) critic estimates at collection time
    next_values: np.ndarray  # (T,) critic on the successor states

    @property
    def episode_return(self) -> float:
        return float(self.rewards.sum())


def to_batch(episodes: List[Episode], gamma: float) -> Dict[str, np.ndarray]:
    """Stack transitions and attach targets and raw advantages computed from
    the stored collection-time values."""
    if not episodes:
        raise ValueError("no episodes to batch")
    rewards = np.concatenate([e.rewards for e in episodes])
    values = np.concatenate([e.values for e in episodes])
    next_values = np.concatenate([e.next_values for e in episodes])
    v_targets = rewards + gamma * next_values
    return {
        "states": np.concatenate([e.states for e in episodes]),
        "actions": np.concatenate([e.actions for e in episodes]),
        "log_probs": np.concatenate([e.log_probs for e in episodes]),
        "v_targets": v_targets,
        "advantages": v_targets - values,
    }


class HighRewardReplay:
    """Stashes each cycle's episodes and hands the best of them to the next
    cycle's buffer."""

    def __init__(self, fraction: float):
        if not 0.0 <= fraction <= 1.0:
            raise ValueError(f"fraction must lie in [0, 1], got {fraction}")
        self.fraction = fraction
        self._previous: List[Episode] = []

    def select(self, fresh: List[Episode]) -> List[Episode]:
        """Fresh episodes plus the retained top fraction of last cycle's;
        afterwards the stash holds only this cycle's episodes."""
        keep = int(len(self._previous) * self.fraction + 1e-9)
        ranked = sorted(self._previous, key=lambda e: e.episode_return,
                        reverse=True)
        buffer = list(fresh) + ranked[:keep]
        self._previous = list(fresh)
        return buffer
