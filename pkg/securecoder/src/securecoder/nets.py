"""Actor and critic networks.

The state is a 2 x M x K tensor (channel amplitudes and phases). The default
encoder runs it through two small convolutions before the heads; a flat MLP
body with the same heads serves as the no-convolution ablation. Actor and
critic never share parameters.
"""

from __future__ import annotations

from typing import Tuple

import torch
import torch.nn as nn
import torch.nn.functional as F

ARCHS = ("mlp", "cnn")


def condition(x: torch.Tensor) -> torch.Tensor:
    """Squash the raw state before the first layer: amplitudes are positive
    with a long tail (log1p keeps them near unit scale), phases live in
    [0, 1) and get centered."""
    return torch.stack([torch.log1p(x[:, 0]), x[:, 1] - 0.5], dim=1)


class CnnEncoder(nn.Module):
    """conv(2->16, 3x3, pad 1) -> tanh -> conv(16->32, 3x3) -> flatten -> fc."""

    def __init__(self, m: int, k: int, hidden: int = 256):
        super().__init__()
        # second conv is unpadded, so the state must be at least 3x3
        if m < 3 or k < 3:
            raise ValueError(f"state must be at least 3x3 for the conv encoder, got {m}x{k}")
        self.conv1 = nn.Conv2d(2, 16, kernel_size=3, stride=1, padding=1)
        self.conv2 = nn.Conv2d(16, 32, kernel_size=3)
        self.fc = nn.Linear(32 * (m - 2) * (k - 2), hidden)
        self.out_dim = hidden

    def forward(self, x: torch.Tensor) -> torch.Tensor:
        h = torch.tanh(self.conv1(condition(x)))
        h = torch.tanh(self.conv2(h))
        return torch.tanh(self.fc(h.flatten(start_dim=1)))


class MlpEncoder(nn.Module):
    """Two fully connected layers on the flattened state."""

    def __init__(self, m: int, k: int, hidden: int = 256):
        super().__init__()
        self.fc1 = nn.Linear(2 * m * k, hidden)
        self.fc2 = nn.Linear(hidden, hidden)
        self.out_dim = hidden

    def forward(self, x: torch.Tensor) -> torch.Tensor:
        h = torch.tanh(self.fc1(condition(x).flatten(start_dim=1)))
        return torch.tanh(self.fc2(h))


class BetaActor(nn.Module):
    """Maps states to per-dimension Beta parameters (a, b), both strictly
    greater than one so every marginal density is unimodal and finite."""

    def __init__(self, encoder: nn.Module, action_dim: int):
        super().__init__()
        self.encoder = encoder
        self.head = nn.Linear(encoder.out_dim, 2 * action_dim)
        self.action_dim = action_dim

    def forward(self, x: torch.Tensor) -> Tuple[torch.Tensor, torch.Tensor]:
        raw = self.head(self.encoder(x))
        xa, xb = raw.chunk(2, dim=-1)
        return 1.0 + F.softplus(xa), 1.0 + F.softplus(xb)


class Critic(nn.Module):
    def __init__(self, encoder: nn.Module):
        super().__init__()
        self.encoder = encoder
        self.head = nn.Linear(encoder.out_dim, 1)

    def forward(self, x: torch.Tensor) -> torch.Tensor:
        return self.head(self.encoder(x)).squeeze(-1)


def orthogonal_init(net: nn.Module, head_gain: float = 1.0) -> None:
    """Orthogonal weights, zero biases; the last linear layer gets its own
    gain (small for the actor, so the initial policy stays near uniform)."""
    layers = [m for m in net.modules() if isinstance(m, (nn.Linear, nn.Conv2d))]
    for layer in layers:
        gain = head_gain if layer is layers[-1] else 2.0 ** 0.5
        nn.init.orthogonal_(layer.weight, gain=gain)
        nn.init.zeros_(layer.bias)


def build_actor_critic(m: int, k: int, arch: str = "cnn",
                       hidden: int = 256) -> Tuple[BetaActor, Critic]:
    """Fresh actor and critic with separate encoder instances."""
    if arch not in ARCHS:
        raise ValueError(f"unknown arch: {arch!r} (choose from {ARCHS})")
    encoder_cls = CnnEncoder if arch == "cnn" else MlpEncoder
    actor = BetaActor(encoder_cls(m, k, hidden), action_dim=2 * m * k)
    critic = Critic(encoder_cls(m, k, hidden))
    orthogonal_init(actor, head_gain=0.01)
    orthogonal_init(critic, head_gain=1.0)
    return actor, critic
