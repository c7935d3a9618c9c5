"""Learned downlink precoding agent.

Trains a clipped-surrogate policy-gradient agent whose actions are precoder
amplitude/phase matrices, against any environment that speaks the
newline-delimited JSON protocol (state in, action out, reward back). The
agent never imports the simulator; it talks to it over a pipe or a socket.
"""

from .envclient import ProtocolError, WireEnv
from .nets import build_actor_critic
from .policy import BetaPolicy
from .train import TrainConfig, evaluate, load_checkpoint, train

__all__ = [
    "BetaPolicy",
    "ProtocolError",
    "TrainConfig",
    "WireEnv",
    "build_actor_critic",
    "evaluate",
    "load_checkpoint",
    "train",
]
