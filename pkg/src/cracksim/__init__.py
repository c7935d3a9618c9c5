"""Desk-scale simulator of channel-reciprocity attacks on TDD multi-user MISO downlinks.

A base station with M antennas serves K single-antenna users by time-division
duplexing: it estimates the uplink channel from pilots and reuses the transpose
as the downlink channel. A reconfigurable surface in the environment whose
scattering matrix is unitary but not symmetric breaks that reciprocity, so the
precoder computed from the uplink estimate is mismatched to the true downlink.
This package generates the channels, builds the surface configurations and
attack schedules, runs the TDD loop, and reports throughput and secrecy
metrics, plus an episodic environment bridge for learning robust precoders.
"""

from .scenario import ScenarioConfig, default_config, derive_rng, load_config
from .channel import ChannelSet, gen_channel_set, uplink_composite, downlink_actual
from .ris import ScatteringMatrix, AttackSchedule, attack_schedule
from .precoding import Precoder, ZFSingularError, mrt, zf, normalize_power
from .tdd_sim import LinkReport, ErgodicReport, run_block, monte_carlo

__version__ = "0.1.0"

__all__ = [
    "ScenarioConfig",
    "default_config",
    "derive_rng",
    "load_config",
    "ChannelSet",
    "gen_channel_set",
    "uplink_composite",
    "downlink_actual",
    "ScatteringMatrix",
    "AttackSchedule",
    "attack_schedule",
    "Precoder",
    "ZFSingularError",
    "mrt",
    "zf",
    "normalize_power",
    "LinkReport",
    "ErgodicReport",
    "run_block",
    "monte_carlo",
]
