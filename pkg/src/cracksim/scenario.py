"""Scenario configuration: geometry, channel statistics, powers, and RNG policy.

Everything a run needs to be bit-reproducible lives here. Configs are frozen
after validation and safe to share across workers; random generators are
derived per (seed, stream label, index) so trials can execute in any order,
or in parallel, and still produce identical draws.
"""

from __future__ import annotations

import dataclasses
import hashlib
from dataclasses import dataclass
from typing import Any, Mapping, Sequence, Union

import numpy as np
import yaml

_MASK64 = (1 << 64) - 1

STRATEGIES = ("none", "nr-blind", "nr-ha", "nd-ris", "dris1", "dris2", "dris3", "jammer")
PHASE_RULES = ("pi-offset", "independent")


def db_to_linear(value_db: float) -> float:
    return 10.0 ** (value_db / 10.0)


def dbm_to_watts(value_dbm: float) -> float:
    return 10.0 ** ((value_dbm - 30.0) / 10.0)


@dataclass(frozen=True)
class ScenarioConfig:
    """Full parameterization of one simulation scenario.

    Distances are meters, powers watts, bandwidth Hz. ``rho`` is the linear
    path-loss gain at the 1 m reference distance, so the large-scale gain of a
    link of length d with exponent iota is ``rho * d**-iota``.
    """

    m: int = 32            # BS antennas
    k: int = 4             # single-antenna users, k < m
    n: int = 128           # surface elements
    l: int = 128           # non-reciprocal block size, even, divides n

    bs_pos: tuple = (5.0, 35.0, 20.0)
    ris_pos: tuple = (0.0, 30.0, 15.0)
    eve_pos: tuple = (6.0, 5.0, 2.0)
    jammer_pos: tuple = (0.0, 30.0, 15.0)
    user_center: tuple = (5.0, 0.0, 2.0)
    user_radius: float = 10.0

    rho: float = 0.01      # -20 dB reference gain at 1 m
    iota_kb: float = 3.5   # path-loss exponents per link
    iota_kr: float = 2.5
    iota_eb: float = 3.2
    iota_er: float = 2.5
    iota_rb: float = 2.0

    kappa_kb: float = 3.0  # Rician factors per link
    kappa_kr: float = 6.0
    kappa_eb: float = 4.0
    kappa_er: float = 8.0
    kappa_rb: float = 12.0

    p_total: float = 1.0   # 30 dBm BS transmit power
    p_jam: float = 1.0     # 30 dBm jammer power
    sigma2: float = 1e-12  # noise power
    bandwidth: float = 1e6

    seed: int = 1
    trials: int = 3000

    ha_candidates: int = 200   # knowledge-driven search width
    ha_hold: int = 5           # blocks a searched configuration is held
    dris3_subslots: int = 4    # downlink sub-configurations for dris3
    nr_phase_rule: str = "pi-offset"

    episode_steps: int = 20    # env bridge horizon

    def __post_init__(self):
        for name in ("bs_pos", "ris_pos", "eve_pos", "jammer_pos", "user_center"):
            val = getattr(self, name)
            if not (isinstance(val, Sequence) and len(val) == 3):
                raise ValueError(f"{name} must be a 3-vector, got {val!r}")
            object.__setattr__(self, name, tuple(float(x) for x in val))
        _validate(self)


def _validate(cfg: ScenarioConfig) -> None:
    if cfg.m < 1 or cfg.k < 1 or cfg.n < 1:
        raise ValueError("m, k, n must be positive counts")
    if cfg.k >= cfg.m:
        raise ValueError(f"k must be less than m (got k={cfg.k}, m={cfg.m})")
    if cfg.l % 2 != 0:
        raise ValueError(f"l must be even (got l={cfg.l})")
    if not (2 <= cfg.l <= cfg.n):
        raise ValueError(f"l must satisfy 2 <= l <= n (got l={cfg.l}, n={cfg.n})")
    if cfg.n % cfg.l != 0:
        raise ValueError(f"l must divide n (got l={cfg.l}, n={cfg.n})")
    if not (0.0 < cfg.rho <= 1.0):
        raise ValueError(f"rho must lie in (0, 1] (got rho={cfg.rho})")
    for name in ("p_total", "p_jam", "sigma2"):
        if getattr(cfg, name) <= 0:
            raise ValueError(f"{name} must be strictly positive")
    for name in ("iota_kb", "iota_kr", "iota_eb", "iota_er", "iota_rb"):
        if getattr(cfg, name) <= 0:
            raise ValueError(f"{name} must be strictly positive")
    for name in ("kappa_kb", "kappa_kr", "kappa_eb", "kappa_er", "kappa_rb"):
        if getattr(cfg, name) <= 0:
            raise ValueError(f"{name} must be strictly positive")
    if cfg.user_radius <= 0:
        raise ValueError("user_radius must be strictly positive")
    if cfg.trials < 1:
        raise ValueError(f"trials must be at least 1 (got {cfg.trials})")
    if cfg.nr_phase_rule not in PHASE_RULES:
        raise ValueError(f"nr_phase_rule must be one of {PHASE_RULES}")
    if cfg.ha_candidates < 1:
        raise ValueError("ha_candidates must be at least 1")
    if cfg.ha_hold < 1:
        raise ValueError("ha_hold must be at least 1")
    if cfg.dris3_subslots < 1:
        raise ValueError("dris3_subslots must be at least 1")
    if cfg.episode_steps < 1:
        raise ValueError("episode_steps must be at least 1")


# YAML keys accepted in addition to the field names; converted at load time.
_ALIASES = {
    "rho_db": ("rho", db_to_linear),
    "p_total_dbm": ("p_total", dbm_to_watts),
    "p_jam_dbm": ("p_jam", dbm_to_watts),
}

_FIELD_NAMES = {f.name for f in dataclasses.fields(ScenarioConfig)}
_INT_FIELDS = {"m", "k", "n", "l", "seed", "trials", "ha_candidates", "ha_hold",
               "dris3_subslots", "episode_steps"}


def config_from_mapping(data: Mapping[str, Any]) -> ScenarioConfig:
    """Build a validated config from a flat mapping, applying defaults."""
    kwargs: dict = {}
    for key, value in data.items():
        if key in _ALIASES:
            field, conv = _ALIASES[key]
            kwargs[field] = conv(float(value))
        elif key in _FIELD_NAMES:
            if key in _INT_FIELDS:
                ival = int(value)
                if ival != value:
                    raise ValueError(f"{key} must be an integer (got {value!r})")
                value = ival
            kwargs[key] = value
        else:
            raise ValueError(f"unknown config key: {key}")
    return ScenarioConfig(**kwargs)


def load_config(path: str) -> ScenarioConfig:
    """Load a YAML config file; omitted fields fall back to the defaults."""
    with open(path, "r", encoding="utf-8") as fh:
        data = yaml.safe_load(fh)
    if data is None:
        data = {}
    if not isinstance(data, Mapping):
        raise ValueError(f"config file must contain a key/value mapping: {path}")
    return config_from_mapping(data)


def apply_overrides(data: Mapping[str, Any], assignments: Sequence[str]) -> dict:
    """Apply ``key=value`` override strings on top of a config mapping.

    Values are parsed as YAML, so lists (``bs_pos=[5,35,20]``) and numbers
    work without quoting.
    """
    merged = dict(data)
    for item in assignments:
        key, sep, raw = item.partition("=")
        if not sep or not key:
            raise ValueError(f"override must look like key=value, got {item!r}")
        merged[key.strip()] = yaml.safe_load(raw)
    return merged


def default_config(**overrides) -> ScenarioConfig:
    return ScenarioConfig(**overrides)


def _label_words(label: str) -> list:
    digest = hashlib.sha256(label.encode("utf-8")).digest()
    return [int.from_bytes(digest[i:i + 8], "little") for i in range(0, 32, 8)]


def derive_rng(config_or_seed: Union[ScenarioConfig, int], stream_label: str,
               index: int) -> np.random.Generator:
    """Deterministic generator for substream (seed, label, index).

    Distinct (label, index) pairs give statistically independent streams, and
    the same triple always reproduces the identical stream, so consumers never
    share or advance each other's generators.
    """
    seed = getattr(config_or_seed, "seed", config_or_seed)
    if index < 0:
        raise ValueError("stream index must be non-negative")
    entropy = [int(seed) & _MASK64, *_label_words(stream_label), int(index)]
    return np.random.default_rng(np.random.SeedSequence(entropy))
