import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from cracksim import default_config
from cracksim.channel import channel_set_for_trial


@pytest.fixture
def small_config():
    """Fast scenario used by most unit tests: tiny arrays, few trials."""
    return default_config(m=8, k=2, n=8, l=4, trials=5, seed=7)


@pytest.fixture
def tiny_config():
    """Smallest scenario the validators allow with a working ZF precoder."""
    return default_config(m=4, k=2, n=4, l=4, trials=3, seed=3)


@pytest.fixture
def small_chan(small_config):
    return channel_set_for_trial(small_config, 0)
