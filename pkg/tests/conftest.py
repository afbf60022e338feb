import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from attnmarket import presets

SCENARIO_DIR = Path(__file__).parent.parent / "scenarios"


@pytest.fixture
def coin_match():
    return presets.coin_match()


@pytest.fixture
def pair_guess():
    return presets.pair_guess()


@pytest.fixture
def hypothesis_testing():
    return presets.hypothesis_testing()


@pytest.fixture
def three_action():
    return presets.conditionally_iid_signals()


@pytest.fixture
def asymmetric_signals():
    # asymmetric prior keeps the equilibrium rates genuinely state-dependent
    return presets.conditionally_iid_signals(
        accuracy=0.75, p_state1=0.55, abstain_utility=0.6)


@pytest.fixture
def scenario_dir():
    return SCENARIO_DIR
