import math

import pytest

from countdp.noise_family import MechanismConfig


@pytest.fixture
def worked_config():
    return MechanismConfig(eta=0.8, D=6, epsilon=2.18)


@pytest.fixture
def hand_config():
    # solvable by hand: delta = 0.1, alpha = (0.8, 0.2)
    return MechanismConfig(eta=0.5, D=2, epsilon=math.log(2))
