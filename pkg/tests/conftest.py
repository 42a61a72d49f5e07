import sys
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))  # for oracles.py


@pytest.fixture
def rng():
    return np.random.default_rng(20240817)


def tiny_area(n=3, m=2, T=4, seed=5):
    """A small hand-checkable benign area: observer is the exact truth sum."""
    from theftsentry.meterdata import AreaDataset, observer_from_truth, synth_ground_truth

    consumers = synth_ground_truth(n, m, T, seed=seed)
    return AreaDataset(consumers, observer_from_truth(consumers))


@pytest.fixture
def small_scenario():
    """One 12-consumer area with 2 thieves, small enough for slow checks."""
    from theftsentry.fdi import build_scenario
    from theftsentry.meterdata import synth_ground_truth

    ground = synth_ground_truth(12, 8, 24, seed=9)
    areas, scenario = build_scenario(ground, 1, 2, "mix", seed=4)
    return areas, scenario
