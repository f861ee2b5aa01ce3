import math

import pytest

from ctnn.signal import TimeGrid, from_function

W1 = 2 * math.pi
W2 = 2 * math.sqrt(2) * math.pi


def two_tone(t):
    return math.cos(W1 * t) + math.cos(W2 * t)


@pytest.fixture(scope="session")
def tritone():
    """cos(2 pi t) + cos(2 sqrt2 pi t) sampled at 0.005 s on [0, 70]."""
    return from_function(two_tone, TimeGrid(0.0, 70.0, 0.005))
