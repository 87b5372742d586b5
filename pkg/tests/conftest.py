import numpy as np
import pytest

from mctd.stats import Sample


def random_sample(seed: int, n: int) -> Sample:
    """A path of n+1 iid uniforms; enough structure for counting tests."""
    return Sample(np.random.default_rng(seed).random(n + 1))


@pytest.fixture
def hand_sample() -> Sample:
    """The three-point path 0.2 -> 0.6 -> 0.4 (two transitions)."""
    return Sample(np.array([0.2, 0.6, 0.4]))
