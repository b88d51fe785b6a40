import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from accelbeh import CHANNELS
from accelbeh.windowing import LabeledWindow

settings.register_profile(
    "default", deadline=None, max_examples=40, suppress_health_check=[HealthCheck.too_slow]
)
settings.load_profile("default")


def make_windows(n, length=75, seed=0, labels=None, animals=None, dyadic=False):
    """Random 8-channel windows; ``dyadic`` draws values on a 1/8 grid."""
    rng = np.random.default_rng(seed)
    if dyadic:
        data = rng.integers(-16, 17, size=(n, len(CHANNELS), length)) / 8.0
    else:
        data = rng.normal(size=(n, len(CHANNELS), length))
    labels = labels or ["lying", "running", "walking", "grooming", "drinking_milk", "other"]
    animals = animals or ["a1", "a2", "a3"]
    return [
        LabeledWindow(animals[i % len(animals)], i, float(i), data[i], labels[i % len(labels)])
        for i in range(n)
    ]


@pytest.fixture
def windows():
    return make_windows(24)
