import os
import random

import pytest
from hypothesis import HealthCheck, settings

from arbor.grid import RequestSeq

settings.register_profile("default", max_examples=150, deadline=None,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile(os.environ.get("HYPOTHESIS_PROFILE", "default"))

GOLDEN = os.path.join(os.path.dirname(__file__), "golden")


def random_instance(rng: random.Random, n_max=64, N_max=20, t_factor=2):
    n = rng.randint(2, n_max)
    N = rng.randint(1, N_max)
    times = sorted(rng.randint(0, t_factor * n) for _ in range(N))
    return RequestSeq(n, tuple((rng.randrange(n), t) for t in times))


def tower_instance(rng: random.Random):
    """Requests far right of the origin, which make Square serve from its own towers."""
    n = rng.randint(80, 200)
    first = (n - 1, 1)
    reqs = [first]
    t = 1
    for _ in range(rng.randint(2, 8)):
        t += rng.randint(1, 12)
        reqs.append((rng.randint(n // 2, n - 1), t))
    return RequestSeq(n, tuple(reqs))


@pytest.fixture
def golden_dir():
    return GOLDEN


def chain_instance(rng: random.Random):
    """A far-right request opens a tail column at ``c``; later requests just above
    each tail top, near ``c``, are served from the column and stay uncovered."""
    n = rng.randint(100, 300)
    d = rng.randint(1, 6)
    v = rng.randint(n // 2, n - 1)
    t = 1 + d
    c = v - 5 * d
    reqs = [(n - 1, 1), (v, t)]
    top = t + 4 * d
    for _ in range(rng.randint(2, 6)):
        g = rng.randint(1, 12)
        t = top + g
        reqs.append((c + rng.randint(0, g - 1), t))
        top = t + 4 * g
    return RequestSeq(n, tuple(reqs))
