import random
from fractions import Fraction
from pathlib import Path

import pytest
from hypothesis import HealthCheck, settings

from lexpmsm.model import FiniteChain

settings.register_profile("default", deadline=None, suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")

BENCH = Path(__file__).resolve().parents[1] / "src" / "lexpmsm" / "benchmarks"
CERTS = BENCH / "certs"


@pytest.fixture
def bench():
    return BENCH


def geometric_chain(a_pri=3, b_pri=2) -> FiniteChain:
    """s0 loops with 1/2, else moves to the absorbing s1."""
    h = Fraction(1, 2)
    return FiniteChain.make([{0: h, 1: h}, {1: 1}], [a_pri, b_pri])


def seeded_chains(count: int, seed: int, max_states: int = 6, d_max: int = 5):
    rng = random.Random(seed)
    from lexpmsm.oracle import random_chain

    for _ in range(count):
        n = rng.randint(1, max_states)
        yield random_chain(rng, n, d=rng.randint(1, d_max))
