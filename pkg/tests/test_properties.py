import random

import pytest

from sysgen import SHAPES, random_system, system_stream
from propcheck import check_system

BATCH = 10


@pytest.mark.parametrize("batch", range(6))
def test_random_systems_with_outputs(batch):
    systems = list(system_stream(1000 + batch, BATCH))
    problems = [(i, v) for i, sys in enumerate(systems) for v in check_system(sys, seed=batch)]
    assert problems == []


@pytest.mark.parametrize("seed", range(15))
def test_random_systems_without_outputs(seed):
    rng = random.Random(seed)
    p, n = rng.choice(SHAPES)
    assert check_system(random_system(rng, p, n, m=0), seed=seed) == []


@pytest.mark.parametrize("seed", range(10))
def test_dense_updates(seed):
    # more terms per polynomial than the default stream produces
    rng = random.Random(500 + seed)
    p, n = rng.choice([(2, 4), (3, 3), (5, 2)])
    sys = random_system(rng, p, n, m=1, max_terms=6, max_vars=3)
    assert check_system(sys, seed=seed) == []
