from __future__ import annotations

import random

import pytest

from permhc.core import Instance


def rand_instance(rng: random.Random, n: int, lo: int = -5, hi: int = 5) -> Instance:
    return Instance.from_rows([[rng.randint(lo, hi) for _ in range(n)] for _ in range(n)])


@pytest.fixture
def rng() -> random.Random:
    return random.Random(20240611)
