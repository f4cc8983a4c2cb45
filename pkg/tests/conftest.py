import random

import pytest

from reidemeister.exactlin import IntMatrix


def random_matrix(rng: random.Random, n: int, limit: int) -> IntMatrix:
    return IntMatrix(n, n, tuple(rng.randint(-limit, limit) for _ in range(n * n)))


def random_unimodular(rng: random.Random, n: int, limit: int) -> IntMatrix:
    """Rejection-sample a matrix with determinant +-1 and entries in [-limit, limit]."""
    while True:
        m = random_matrix(rng, n, limit)
        if m.det() in (1, -1):
            return m


def random_det_one(rng: random.Random, n: int, limit: int) -> IntMatrix:
    while True:
        m = random_matrix(rng, n, limit)
        if m.det() == 1:
            return m


@pytest.fixture
def rng() -> random.Random:
    return random.Random(20240831)
