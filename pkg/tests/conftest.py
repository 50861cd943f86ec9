import random
from fractions import Fraction

import pytest

from auctionkit import AuctionSpec, Format, JumpVector


@pytest.fixture
def allpay_small():
    return AuctionSpec(format=Format.ALL_PAY, n=2, x=15)


@pytest.fixture
def allpay_x100():
    return AuctionSpec(format=Format.ALL_PAY, n=2, x=100)


@pytest.fixture
def fp_experiment():
    """First-price game as run in the experiment: n=2, p=1/2, x=100."""
    return AuctionSpec(format=Format.FIRST_PRICE, n=2, x=100, p=Fraction(1, 2))


def random_jump_vector(rng: random.Random, size: int, max_len: int = 6) -> JumpVector:
    """Strictly increasing rationals in [1, size), valid for jump_to_strategy."""
    m = rng.randint(1, min(max_len, size - 1))
    points = set()
    while len(points) < m:
        den = rng.randint(1, 16)
        num = rng.randint(den, size * den - 1)  # q in [1, size)
        points.add(Fraction(num, den))
    return JumpVector(tuple(sorted(points)))
