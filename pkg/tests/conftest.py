import random

import pytest
from gmpy2 import mpq

from laddercpt import (
    GaussianRational,
    ModeSystem,
    OperatorExpression,
    adjoint,
    from_position_momentum,
)


@pytest.fixture
def sys1():
    return ModeSystem((mpq(1),))


@pytest.fixture
def sys11():
    return ModeSystem((mpq(1), mpq(1)))


@pytest.fixture
def quartic_h1():
    return from_position_momentum({((4,), (0,)): mpq(1, 4)}, 1)


@pytest.fixture
def henon_heiles_h1():
    return from_position_momentum(
        {((2, 1), (0, 0)): mpq(1), ((0, 3), (0, 0)): mpq(-1, 3)}, 2
    )


def random_expression(
    rng: random.Random,
    d: int,
    max_terms: int = 4,
    max_power: int = 3,
    hermitian: bool = False,
) -> OperatorExpression:
    """Deterministic pseudo-random expression for seeded sweeps."""
    acc = OperatorExpression.zero(d)
    for _ in range(rng.randint(1, max_terms)):
        dagger = tuple(rng.randint(0, max_power) for _ in range(d))
        lower = tuple(rng.randint(0, max_power) for _ in range(d))
        coeff = GaussianRational(
            mpq(rng.randint(-4, 4), rng.randint(1, 4)),
            mpq(rng.randint(-4, 4), rng.randint(1, 4)),
        )
        acc = acc + OperatorExpression.monomial(
            d, dagger, lower, rng.randint(0, 4), coeff
        )
    if hermitian:
        acc = acc + adjoint(acc)
    return acc
