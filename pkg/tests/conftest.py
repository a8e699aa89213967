"""Shared fixtures: the reference parameter set in its three constraint
regimes, plus seeded random parameter draws."""
from __future__ import annotations

import numpy as np
import pytest

from suslovkit import SuslovParams, validate
from suslovkit.measures import density_params


def draw_params(
    rng: np.random.Generator,
    a1: float | None = None,
    a2: float | None = None,
) -> SuslovParams:
    """One random admissible parameter set. a1/a2 override the random
    constraint direction when given."""
    I3 = rng.uniform(0.2, 2.0)
    I2 = I3 + rng.uniform(0.1, 2.0)
    I1 = I2 + rng.uniform(0.1, 2.0)
    K1 = rng.uniform(0.0, 1.5)
    K3 = rng.uniform(0.1, 2.0)
    if a1 is None:
        a1 = rng.uniform(-2.0, 2.0)
    if a2 is None:
        a2 = rng.uniform(-2.0, 2.0)
    return validate(I1, I2, I3, K1, K3, a1=a1, a2=a2)


def draw_classA_params(rng: np.random.Generator) -> SuslovParams:
    """Random a2 = 0 parameter set with the density exponent window
    0.3 <= gamma <= 2.5, so n stays small and M stays representable."""
    while True:
        p = draw_params(rng, a2=0.0)
        dp = density_params(p)
        if 0.3 <= dp.gamma <= 2.5:
            return p


@pytest.fixture
def pstar() -> SuslovParams:
    # reference instance: I = (3, 2, 1), K1 = 0.5, K3 = 1, lambda = (3.5, 2.5, 1)
    return validate(3.0, 2.0, 1.0, 0.5, 1.0, a1=1.0, a2=0.0)


@pytest.fixture
def pstar_full() -> SuslovParams:
    return validate(3.0, 2.0, 1.0, 0.5, 1.0, a1=1.0, a2=1.0)


@pytest.fixture
def pstar_a1zero() -> SuslovParams:
    return validate(3.0, 2.0, 1.0, 0.5, 1.0, a1=0.0, a2=1.0)


@pytest.fixture
def euler() -> SuslovParams:
    return validate(3.0, 2.0, 1.0, 0.5, 1.0, a1=0.0, a2=0.0)


@pytest.fixture
def rng() -> np.random.Generator:
    return np.random.default_rng(20260822)
