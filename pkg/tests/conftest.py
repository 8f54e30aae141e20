"""
Pytest configuration for rholab tests.
"""

import math

import pytest


def pytest_addoption(parser):
    """Add custom pytest options."""
    parser.addoption(
        "--sweep-trials",
        action="store",
        type=int,
        default=200,
        help="Random trials per sweep (10000 reproduces the acceptance sizes)",
    )


@pytest.fixture
def sweep_trials(request):
    """Number of random trials used by sampling tests."""
    return request.config.getoption("--sweep-trials")


@pytest.fixture
def l2():
    from rholab.models import LpNorm

    return LpNorm(dim=2, p=2)


@pytest.fixture
def linf():
    from rholab.models import LpNorm

    return LpNorm(dim=2, p=math.inf)


@pytest.fixture
def l1():
    from rholab.models import LpNorm

    return LpNorm(dim=2, p=1)


@pytest.fixture
def hexagon():
    from rholab.suite_config import hexagon_norm

    return hexagon_norm()
