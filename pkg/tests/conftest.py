"""Shared fixtures: problem instances and their regularizers."""

import math

import pytest

from sturmasym.core.potential import PotentialSpec, build_regularizer
from sturmasym.core.prufer import BoundaryConditions


@pytest.fixture
def free_spec():
    """C = 0 on [-1, 1]."""
    return PotentialSpec(C=0.0, K=1.0, a=-1.0, b=1.0)


@pytest.fixture
def free_reg(free_spec):
    return build_regularizer(free_spec)


@pytest.fixture
def log_spec():
    """C = 1, K = 1 on [-1, 1]: f = -sign(x) ln|x|, F = ln^2|x|."""
    return PotentialSpec(C=1.0, K=1.0, a=-1.0, b=1.0)


@pytest.fixture
def log_reg(log_spec):
    return build_regularizer(log_spec)


@pytest.fixture
def dirichlet():
    return BoundaryConditions(alpha=0.0, beta=0.0)


@pytest.fixture(params=[(0.0, 0.0), (0.0, math.pi / 4), (math.pi / 4, 0.0), (math.pi / 4, math.pi / 4)],
                ids=['case1', 'case2', 'case3', 'case4'])
def any_case(request):
    alpha, beta = request.param
    return BoundaryConditions(alpha=alpha, beta=beta)


def make(C: float, K: float, a: float = -1.0, b: float = 1.0, depth=None):
    spec = PotentialSpec(C=C, K=K, a=a, b=b)
    return spec, build_regularizer(spec, depth)


@pytest.fixture
def problem():
    """Factory fixture: problem(C, K, a, b, depth) -> (spec, regularizer)."""
    return make
