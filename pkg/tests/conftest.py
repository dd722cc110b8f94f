import pytest

from pantograph.delay_spec import DelaySpec


@pytest.fixture
def exp_spec():
    """y' = y"""
    return DelaySpec.of([1.0])


@pytest.fixture
def half_spec():
    """y' = 0.5 y(x) + 0.5 y(x/2)"""
    return DelaySpec.of([0.5, 0.5], [1.0, 0.5])


@pytest.fixture
def lagged_decay_spec():
    """y' = -y(x/2); frozen at x0 = 2 this is y'(t) = -y(t - 1)"""
    return DelaySpec.of([0.0, -1.0], [1.0, 0.5])
