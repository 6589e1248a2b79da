import numpy as np
import pytest

from noisy_bisbm.model import NullParams, AltParams, ModelParams


def pytest_configure(config):
    config.addinivalue_line('markers', 'slow: long Monte Carlo replications')


def pytest_addoption(parser):
    parser.addoption('--run-slow', action='store_true', default=False, help="run tests marked slow")


def pytest_collection_modifyitems(config, items):
    if config.getoption('--run-slow'):
        return
    skip = pytest.mark.skip(reason="needs --run-slow")
    for item in items:
        if 'slow' in item.keywords:
            item.add_marker(skip)


@pytest.fixture
def single_block_params():
    """pi = 0.8, alternative N(1, 0.25), null N(0, 1)."""
    return ModelParams([1.], [1.], [[0.8]], NullParams(1.), AltParams([[1.]], [[0.25]]))


@pytest.fixture
def two_block_params():
    return ModelParams(
        [0.5, 0.5], [0.4, 0.6], [[0.8, 0.1], [0.1, 0.8]],
        NullParams(1.), AltParams([[3., 1.], [1., 3.]], [[1., 1.], [1., 1.]]),
    )


@pytest.fixture
def rng():
    return np.random.Generator(np.random.Philox(1234))
