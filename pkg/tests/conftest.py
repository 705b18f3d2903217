from __future__ import annotations

import pytest
import responses

import reldev.kernels


def pytest_addoption(parser):
    parser.addoption(
        "--runslow",
        action="store_true",
        default=False,
        help="run the Monte Carlo acceptance tests",
    )


def pytest_collection_modifyitems(config, items):
    if config.getoption("--runslow"):
        return
    skip_slow = pytest.mark.skip(reason="needs --runslow")
    for item in items:
        if "slow" in item.keywords:
            item.add_marker(skip_slow)


@pytest.fixture(scope="session", autouse=True)
def mock_responses():
    responses.start()


@pytest.fixture(scope="session")
def quartic():
    return reldev.kernels.get_kernel("quartic")
