import numpy as np
import pytest

from tanchain import ChainConfig

ACCEPTANCE_LINES = []  # (criterion number, line)


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for _, line in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(line)


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


@pytest.fixture(scope="session")
def lam1_config():
    return ChainConfig(l_eff=500, lam=1.0)


@pytest.fixture(scope="session")
def strong_config():
    return ChainConfig(l_eff=500, b0=6.33)
