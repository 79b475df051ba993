import numpy as np
import pytest

from tabutruss.config import load_config, shipped_config_path


@pytest.fixture(scope="session")
def bland_cfg():
    return load_config(shipped_config_path("bland.json"))


@pytest.fixture(scope="session")
def bd_cfg():
    return load_config(shipped_config_path("bd.json"))


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def pytest_terminal_summary(terminalreporter):
    from tests.test_acceptance import ACCEPTANCE_LINES

    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
