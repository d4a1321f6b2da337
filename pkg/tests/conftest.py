import sys

import numpy as np
import pytest

from gramseries.identities import load_zeros


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    mod = sys.modules.get("test_acceptance")
    lines = getattr(mod, "CRITERION_LINES", None) if mod else None
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in lines:
            terminalreporter.write_line(line)


@pytest.fixture(scope="session")
def zeros_file():
    """Path of the packaged zero-ordinate table."""
    from importlib.resources import files
    return files("gramseries").joinpath("data/zeta_zeros_100.txt")


@pytest.fixture(scope="session")
def zeros_data(zeros_file):
    return load_zeros(str(zeros_file))


@pytest.fixture(scope="session")
def rng():
    return np.random.default_rng(20260815)
