import numpy as np
import pytest

from pogo_codesign.command import command_for, idle_command
from pogo_codesign.experiment import TUNED_DELTA_T
from pogo_codesign.sim import DesignParams, SimConfig


@pytest.fixture(scope="session")
def nominal():
    return DesignParams()


@pytest.fixture(scope="session")
def tuned_command(nominal):
    return command_for(nominal, TUNED_DELTA_T)


@pytest.fixture(scope="session")
def idle():
    return idle_command()


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


@pytest.fixture(scope="session")
def short_sim():
    return SimConfig(1e-4, 0.6)


def pytest_terminal_summary(terminalreporter):
    import sys
    mod = sys.modules.get("test_acceptance")
    lines = getattr(mod, "RESULTS", None)
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in sorted(lines):
            terminalreporter.write_line(line)
