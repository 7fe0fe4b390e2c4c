import numpy as np
import pytest

# one line per acceptance criterion, echoed after the test summary
ACCEPTANCE_LINES = []


@pytest.fixture(scope="session")
def warm_kernel():
    """Compile the integrator kernel once so timed tests measure physics."""
    from varpend.integrator import SWEEP_CONFIG, poincare_map
    from varpend.model import Params, State

    poincare_map(State(0.1, 0.0, 0.0), Params(0.1, 0.05, 0.8), 2, SWEEP_CONFIG)
    return True


@pytest.fixture(scope="session")
def acceptance_log():
    return ACCEPTANCE_LINES


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
