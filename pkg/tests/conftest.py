import numpy as np
import pytest

ACCEPTANCE_RESULTS = []


def record_acceptance(criterion: str, passed: bool, detail: str):
    ACCEPTANCE_RESULTS.append((criterion, passed, detail))


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    if not ACCEPTANCE_RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for criterion, passed, detail in sorted(ACCEPTANCE_RESULTS):
        status = "PASS" if passed else "FAIL"
        terminalreporter.write_line(f"{status}  {criterion}: {detail}")


@pytest.fixture
def rng():
    return np.random.default_rng(20250810)
