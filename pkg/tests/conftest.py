import numpy as np
import pytest
from hypothesis import HealthCheck, settings

settings.register_profile("lab", deadline=None, max_examples=60,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("lab")

_ACCEPTANCE_LINES = pytest.StashKey[list]()


def pytest_configure(config):
    config.stash[_ACCEPTANCE_LINES] = []


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


@pytest.fixture
def acceptance(request):
    """Record one PASS/FAIL line per acceptance criterion and assert it."""
    lines = request.config.stash[_ACCEPTANCE_LINES]

    def record(number: int, title: str, passed: bool, detail: str):
        line = f"[{number:>2}] {'PASS' if passed else 'FAIL'}  {title}: {detail}"
        lines.append((number, line))
        print(line)
        assert passed, line

    return record


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    lines = config.stash.get(_ACCEPTANCE_LINES, [])
    if lines:
        terminalreporter.section("acceptance criteria")
        for _, line in sorted(lines):
            terminalreporter.write_line(line)
