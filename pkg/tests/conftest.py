import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from dfr import backend

# filled by test_acceptance's criterion() wrapper, printed after the run
acceptance_results: list[str] = []


@pytest.fixture(params=sorted(backend.available()))
def kernel_backend(request):
    """Run a test once per kernel backend (numpy and numba)."""
    previous = backend.active()
    backend.use(request.param)
    yield request.param
    backend.use(previous)


def pytest_terminal_summary(terminalreporter):
    if acceptance_results:
        terminalreporter.section("acceptance criteria")
        for line in acceptance_results:
            terminalreporter.write_line(line)
