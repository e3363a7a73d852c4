import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

_KEY = pytest.StashKey[dict]()


@pytest.fixture
def acceptance_record(request):
    """Record one acceptance criterion outcome for the terminal summary."""
    store = request.config.stash.setdefault(_KEY, {})

    def record(number: int, passed: bool, detail: str):
        store[number] = (passed, detail)

    return record


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    store = config.stash.get(_KEY, {})
    if not store:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(store):
        passed, detail = store[n]
        terminalreporter.write_line(f"criterion {n:2d}: {'PASS' if passed else 'FAIL'}  {detail}")
