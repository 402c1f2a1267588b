import os

import pytest

from hypothesis import HealthCheck, settings

settings.register_profile("default", max_examples=60, deadline=None,
                          suppress_health_check=[HealthCheck.too_slow])
settings.register_profile("thorough", max_examples=400, deadline=None,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile(os.environ.get("HYPOTHESIS_PROFILE", "default"))

CRITERIA = pytest.StashKey[dict]()


@pytest.fixture
def criterion(request):
    """Record the one-line verdict of an acceptance criterion."""
    store = request.config.stash.setdefault(CRITERIA, {})

    def record(number, ok, detail):
        store[number] = f"criterion {number:2d}: {'PASS' if ok else 'FAIL'}  {detail}"
        print(store[number])

    return record


def pytest_terminal_summary(terminalreporter, config):
    lines = config.stash.get(CRITERIA, {})
    if lines:
        terminalreporter.section("acceptance criteria")
        for k in sorted(lines):
            terminalreporter.write_line(lines[k])
