import functools

import pytest

from bimanual_pong.rally import SCENARIOS, ScenarioConfig, run_rally


@functools.lru_cache(maxsize=None)
def scenario_log(name):
    """Rally log of a named preset, computed once per test session."""
    return run_rally(ScenarioConfig.preset(name))


@pytest.fixture(scope="session")
def logs():
    return {name: scenario_log(name) for name in SCENARIOS}


SESSION = {}
# criterion number -> "PASS ..." / "FAIL ..." line, filled by test_acceptance.py
ACCEPTANCE = {}


def pytest_sessionstart(session):
    import time

    SESSION["start"] = time.perf_counter()


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(ACCEPTANCE):
        terminalreporter.write_line(ACCEPTANCE[number])
