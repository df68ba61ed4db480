from pathlib import Path

import numpy as np
import pytest

from lexrobust.lexicon import default_lexicon
from lexrobust.synth import babble, speech_like

DEMO_DATA = Path(__file__).resolve().parents[1] / "demos" / "data"

_criteria: dict[str, str] = {}


def pytest_runtest_logreport(report):
    if "test_acceptance.py" not in report.nodeid or "::test_criterion_" not in report.nodeid:
        return
    name = report.nodeid.split("::")[-1]
    if report.when == "call" or (report.when == "setup" and report.outcome != "passed"):
        _criteria[name] = report.outcome


def pytest_terminal_summary(terminalreporter):
    if not _criteria:
        return
    terminalreporter.section("acceptance criteria")
    for name in sorted(_criteria):
        outcome = _criteria[name]
        tag = {"passed": "PASS", "failed": "FAIL", "skipped": "SKIP"}.get(outcome, outcome.upper())
        terminalreporter.write_line(f"{tag:<5} {name}")


@pytest.fixture(scope="session")
def lexicon():
    return default_lexicon()


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture(scope="session")
def speech():
    return speech_like(np.random.default_rng(7), 1.5, 16000)


@pytest.fixture(scope="session")
def noise():
    return babble(np.random.default_rng(8), 4.0, 16000)
