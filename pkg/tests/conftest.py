import os
import sys

import pytest

sys.path.insert(0, os.path.dirname(__file__))

from pvrelay.synth import SweepConfig, build_corpus  # noqa: E402

MASTER_SEED = 7

# one line per acceptance criterion, filled by tests/test_acceptance.py
ACCEPTANCE_LINES = {}


@pytest.fixture(scope="session")
def desk_corpus():
    return build_corpus(SweepConfig(), seed=MASTER_SEED)


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_LINES:
        return
    terminalreporter.section("acceptance criteria")
    for num in sorted(ACCEPTANCE_LINES):
        terminalreporter.write_line(ACCEPTANCE_LINES[num])
