import json
import sys
from pathlib import Path

import pytest

HERE = Path(__file__).resolve().parent
sys.path.insert(0, str(HERE))


@pytest.fixture(scope="session")
def frozen():
    """Oracle outputs frozen by scripts/freeze_oracles.py."""
    return json.loads((HERE / "data" / "oracle_values.json").read_text())


_CRITERIA = pytest.StashKey[list]()


def pytest_configure(config):
    config.stash[_CRITERIA] = []


@pytest.fixture
def criterion(request):
    """report(label, ok, detail, known_failure=False) prints one status line
    and asserts ok.  A known failure prints XFAIL instead of FAIL."""
    lines = request.config.stash[_CRITERIA]

    def report(label, ok, detail="", known_failure=False):
        status = "PASS" if ok else "XFAIL" if known_failure else "FAIL"
        line = f"criterion {label}: {status} {detail}".rstrip()
        print(line)
        lines.append(line)
        assert ok, line

    return report


def pytest_terminal_summary(terminalreporter, config):
    lines = config.stash.get(_CRITERIA, [])
    # with -s the lines were already printed inline
    if lines and config.getoption("capture") != "no":
        terminalreporter.section("acceptance criteria")
        for line in lines:
            terminalreporter.write_line(line)
