from pathlib import Path

import pytest

from perfprof.core import TimingTable

DATA = Path(__file__).parent / "data"
STUB = Path(__file__).parent / "stubs" / "stub.sh"


@pytest.fixture
def data_dir():
    return DATA


@pytest.fixture
def stub_path():
    return STUB


@pytest.fixture
def example_table():
    """Two solvers on four problems; B fails on p3."""
    return TimingTable.from_values(
        ["p1", "p2", "p3", "p4"], ["A", "B"], [(2, 4), (6, 2), (1, None), (10, 5)]
    )


def pytest_terminal_summary(terminalreporter):
    try:
        from test_acceptance import RESULTS
    except ImportError:
        return
    if not RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for name, ok, detail in RESULTS:
        terminalreporter.write_line(f"{'PASS' if ok else 'FAIL'}  {name}  [{detail}]")
