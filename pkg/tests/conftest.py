import os

import numpy as np
import pytest

from bayergrad.datasets import load_suite

HERE = os.path.dirname(os.path.abspath(__file__))
SUITE_DIR = os.path.join(HERE, "data", "suite")
# point this at a directory of the 24 Kodak PNGs to run the suite-level checks on them
KODAK_DIR = os.environ.get("BAYERGRAD_KODAK_DIR")


def suite_dir():
    return KODAK_DIR or SUITE_DIR


@pytest.fixture(scope="session")
def suite():
    return load_suite(suite_dir())


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


@pytest.fixture(name="suite_path")
def _suite_path():
    return suite_dir()


_VERDICTS = []


@pytest.fixture
def verdict():
    """Record one PASS/FAIL line, print it, and fail the test on FAIL."""
    def record(label, ok, detail):
        line = f"{'PASS' if ok else 'FAIL'}  {label}: {detail}"
        _VERDICTS.append(line)
        print(line)
        assert ok, line
    return record


def pytest_terminal_summary(terminalreporter):
    if _VERDICTS:
        terminalreporter.section("acceptance criteria")
        for line in _VERDICTS:
            terminalreporter.write_line(line)
