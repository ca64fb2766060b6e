import sys

import pytest

from relbelief import Hyperparameters, example_path, read_csv, sufficient_stats

DIFFUSE = Hyperparameters(0.0, 10.0, 2.0, 5.0)
ELICITED = Hyperparameters(0.0, 0.67, 1.0, 8.0)


@pytest.fixture(scope="session")
def trial():
    return read_csv(example_path("trial.csv"))


@pytest.fixture(scope="session")
def stats(trial):
    return sufficient_stats(trial)


@pytest.fixture
def diffuse():
    return DIFFUSE


@pytest.fixture
def elicited():
    return ELICITED


def pytest_terminal_summary(terminalreporter):
    mod = sys.modules.get("test_acceptance")
    lines = getattr(mod, "RESULTS", None)
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in sorted(lines, key=lambda s: int(s.split()[0][2:])):
            terminalreporter.write_line(line)
