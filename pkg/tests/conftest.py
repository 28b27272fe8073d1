import numpy as np
import pytest

from tpmkit import fixtures
from tpmkit.pipeline import run_fixture_pipeline

ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)


@pytest.fixture(scope="session")
def fin_annual():
    """Financial annual matrix after floor, CCC absorption and rescale."""
    return run_fixture_pipeline("financial_floor").annual


@pytest.fixture(scope="session")
def fin_run():
    return run_fixture_pipeline("financial_floor")


def table(label):
    return fixtures.load_table(label).values


def random_stochastic(rng, n, absorbing=True):
    a = rng.dirichlet(np.ones(n) * 0.3, size=n)
    # diagonal dominance keeps the principal log well defined
    a = 0.2 * a + 0.8 * np.eye(n)
    if absorbing:
        a[-1] = np.eye(n)[-1]
    return a
