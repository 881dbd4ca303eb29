import numpy as np
import pytest

from preconditioning.core import Continuous, Dataset, standardize

# lines collected by the acceptance suite, echoed in the terminal summary
VERDICTS = []


def pytest_terminal_summary(terminalreporter):
    if VERDICTS:
        terminalreporter.section("acceptance criteria")
        for line in VERDICTS:
            terminalreporter.write_line(line)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def make_dataset(rng, n=30, p=8, noise=1.0, standardized=True):
    x = rng.standard_normal((n, p))
    y = x[:, 0] - 0.5 * x[:, 1] + noise * rng.standard_normal(n)
    d = Dataset(x, Continuous(y))
    return standardize(d) if standardized else d
