import numpy as np
import pytest

from fedthal.preprocess import normalize_dataset
from fedthal.synthgen import GenConfig, generate


@pytest.fixture(scope="session")
def small_binned():
    """600-row synthetic cohort, binned."""
    return normalize_dataset(generate(GenConfig(n_total=600, n_carrier=240, seed=7)))


@pytest.fixture(scope="session")
def default_raw():
    return generate(GenConfig())


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


_CRITERIA = []


@pytest.fixture
def criterion():
    """Record one acceptance line, then fail the test if the check failed."""
    def record(number, title, ok, detail=""):
        line = f"criterion {number:>2}: {'PASS' if ok else 'FAIL'}  {title}"
        if detail:
            line += f"  [{detail}]"
        _CRITERIA.append((number, line))
        print(line)
        assert ok, line
    return record


def pytest_terminal_summary(terminalreporter):
    if _CRITERIA:
        terminalreporter.section("acceptance criteria")
        for _, line in sorted(_CRITERIA):
            terminalreporter.write_line(line)
