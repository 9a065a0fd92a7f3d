import numpy as np
import pytest
from hypothesis import settings

from aiflearn.core import Panel

settings.register_profile("default", deadline=None, max_examples=60)
settings.load_profile("default")


def random_panel(rng, n, m, d):
    return Panel(rng.normal(size=(n, d)), rng.integers(0, 2, size=(n, m)))


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


# one line per acceptance criterion, shown at the end of every run
ACCEPTANCE = {}


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE:
        terminalreporter.section("acceptance")
        for key in sorted(ACCEPTANCE):
            terminalreporter.write_line(ACCEPTANCE[key])
