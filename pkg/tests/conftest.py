import math

import numpy as np
import pytest

from photon_distill.unitary import from_entries

SQ2 = 1 / math.sqrt(2)


@pytest.fixture
def beam_splitter():
    return from_entries(np.array([[SQ2, SQ2], [SQ2, -SQ2]]))


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
