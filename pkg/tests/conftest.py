import warnings

import numpy as np
import pytest

from planarsp.exceptions import TruncationWarning
from planarsp.grid import make_grid
from planarsp.groundstate import cached_profile
from planarsp.verify import random_smooth_field


@pytest.fixture(scope="session")
def profile():
    return cached_profile()


@pytest.fixture(scope="session")
def rho_star(profile):
    return profile.mass


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture(autouse=True)
def _quiet_truncation():
    # Q itself is only ~1e-4 at |x| = 8; tests on the default box expect that
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", TruncationWarning)
        yield


# one generator for tests and the verify checks
smooth_random_field = random_smooth_field


ACCEPTANCE_LINES: dict[int, str] = {}


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for k in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(ACCEPTANCE_LINES[k])
