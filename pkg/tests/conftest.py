import warnings

import numpy as np
import pytest

from bilinear_gmle import ModelParams, simulate
from bilinear_gmle.errors import OmegaClippedWarning

_ACCEPTANCE = []


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for line in sorted(_ACCEPTANCE):
        terminalreporter.write_line(line[1])


@pytest.fixture
def criterion():
    """Record one PASS/FAIL line per acceptance criterion."""

    def record(number, ok, detail):
        line = f"[{'PASS' if ok else 'FAIL'}] criterion {number:>2}: {detail}"
        _ACCEPTANCE.append((number, line))
        print(line)
        return ok

    return record


@pytest.fixture(autouse=True)
def _quiet_clipping():
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", OmegaClippedWarning)
        yield


@pytest.fixture(scope="session")
def series_b1_phi09():
    return simulate(ModelParams(0.0, 0.9, 1.0, 1.0), n=1000, seed=11)


@pytest.fixture(scope="session")
def series_small():
    return simulate(ModelParams(0.3, 0.5, 1.0, 0.6), n=60, seed=12)


@pytest.fixture
def rng():
    return np.random.default_rng(20240917)
