import sys
import numpy as np
import pytest

from ppnmm_unmix.core import SpectralLibrary


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture
def small_lib(rng):
    return SpectralLibrary(rng.uniform(0.05, 1.0, size=(12, 4)))


def sup_cdf_distance(samples, grid, density):
    """Largest gap between the empirical CDF of ``samples`` and the CDF of a
    density tabulated on an equispaced ``grid`` (trapezoid rule)."""
    density = np.asarray(density, dtype=np.float64)
    steps = 0.5 * (density[1:] + density[:-1]) * np.diff(grid)
    cdf = np.concatenate([[0.0], np.cumsum(steps)])
    cdf /= cdf[-1]
    emp = np.searchsorted(np.sort(samples), grid, side="right") / len(samples)
    return float(np.max(np.abs(emp - cdf)))


def pytest_terminal_summary(terminalreporter):
    module = sys.modules.get("test_acceptance")
    results = getattr(module, "RESULTS", None)
    if results:
        terminalreporter.section("acceptance criteria")
        for number in sorted(results):
            terminalreporter.write_line(results[number])
