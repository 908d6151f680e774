import sys
import numpy as np
import pytest

from reparam_qm.spectral import ComplexField, GridSpec, PhysicalConstants, RealField


def direct_dft_matrix(n):
    """Unitary DFT matrix by explicit summation (independent of numpy.fft)."""
    j = np.arange(n)
    return np.exp(-2j * np.pi * np.outer(j, j) / n) / np.sqrt(n)


def band_limited(grid, rng, bandwidth=16, real=False):
    coeffs = np.zeros(grid.n, dtype=complex)
    idx = np.r_[0 : bandwidth + 1, grid.n - bandwidth : grid.n]
    coeffs[idx] = rng.normal(size=idx.size) + 1j * rng.normal(size=idx.size)
    values = np.fft.ifft(coeffs, norm="ortho")
    if real:
        return RealField(grid, values.real)
    return ComplexField(grid, values)


@pytest.fixture
def rng():
    return np.random.default_rng(20261016)


@pytest.fixture
def grid():
    return GridSpec(256, 2 * np.pi)


@pytest.fixture
def unit_constants():
    return PhysicalConstants(hbar=1.0, c=1.0, mass=1.0)


def pytest_terminal_summary(terminalreporter):
    module = sys.modules.get("test_acceptance")
    if module is None or not module.RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(module.RESULTS):
        terminalreporter.write_line(module.RESULTS[number])
