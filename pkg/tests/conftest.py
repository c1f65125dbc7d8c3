import numpy as np
import pytest

from enhanced_lmmse.channel import OfdmConfig


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


@pytest.fixture
def grid():
    """Full-size grid: 408 usable carriers of 512."""
    return OfdmConfig.standard(408)


@pytest.fixture
def small_grid():
    return OfdmConfig(n_fft=64, cp_len=16, usable=tuple(range(4, 36)))


def brute_dft(gains, carriers, n_fft):
    out = np.zeros(len(carriers), dtype=complex)
    for i, k in enumerate(carriers):
        for l, g in enumerate(gains):
            out[i] += g * np.exp(-2j * np.pi * k * l / n_fft)
    return out


ACCEPTANCE_LINES = {}


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_LINES:
        return
    terminalreporter.section("acceptance criteria")
    for key in sorted(ACCEPTANCE_LINES):
        terminalreporter.write_line(ACCEPTANCE_LINES[key])
