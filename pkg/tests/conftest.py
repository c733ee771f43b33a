import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).resolve().parent.parent / "src"))

from quench import build_quench_state  # noqa: E402
from spectral import TrapConfig  # noqa: E402


@pytest.fixture
def natural():
    """L = M = T = hbar = kB = 1."""
    return TrapConfig(L=1.0, M=1.0, T=1.0)


@pytest.fixture
def ground():
    return TrapConfig(L=1.0, M=1.0, T=0.0)


@pytest.fixture(scope="session")
def state_t1_128():
    return build_quench_state(TrapConfig(L=1.0, T=1.0), n_max=128)


@pytest.fixture(scope="session")
def state_t100_128():
    return build_quench_state(TrapConfig(L=1.0, T=100.0), n_max=128)


@pytest.fixture(scope="session")
def state_t1_16():
    return build_quench_state(TrapConfig(L=1.0, T=1.0), n_max=16)
