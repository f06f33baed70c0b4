import math

import numpy as np
import pytest
from hypothesis import strategies as st

from nlcoupler.state import BiphotonState

DEVICE_L = 0.0475
HALF_BEAT_C = math.pi / (2 * DEVICE_L)  # coupling giving Lc = pi/2


def psd_sqrt(m):
    w, v = np.linalg.eigh(m)
    return (v * np.sqrt(np.clip(w, 0.0, None))) @ v.conj().T


def uhlmann_fidelity(a, b):
    """(Tr sqrt(sqrt(a) b sqrt(a)))^2 for two density matrices."""
    s = psd_sqrt(a)
    return float(np.real(np.trace(psd_sqrt(s @ b @ s))) ** 2)


def random_density(rng, rank=None):
    rank = rank or int(rng.integers(1, 5))
    g = rng.normal(size=(4, rank)) + 1j * rng.normal(size=(4, rank))
    rho = g @ g.conj().T
    return rho / np.real(np.trace(rho))


finite = st.floats(-1.0, 1.0, allow_nan=False)
complex_entries = st.builds(complex, finite, finite)


@st.composite
def symmetric_states(draw):
    """Normalized exchange-symmetric waveguide states."""
    a11, a12, a22 = draw(complex_entries), draw(complex_entries), draw(complex_entries)
    amp = np.array([[a11, a12], [a12, a22]])
    n = math.sqrt(float(np.sum(np.abs(amp) ** 2)))
    if n < 1e-3:
        amp = np.array([[1.0, 0.0], [0.0, 0.0]], dtype=complex)
        n = 1.0
    return BiphotonState(amp / n)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)
