import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import complex_entries
from nlcoupler.errors import BasisMismatchError, DegenerateStateError, NormalizationError
from nlcoupler.state import (
    Basis,
    BiphotonState,
    CouplerConfig,
    bell_phi_plus,
    eigenmode_to_waveguide,
    gauge_fixed,
    noon_psi_minus,
    normalize,
    product_state,
    pump_phasor,
    require_normalized,
    waveguide_to_eigenmode,
)

# Eigenmode -> waveguide map on (00, 0pi, pi0, pipi) -> (11, 12, 21, 22), worked out by hand.
TRANSFORM_ORACLE = 0.5 * np.array(
    [
        [1, -1, -1, 1],
        [1, 1, -1, -1],
        [1, -1, 1, -1],
        [1, 1, 1, 1],
    ],
    dtype=float,
)


def mode_profile_matrix():
    """Same map built from the supermode profiles exp(i k l) / sqrt(2), l = 1, 2."""
    ks = (0.0, math.pi)
    u = np.array([[np.exp(1j * k * l) / math.sqrt(2) for l in (1, 2)] for k in ks])
    m = np.zeros((4, 4), dtype=complex)
    for l in range(2):
        for mm in range(2):
            for a in range(2):
                for b in range(2):
                    m[2 * l + mm, 2 * a + b] = u[a, l] * u[b, mm]
    return m


def test_transform_matches_hand_matrix():
    cols = []
    for j in range(4):
        e = np.zeros(4)
        e[j] = 1.0
        cols.append(eigenmode_to_waveguide(BiphotonState(e, Basis.EIGENMODE)).vector())
    np.testing.assert_allclose(np.array(cols).T, TRANSFORM_ORACLE, atol=1e-15)


def test_hand_matrix_matches_mode_profiles():
    np.testing.assert_allclose(mode_profile_matrix(), TRANSFORM_ORACLE, atol=1e-15)


def test_transform_is_orthogonal():
    np.testing.assert_allclose(TRANSFORM_ORACLE @ TRANSFORM_ORACLE.T, np.eye(4), atol=1e-15)


@settings(max_examples=200, deadline=None)
@given(st.lists(complex_entries, min_size=4, max_size=4))
def test_round_trip_and_norm(entries):
    s = BiphotonState(np.array(entries), Basis.WAVEGUIDE)
    e = waveguide_to_eigenmode(s)
    back = eigenmode_to_waveguide(e)
    assert np.max(np.abs(back.amp - s.amp)) < 1e-14
    assert math.isclose(e.norm, s.norm, rel_tol=1e-13, abs_tol=1e-15)


def test_basis_mismatch_rejected():
    with pytest.raises(BasisMismatchError):
        eigenmode_to_waveguide(BiphotonState(np.eye(2), Basis.WAVEGUIDE))
    with pytest.raises(BasisMismatchError):
        waveguide_to_eigenmode(BiphotonState(np.eye(2), Basis.EIGENMODE))


def test_normalize_zero_state():
    with pytest.raises(DegenerateStateError):
        normalize(BiphotonState(np.zeros((2, 2))))


def test_require_normalized():
    require_normalized(bell_phi_plus())
    with pytest.raises(NormalizationError):
        require_normalized(BiphotonState(np.eye(2)))


def test_named_states():
    np.testing.assert_allclose(bell_phi_plus().vector(), [0, 1 / math.sqrt(2), 1 / math.sqrt(2), 0])
    np.testing.assert_allclose(noon_psi_minus().vector(), [1 / math.sqrt(2), 0, 0, -1 / math.sqrt(2)])
    np.testing.assert_allclose(product_state().vector(), [0.5] * 4)


def test_amplitudes_are_immutable():
    s = bell_phi_plus()
    with pytest.raises(ValueError):
        s.amp[0, 0] = 1.0


def test_gauge_prefers_amp22_then_amp11():
    s = BiphotonState(np.array([[1j, 0], [0, 1j]]) / math.sqrt(2))
    g = gauge_fixed(s)
    assert g.amp[1, 1].imag == 0 and g.amp[1, 1].real > 0
    s = BiphotonState(np.array([[1j, 0], [0, 0]]))
    assert gauge_fixed(s).amp[0, 0] == 1.0
    s = BiphotonState(np.array([[0, -1j], [-1j, 0]]) / math.sqrt(2))
    assert gauge_fixed(s).amp[0, 1].real > 0


@pytest.mark.parametrize(
    "phi, expected",
    [(0.0, 1.0), (math.pi, -1.0), (-math.pi, -1.0), (math.pi / 2, 1j), (2 * math.pi, 1.0)],
)
def test_pump_phasor_exact_on_quarter_turns(phi, expected):
    assert pump_phasor(phi) == expected


def test_coupler_config_validation():
    with pytest.raises(ValueError):
        CouplerConfig(L=-1.0)
    with pytest.raises(ValueError):
        CouplerConfig(A1=float("nan"))
    cfg = CouplerConfig().with_point(1.0, 2.0)
    assert cfg.delta_phi == 1.0 and math.isclose(cfg.delta_beta_over_c, 2.0)
