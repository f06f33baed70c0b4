
import numpy as np
import pytest

from conftest import random_density, uhlmann_fidelity
from nlcoupler.errors import IncompleteMeasurementError
from nlcoupler.metrics import fidelity
from nlcoupler.state import DensityMatrix, noon_psi_minus, pure_density_matrix
from nlcoupler.tomography import (
    CountRecord,
    MeasurementSet,
    bootstrap_fidelity,
    linear_inversion,
    mle_fit,
    mle_reconstruct,
    simulate_counts,
    standard_measurement_set,
)

MSET = standard_measurement_set()


def test_standard_set_is_complete():
    assert len(MSET) == 16
    assert MSET.rank() == 16
    assert MSET.labels[0] == "HH" and MSET.labels[-1] == "RR"


def test_expected_counts_hand_values():
    # |N00N-> = (|HH> - |VV>)/sqrt(2): HH and VV each see N/2; DD sees 0 and DR sees N/4.
    rec = simulate_counts(pure_density_matrix(noon_psi_minus()), MSET, 1000.0)
    counts = dict(zip(rec.labels, rec.counts))
    assert counts["HH"] == pytest.approx(500.0)
    assert counts["VV"] == pytest.approx(500.0)
    assert counts["HV"] == pytest.approx(0.0, abs=1e-12)
    assert counts["DD"] == pytest.approx(0.0, abs=1e-12)
    assert counts["DR"] == pytest.approx(250.0)


def test_linear_inversion_exact(rng):
    rho = random_density(rng)
    lin = linear_inversion(simulate_counts(DensityMatrix(rho), MSET, 1e6), MSET)
    np.testing.assert_allclose(lin.rho, rho, atol=1e-12)
    assert lin.physical and lin.meta["residual"] < 1e-10


def test_linear_inversion_flags_unphysical():
    rec = simulate_counts(pure_density_matrix(noon_psi_minus()), MSET, 50.0, noise="poisson", seed=1)
    lin = linear_inversion(rec, MSET)
    assert lin.meta["min_eigenvalue"] < 0
    assert not lin.physical


def test_incomplete_set_rejected():
    small = MeasurementSet(MSET.projectors[:10], MSET.labels[:10])
    rec = CountRecord(np.ones(10), 10.0)
    with pytest.raises(IncompleteMeasurementError):
        linear_inversion(rec, small)
    with pytest.raises(IncompleteMeasurementError):
        mle_fit(rec, small)


@pytest.mark.parametrize("init", ["identity", "linear"])
def test_mle_round_trip(rng, init):
    for _ in range(5):
        rho = random_density(rng)
        fit = mle_fit(simulate_counts(DensityMatrix(rho), MSET, 1e6), MSET, init=init)
        assert fit.converged
        assert uhlmann_fidelity(rho, fit.rho.rho) > 0.999


def test_mle_is_physical_under_noise():
    rec = simulate_counts(pure_density_matrix(noon_psi_minus()), MSET, 200.0, noise="poisson", seed=4)
    rho = mle_reconstruct(rec, MSET)
    assert np.linalg.eigvalsh(rho.rho)[0] >= -1e-12
    assert np.trace(rho.rho).real == pytest.approx(1.0)
    assert rho.meta["converged"]


def test_seeded_noise_is_reproducible():
    rho = pure_density_matrix(noon_psi_minus())
    a = simulate_counts(rho, MSET, 5000.0, "poisson", seed=9)
    b = simulate_counts(rho, MSET, 5000.0, "poisson", seed=9)
    c = simulate_counts(rho, MSET, 5000.0, "poisson", seed=10)
    assert np.array_equal(a.counts, b.counts)
    assert not np.array_equal(a.counts, c.counts)
    with pytest.raises(ValueError):
        simulate_counts(rho, MSET, 5000.0, "gaussian")


def test_csv_round_trip():
    rec = simulate_counts(pure_density_matrix(noon_psi_minus()), MSET, 1234.5)
    text = rec.to_csv()
    assert text.splitlines()[0] == "projector,count"
    back = CountRecord.from_csv(text, total_scale=rec.total_scale)
    assert back.labels == rec.labels
    np.testing.assert_array_equal(back.counts, rec.counts)
    with pytest.raises(ValueError):
        CountRecord.from_csv("a,b\n1,2\n")


def test_bootstrap_error_bar():
    rec = simulate_counts(pure_density_matrix(noon_psi_minus()), MSET, 5000.0, "poisson", seed=2)
    mean, sd = bootstrap_fidelity(rec, MSET, noon_psi_minus(), resamples=10, seed=0)
    assert 0.9 < mean <= 1.0
    assert 0.0 < sd < 0.05
    assert fidelity(mle_reconstruct(rec, MSET), noon_psi_minus()) > 0.9
