"""Biphoton states from SPDC in a nonlinear two-waveguide directional coupler."""

from importlib.metadata import PackageNotFoundError, version

from .analytic import CorrelationMap, SweepGrid, solve_eigenmode, solve_waveguide, steering_dominance, sweep
from .errors import (
    AccuracyError,
    BasisMismatchError,
    ConfigError,
    CouplerError,
    DegenerateStateError,
    DomainError,
    GridError,
    IncompleteMeasurementError,
    NormalizationError,
    PhysicalityError,
)
from .filtering import FilterSpec, filtered_correlations, reduced_density_matrix
from .metrics import concurrence, fidelity, metrics_report, purity
from .propagation import (
    DispersionModel,
    InhomogeneityProfile,
    SpectralState,
    frequency_grid,
    integrate,
    integrate_spectrum,
)
from .state import (
    Basis,
    BiphotonState,
    CouplerConfig,
    DensityMatrix,
    bell_phi_plus,
    eigenmode_to_waveguide,
    noon_psi_minus,
    product_state,
    pure_density_matrix,
    waveguide_to_eigenmode,
)
from .tomography import (
    CountRecord,
    MeasurementSet,
    linear_inversion,
    mle_reconstruct,
    simulate_counts,
    standard_measurement_set,
)

try:
    __version__ = version("artifact")
except PackageNotFoundError:  # running from a source tree
    __version__ = "0.0.0"
