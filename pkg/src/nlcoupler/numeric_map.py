"""Parameter maps of the filtered output of an inhomogeneous, dispersive coupler."""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor


from .analytic import PHASE_FLOOR, QUANTITIES, CorrelationMap, SweepGrid, assemble_map
from .errors import DegenerateStateError
from .filtering import FilterSpec, filtered_correlations, reduced_density_matrix
from .metrics import concurrence
from .propagation import (
    DEFAULT_STEPS,
    DispersionModel,
    InhomogeneityProfile,
    SpectralState,
    frequency_grid,
    integrate_spectra,
)
from .state import CouplerConfig

_NULL = (math.nan,) * len(QUANTITIES)


def filtered_observables(spectral: SpectralState, spec: FilterSpec) -> tuple:
    """Map quantities for one spectrum.

    Probabilities are the normalized filtered correlations; phases come from
    the coherences rho[11,22] and rho[12,22] of the reduced density matrix.
    """
    try:
        corr = filtered_correlations(spectral, spec)
        rho = reduced_density_matrix(spectral, spec).rho
    except DegenerateStateError:
        return _NULL
    g = corr.gamma
    c11_22, c12_22 = rho[0, 3], rho[1, 3]
    floor = PHASE_FLOOR * PHASE_FLOOR
    ph11 = math.atan2(c11_22.imag, c11_22.real) if abs(c11_22) > floor else math.nan
    ph12 = math.atan2(c12_22.imag, c12_22.real) if abs(c12_22) > floor else math.nan
    return (g[0, 0], g[0, 1], g[1, 1], ph11, ph12, concurrence(rho))


def sweep_filtered(
    config_base: CouplerConfig,
    dispersion: DispersionModel,
    profile: InhomogeneityProfile,
    spec: FilterSpec,
    grid: SweepGrid,
    points: int = 101,
    span: float = 1.5,
    steps: int = DEFAULT_STEPS,
    check: bool = True,
    threads: int = 1,
) -> CorrelationMap:
    """Filtered correlations and reduced-state concurrence at every grid point.

    Work is split by delta_phi rows; each row is one batched integration.
    """
    freqs = frequency_grid(spec.omega0, spec.fwhm, points, span)

    def row(phi):
        cfgs = [config_base.with_point(phi, b) for b in grid.delta_beta_over_c_values]
        spectra = integrate_spectra(cfgs, dispersion, profile, freqs, steps, check, spec.omega0)
        return [filtered_observables(s, spec) for s in spectra]

    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            rows = list(pool.map(row, grid.delta_phi_values))
    else:
        rows = [row(phi) for phi in grid.delta_phi_values]
    return assemble_map(grid, [r for block in rows for r in block])
