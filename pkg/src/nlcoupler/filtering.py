"""Gaussian bandpass filter, filtered spatial correlations and the reduced density matrix."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .errors import DegenerateStateError, GridError
from .propagation import SpectralState, check_symmetric_grid
from .state import DensityMatrix

SPEED_OF_LIGHT = 299_792_458.0  # m/s, exact


def wavelength_to_omega(wavelength_nm: float) -> float:
    return 2 * math.pi * SPEED_OF_LIGHT / (wavelength_nm * 1e-9)


def bandwidth_nm_to_omega(fwhm_nm: float, center_nm: float) -> float:
    """Convert a wavelength FWHM to angular frequency at the given center (linearized)."""
    return 2 * math.pi * SPEED_OF_LIGHT * (fwhm_nm * 1e-9) / (center_nm * 1e-9) ** 2


@dataclass(frozen=True)
class FilterSpec:
    """Gaussian filter, stored in angular frequency (rad/s).

    Build from wavelengths with :meth:`from_wavelength`. ``pump_omega``
    defaults to twice the center (degenerate SPDC).
    """

    omega0: float
    fwhm: float
    pump_omega: Optional[float] = None

    def __post_init__(self):
        if not (math.isfinite(self.omega0) and self.omega0 > 0):
            raise ValueError("filter center must be a positive finite frequency")
        if not (math.isfinite(self.fwhm) and self.fwhm > 0):
            raise ValueError("filter FWHM must be > 0")
        if self.pump_omega is None:
            object.__setattr__(self, "pump_omega", 2.0 * self.omega0)
        elif abs(self.pump_omega - 2 * self.omega0) > 1e-9 * 2 * self.omega0:
            raise ValueError("pump frequency must equal twice the filter center (degenerate SPDC)")

    @classmethod
    def from_wavelength(cls, center_nm: float = 1342.0, fwhm_nm: float = 12.0, pump_omega=None):
        if center_nm <= 0 or fwhm_nm <= 0:
            raise ValueError("filter center and FWHM must be > 0")
        return cls(wavelength_to_omega(center_nm), bandwidth_nm_to_omega(fwhm_nm, center_nm), pump_omega)


def filter_response(spec: FilterSpec, omega):
    """exp(-4 ln2 (omega - omega0)^2 / fwhm^2)."""
    x = (np.asarray(omega, dtype=float) - spec.omega0) / spec.fwhm
    return np.exp(-4.0 * math.log(2.0) * x * x)


def _pair_weights(spectral: SpectralState, spec: FilterSpec) -> np.ndarray:
    """Trapezoid weights times F(omega) F(omega_p - omega); a lone point gets weight F^2."""
    freqs = spectral.frequencies
    check_symmetric_grid(freqs, spec.omega0)
    if not math.isclose(spectral.omega0, spec.omega0, rel_tol=1e-12):
        raise GridError("spectral grid and filter use different center frequencies")
    if freqs.size == 1:
        quad = np.ones(1)
    else:
        dx = np.diff(freqs)
        quad = np.zeros(freqs.size)
        quad[:-1] += 0.5 * dx
        quad[1:] += 0.5 * dx
    return quad * filter_response(spec, freqs) * filter_response(spec, spec.pump_omega - freqs)


def _exact_sum(values: np.ndarray, axis: int = 0) -> np.ndarray:
    """Correctly rounded sum along ``axis``, independent of summation order."""
    moved = np.moveaxis(np.asarray(values), axis, -1)
    flat = moved.reshape(-1, moved.shape[-1])
    if np.iscomplexobj(flat):
        out = np.array([complex(math.fsum(r.real), math.fsum(r.imag)) for r in flat])
    else:
        out = np.array([math.fsum(r) for r in flat])
    return out.reshape(moved.shape[:-1])


@dataclass(frozen=True, eq=False)
class FilteredCorrelations:
    """Filter-weighted pair detection rates gamma[n_s, n_i] (2x2).

    ``raw`` is the unnormalized integral and ``gamma`` the copy normalized to
    unit sum.
    """

    raw: np.ndarray
    gamma: np.ndarray
    normalized: bool = True


def filtered_correlations(spectral: SpectralState, spec: FilterSpec) -> FilteredCorrelations:
    w = _pair_weights(spectral, spec)
    intens = np.abs(spectral.amplitudes()) ** 2
    raw = _exact_sum(w[:, None, None] * intens, axis=0)
    total = math.fsum(raw.ravel())
    if total <= 0.0:
        raise DegenerateStateError("filtered pair rate is zero")
    gamma = raw / total
    raw.setflags(write=False)
    gamma.setflags(write=False)
    return FilteredCorrelations(raw, gamma)


def reduced_density_matrix(spectral: SpectralState, spec: FilterSpec) -> DensityMatrix:
    """Filter-weight the per-frequency |psi><psi|, trace out frequency, renormalize to trace one."""
    w = _pair_weights(spectral, spec)
    psi = spectral.amplitudes().reshape(-1, 4)
    outer = psi[:, :, None] * psi[:, None, :].conj()
    rho = _exact_sum(w[:, None, None] * outer, axis=0)
    tr = math.fsum(np.real(np.diag(rho)))
    if tr <= 0.0:
        raise DegenerateStateError("filtered pair rate is zero")
    rho = rho / tr
    rho = 0.5 * (rho + rho.conj().T)
    return DensityMatrix(rho)
