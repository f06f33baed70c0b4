"""Closed-form biphoton state of the homogeneous, degenerate coupler and parameter maps."""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .errors import DegenerateStateError
from .metrics import concurrence_pure
from .state import (
    Basis,
    BiphotonState,
    CouplerConfig,
    eigenmode_to_waveguide,
    gauge_fixed,
    normalize,
    pump_phasor,
)

#: Mismatch change per degree Celsius, in units of the coupling constant.
MISMATCH_PER_DEGREE = 25.0

# Components below this normalized magnitude have no meaningful phase.
PHASE_FLOOR = 1e-12


def sinc(x: float) -> float:
    """sin(pi x) / x, equal to pi at x = 0.

    Note this is *not* the normalized sinc of numpy.
    """
    if x == 0.0:
        return math.pi
    return math.sin(math.pi * x) / x


def temperature_to_mismatch(delta_T: float, per_degree: float = MISMATCH_PER_DEGREE) -> float:
    """Convert a sample temperature change (deg C) into a change of delta_beta / c."""
    return per_degree * delta_T


def solve_eigenmode(config: CouplerConfig) -> BiphotonState:
    """Eigenmode amplitudes (k = 0, pi) at the output of a homogeneous coupler."""
    lc = config.Lc
    b = config.delta_beta_over_c
    pump_e = pump_phasor(config.delta_phi)
    pref = config.gamma * config.L / 4.0
    even = pref * (config.A1 + config.A2 * pump_e)
    odd = -pref * (config.A1 - config.A2 * pump_e)

    psi_00 = even * np.exp(1j * lc * (b + 2) / 2) * sinc(lc * (b - 2) / (2 * math.pi))
    psi_pp = even * np.exp(1j * lc * (b - 2) / 2) * sinc(lc * (b + 2) / (2 * math.pi))
    psi_0p = odd * np.exp(1j * lc * b / 2) * sinc(lc * b / (2 * math.pi))
    # The closed form pairs with a back-transform lacking the 1/2 factor;
    # doubling gives amplitudes in the unitary convention used here.
    amp = 2.0 * np.array([[psi_00, psi_0p], [psi_0p, psi_pp]])
    return BiphotonState(amp, Basis.EIGENMODE)


def solve_waveguide(config: CouplerConfig) -> BiphotonState:
    """Normalized waveguide-basis state; raises DegenerateStateError if no pairs are made."""
    raw = eigenmode_to_waveguide(solve_eigenmode(config))
    if raw.is_zero():
        raise DegenerateStateError("configuration generates no photon pairs")
    return normalize(BiphotonState.symmetric(raw.amp))


@dataclass(frozen=True)
class SweepGrid:
    delta_phi_values: tuple
    delta_beta_over_c_values: tuple

    def __post_init__(self):
        phis = tuple(float(v) for v in self.delta_phi_values)
        betas = tuple(float(v) for v in self.delta_beta_over_c_values)
        if not phis or not betas:
            raise ValueError("sweep grid axes must be non-empty")
        if not all(map(math.isfinite, phis + betas)):
            raise ValueError("sweep grid values must be finite")
        object.__setattr__(self, "delta_phi_values", phis)
        object.__setattr__(self, "delta_beta_over_c_values", betas)

    @classmethod
    def linspace(cls, phi_range=(-math.pi, math.pi), beta_range=(-8.0, 8.0), num=(21, 21)):
        return cls(
            tuple(np.linspace(*phi_range, num[0])),
            tuple(np.linspace(*beta_range, num[1])),
        )

    @property
    def shape(self):
        return len(self.delta_phi_values), len(self.delta_beta_over_c_values)

    def points(self):
        """Grid points in row-major (delta_phi outer) order."""
        return [(p, b) for p in self.delta_phi_values for b in self.delta_beta_over_c_values]


QUANTITIES = ("p11", "p12", "p22", "phase11_rel", "phase12_rel", "concurrence")


@dataclass(frozen=True, eq=False)
class CorrelationMap:
    """Per-point observables on a SweepGrid; arrays have shape grid.shape.

    Points where no state exists hold NaN in every quantity. Phases are NaN
    where the component itself (or the reference amp22) vanishes.
    """

    grid: SweepGrid
    p11: np.ndarray
    p12: np.ndarray
    p22: np.ndarray
    phase11_rel: np.ndarray
    phase12_rel: np.ndarray
    concurrence: np.ndarray

    def quantity(self, name: str) -> np.ndarray:
        if name not in QUANTITIES:
            raise KeyError(name)
        return getattr(self, name)

    def at(self, delta_phi: float, delta_beta_over_c: float) -> dict:
        i = self.grid.delta_phi_values.index(float(delta_phi))
        j = self.grid.delta_beta_over_c_values.index(float(delta_beta_over_c))
        return {q: float(getattr(self, q)[i, j]) for q in QUANTITIES}


def relative_phases(state: BiphotonState):
    """Phases of amp11 and amp12 relative to amp22 (radians), NaN when undefined."""
    g = gauge_fixed(state)
    a = g.amp
    scale = math.sqrt(g.norm)
    if abs(a[1, 1]) <= PHASE_FLOOR * scale:
        return math.nan, math.nan
    ph11 = math.atan2(a[0, 0].imag, a[0, 0].real) if abs(a[0, 0]) > PHASE_FLOOR * scale else math.nan
    ph12 = math.atan2(a[0, 1].imag, a[0, 1].real) if abs(a[0, 1]) > PHASE_FLOOR * scale else math.nan
    return ph11, ph12


def point_observables(state: BiphotonState) -> tuple:
    """(p11, p12, p22, phase11_rel, phase12_rel, concurrence) of a normalized state."""
    p = state.probabilities
    ph11, ph12 = relative_phases(state)
    return (p[0, 0], p[0, 1], p[1, 1], ph11, ph12, concurrence_pure(state))


_NULL = (math.nan,) * len(QUANTITIES)


def _analytic_point(config_base: CouplerConfig, point) -> tuple:
    try:
        state = solve_waveguide(config_base.with_point(*point))
    except DegenerateStateError:
        return _NULL
    return point_observables(state)


def assemble_map(grid: SweepGrid, rows) -> CorrelationMap:
    data = np.array(rows, dtype=float).reshape(grid.shape + (len(QUANTITIES),))
    return CorrelationMap(grid, *(data[..., k] for k in range(len(QUANTITIES))))


def sweep(config_base: CouplerConfig, grid: SweepGrid, threads: int = 1) -> CorrelationMap:
    """Evaluate the analytic state at every grid point.

    Results are collected in grid order, so the map does not depend on
    ``threads``.
    """
    points = grid.points()
    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            rows = list(pool.map(lambda pt: _analytic_point(config_base, pt), points))
    else:
        rows = [_analytic_point(config_base, pt) for pt in points]
    return assemble_map(grid, rows)


def steering_dominance(state: BiphotonState) -> tuple:
    """Return (max single-waveguide pair probability, its share of p11 + p22)."""
    p = state.probabilities
    diag = p[0, 0] + p[1, 1]
    top = max(p[0, 0], p[1, 1])
    return float(top), float(top / diag) if diag > 0 else math.nan
