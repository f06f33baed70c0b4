"""Core types: biphoton amplitudes, coupler parameters and density matrices.

Amplitude arrays are 2x2 and indexed ``amp[l, m]`` with ``l`` the signal and
``m`` the idler label. In the waveguide basis index 0 is waveguide 1 and
index 1 is waveguide 2. In the eigenmode basis index 0 is the symmetric
(k = 0) supermode and index 1 the antisymmetric (k = pi) supermode.

The two-qubit ordering used for density matrices is (11, 12, 21, 22).
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field, replace

import numpy as np

from .errors import BasisMismatchError, DegenerateStateError, NormalizationError

NORM_TOL = 1e-9
_TRIG_SNAP = 4e-16

# MODE_PHASES[k, l] = exp(i k l) for k in (0, pi) and waveguide l in (1, 2).
MODE_PHASES = np.array([[1.0, 1.0], [-1.0, 1.0]])

BASIS_LABELS = ("11", "12", "21", "22")


class Basis(enum.Enum):
    WAVEGUIDE = "waveguide"
    EIGENMODE = "eigenmode"


@dataclass(frozen=True, eq=False)
class BiphotonState:
    amp: np.ndarray
    basis: Basis = Basis.WAVEGUIDE

    def __post_init__(self):
        amp = np.array(self.amp, dtype=complex)
        if amp.shape == (4,):
            amp = amp.reshape(2, 2)
        if amp.shape != (2, 2):
            raise ValueError(f"amplitude array must be 2x2, got shape {amp.shape}")
        if not np.all(np.isfinite(amp)):
            raise ValueError("amplitudes must be finite")
        amp.setflags(write=False)
        object.__setattr__(self, "amp", amp)
        object.__setattr__(self, "basis", Basis(self.basis))

    @classmethod
    def symmetric(cls, amp, basis=Basis.WAVEGUIDE):
        """Build a state with the signal/idler exchange symmetry imposed exactly."""
        amp = np.asarray(amp, dtype=complex).reshape(2, 2)
        off = 0.5 * (amp[0, 1] + amp[1, 0])
        amp = np.array([[amp[0, 0], off], [off, amp[1, 1]]])
        return cls(amp, basis)

    @property
    def norm(self) -> float:
        return float(np.sum(np.abs(self.amp) ** 2))

    @property
    def probabilities(self) -> np.ndarray:
        return np.abs(self.amp) ** 2

    def vector(self) -> np.ndarray:
        """Amplitudes flattened in (11, 12, 21, 22) order."""
        return self.amp.reshape(4).copy()

    def is_zero(self) -> bool:
        return not np.any(self.amp)

    def __repr__(self):
        return f"BiphotonState({self.amp.tolist()!r}, basis={self.basis.value})"


@dataclass(frozen=True)
class CouplerConfig:
    """Physical parameters of the pumped two-waveguide coupler.

    ``c`` and ``delta_beta0`` are in 1/m, ``L`` in m; ``gamma`` and the pump
    amplitudes are dimensionless. The pump phase enters only via
    ``delta_phi``.
    """

    c: float = 33.0
    L: float = 0.0475
    gamma: float = 1.0
    A1: float = 1.0
    A2: float = 1.0
    delta_phi: float = 0.0
    delta_beta0: float = 0.0

    def __post_init__(self):
        bad = []
        for name in ("c", "L", "gamma", "A1", "A2", "delta_phi", "delta_beta0"):
            if not np.isfinite(getattr(self, name)):
                bad.append(f"{name} must be finite")
        if self.c <= 0:
            bad.append("c must be > 0")
        if self.L <= 0:
            bad.append("L must be > 0")
        if self.gamma < 0:
            bad.append("gamma must be >= 0")
        if self.A1 < 0 or self.A2 < 0:
            bad.append("pump amplitudes must be >= 0")
        if bad:
            raise ValueError("; ".join(bad))

    @property
    def Lc(self) -> float:
        return self.L * self.c

    @property
    def delta_beta_over_c(self) -> float:
        return self.delta_beta0 / self.c

    def with_point(self, delta_phi: float, delta_beta_over_c: float) -> "CouplerConfig":
        return replace(self, delta_phi=delta_phi, delta_beta0=delta_beta_over_c * self.c)


@dataclass(frozen=True, eq=False)
class DensityMatrix:
    """4x4 two-qubit density matrix over the ordered basis (11, 12, 21, 22).

    ``physical`` is False for reconstructions (e.g. linear inversion) whose
    spectrum dips below -1e-8.
    """

    rho: np.ndarray
    physical: bool = True
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        rho = np.array(self.rho, dtype=complex)
        if rho.shape != (4, 4):
            raise ValueError(f"density matrix must be 4x4, got shape {rho.shape}")
        rho.setflags(write=False)
        object.__setattr__(self, "rho", rho)

    @property
    def trace(self) -> float:
        return float(np.real(np.trace(self.rho)))

    def eigenvalues(self) -> np.ndarray:
        return np.linalg.eigvalsh(0.5 * (self.rho + self.rho.conj().T))


def pump_phasor(delta_phi: float) -> complex:
    """exp(i delta_phi) with sub-ulp trig residue snapped to zero.

    Keeps e.g. ``pump_phasor(math.pi) == -1`` exact, so that equal pumps in
    antiphase cancel the even pump mode identically.
    """
    re, im = math.cos(delta_phi), math.sin(delta_phi)
    if abs(re) < _TRIG_SNAP:
        re = 0.0
    if abs(im) < _TRIG_SNAP:
        im = 0.0
    return complex(re, im)


def _require_basis(state: BiphotonState, basis: Basis):
    if state.basis is not basis:
        raise BasisMismatchError(
            f"expected a state in the {basis.value} basis, got {state.basis.value}"
        )


def eigenmode_to_waveguide(state: BiphotonState) -> BiphotonState:
    """Map eigenmode amplitudes to waveguide amplitudes.

    Uses the unitary convention psi_n[l, m] = 1/2 sum_k psi_k[kl, km]
    exp(i kl l) exp(i km m), so the norm is basis independent.
    """
    _require_basis(state, Basis.EIGENMODE)
    amp = 0.5 * MODE_PHASES.T @ state.amp @ MODE_PHASES
    return BiphotonState(amp, Basis.WAVEGUIDE)


def waveguide_to_eigenmode(state: BiphotonState) -> BiphotonState:
    _require_basis(state, Basis.WAVEGUIDE)
    amp = 0.5 * MODE_PHASES @ state.amp @ MODE_PHASES.T
    return BiphotonState(amp, Basis.EIGENMODE)


def normalize(state: BiphotonState) -> BiphotonState:
    norm = state.norm
    if norm == 0.0:
        raise DegenerateStateError("cannot normalize a zero state (no pairs generated)")
    return BiphotonState(state.amp / np.sqrt(norm), state.basis)


def require_normalized(state: BiphotonState, tol: float = NORM_TOL):
    if abs(state.norm - 1.0) > tol:
        raise NormalizationError(f"state is not normalized (norm = {state.norm!r})")


def pure_density_matrix(state: BiphotonState) -> DensityMatrix:
    """Return |psi><psi| for a normalized waveguide-basis state."""
    _require_basis(state, Basis.WAVEGUIDE)
    require_normalized(state)
    psi = state.vector()
    return DensityMatrix(np.outer(psi, psi.conj()))


def gauge_fixed(state: BiphotonState, rel_tol: float = 1e-12) -> BiphotonState:
    """Remove the global phase.

    amp[2,2] is made real and non-negative; if it vanishes amp[1,1] is used,
    then amp[1,2].
    """
    scale = np.sqrt(state.norm)
    if scale == 0.0:
        return state
    for ref in (state.amp[1, 1], state.amp[0, 0], state.amp[0, 1]):
        if abs(ref) > rel_tol * scale:
            return BiphotonState(state.amp * (abs(ref) / ref), state.basis)
    return state


# Named reference states in the waveguide basis.
def bell_phi_plus() -> BiphotonState:
    s = 1 / np.sqrt(2)
    return BiphotonState([[0, s], [s, 0]])


def noon_psi_minus() -> BiphotonState:
    s = 1 / np.sqrt(2)
    return BiphotonState([[s, 0], [0, -s]])


def product_state() -> BiphotonState:
    return BiphotonState([[0.5, 0.5], [0.5, 0.5]])
