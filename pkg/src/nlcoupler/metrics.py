"""Entanglement and similarity measures for two-qubit states."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from .errors import PhysicalityError
from .state import Basis, BiphotonState, DensityMatrix, require_normalized

PSD_TOL = 1e-8
HERMITIAN_TOL = 1e-10
TRACE_TOL = 1e-8

SIGMA_Y = np.array([[0, -1j], [1j, 0]])
SPIN_FLIP = np.kron(SIGMA_Y, SIGMA_Y)


@dataclass(frozen=True)
class MetricsReport:
    concurrence: float
    purity: float
    fidelity_vs_target: Optional[float] = None


def _as_matrix(rho) -> np.ndarray:
    if isinstance(rho, DensityMatrix):
        return np.asarray(rho.rho)
    return np.asarray(rho, dtype=complex)


def check_physical(rho) -> np.ndarray:
    """Validate Hermiticity, unit trace and positivity; return the Hermitian part."""
    m = _as_matrix(rho)
    if m.shape != (4, 4):
        raise PhysicalityError(f"expected a 4x4 matrix, got {m.shape}")
    if np.max(np.abs(m - m.conj().T)) > HERMITIAN_TOL:
        raise PhysicalityError("density matrix is not Hermitian")
    m = 0.5 * (m + m.conj().T)
    tr = np.real(np.trace(m))
    if abs(tr - 1.0) > TRACE_TOL:
        raise PhysicalityError(f"density matrix trace is {tr!r}, expected 1")
    w = np.linalg.eigvalsh(m)
    if w[0] < -PSD_TOL:
        raise PhysicalityError(f"density matrix has negative eigenvalue {w[0]!r}")
    return m


def concurrence(rho) -> float:
    """Wootters concurrence max(0, l1 - l2 - l3 - l4).

    The l_i are the square roots of the eigenvalues of rho (sy x sy) rho* (sy x sy).
    They are obtained as singular values of X^dag (sy x sy) X^* with
    rho = X X^dag, which avoids square roots of round-off sized eigenvalues.
    """
    m = check_physical(rho)
    w, v = np.linalg.eigh(m)
    w = np.clip(w, 0.0, None)
    x = v * np.sqrt(w)
    tau = x.conj().T @ SPIN_FLIP @ x.conj()
    lam = np.linalg.svd(tau, compute_uv=False)
    c = lam[0] - lam[1] - lam[2] - lam[3]
    return float(min(max(c, 0.0), 1.0))


def concurrence_pure(state: BiphotonState) -> float:
    """Closed form 2 |a11 a22 - a12 a21| for a normalized pure state."""
    if state.basis is not Basis.WAVEGUIDE:
        raise ValueError("concurrence is defined on waveguide-basis states")
    require_normalized(state)
    a = state.amp
    return float(min(2.0 * abs(a[0, 0] * a[1, 1] - a[0, 1] * a[1, 0]), 1.0))


def fidelity(rho, target: BiphotonState) -> float:
    """Overlap <target| rho |target> with a pure target state."""
    m = check_physical(rho)
    require_normalized(target)
    psi = target.vector()
    f = np.real(psi.conj() @ m @ psi)
    return float(min(max(f, 0.0), 1.0))


def purity(rho) -> float:
    m = check_physical(rho)
    return float(np.real(np.trace(m @ m)))


def metrics_report(rho, target: Optional[BiphotonState] = None) -> MetricsReport:
    return MetricsReport(
        concurrence=concurrence(rho),
        purity=purity(rho),
        fidelity_vs_target=None if target is None else fidelity(rho, target),
    )
