"""Simulated two-qubit state tomography.

Waveguide 1 plays the role of the first basis pole (H) and waveguide 2 the
second (V). Per photon the analyzer states are

    H = (1, 0)    V = (0, 1)    D = (1, 1)/sqrt2    R = (1, i)/sqrt2

and the 16 two-photon projectors are all pairs in the order
HH, HV, HD, HR, VH, VV, ..., RR (signal label first).
"""

from __future__ import annotations

import csv
import io
import itertools
import math
from dataclasses import dataclass
from typing import Optional

import numpy as np
from scipy.optimize import minimize

from .errors import IncompleteMeasurementError
from .metrics import check_physical, fidelity
from .state import BiphotonState, DensityMatrix

SINGLE_QUBIT_STATES = {
    "H": np.array([1.0, 0.0], dtype=complex),
    "V": np.array([0.0, 1.0], dtype=complex),
    "D": np.array([1.0, 1.0], dtype=complex) / math.sqrt(2),
    "R": np.array([1.0, 1.0j], dtype=complex) / math.sqrt(2),
}

NONPHYSICAL_TOL = 1e-8
GRAD_TOL = 1e-8


@dataclass(frozen=True, eq=False)
class MeasurementSet:
    projectors: np.ndarray  # (n, 4) complex, rows normalized
    labels: tuple

    def __post_init__(self):
        p = np.array(self.projectors, dtype=complex)
        if p.ndim != 2 or p.shape[1] != 4:
            raise ValueError("projectors must be an (n, 4) array")
        if len(self.labels) != p.shape[0]:
            raise ValueError("one label per projector required")
        if np.max(np.abs(np.linalg.norm(p, axis=1) - 1.0)) > 1e-12:
            raise ValueError("projector states must be normalized")
        p.setflags(write=False)
        object.__setattr__(self, "projectors", p)
        object.__setattr__(self, "labels", tuple(self.labels))

    def __len__(self):
        return self.projectors.shape[0]

    def design_matrix(self) -> np.ndarray:
        """A with A @ vec(rho) = [<p|rho|p>] for row-major vec(rho)."""
        p = self.projectors
        return (p.conj()[:, :, None] * p[:, None, :]).reshape(len(self), 16)

    def rank(self) -> int:
        return int(np.linalg.matrix_rank(self.design_matrix(), tol=1e-10))


def standard_measurement_set() -> MeasurementSet:
    labels, vectors = [], []
    for a, b in itertools.product("HVDR", repeat=2):
        labels.append(a + b)
        vectors.append(np.kron(SINGLE_QUBIT_STATES[a], SINGLE_QUBIT_STATES[b]))
    return MeasurementSet(np.array(vectors), tuple(labels))


@dataclass(frozen=True, eq=False)
class CountRecord:
    counts: np.ndarray
    total_scale: float
    labels: Optional[tuple] = None

    def __post_init__(self):
        counts = np.array(self.counts, dtype=float)
        if counts.ndim != 1:
            raise ValueError("counts must be one-dimensional")
        if not np.all(np.isfinite(counts)) or np.any(counts < 0):
            raise ValueError("counts must be finite and non-negative")
        counts.setflags(write=False)
        object.__setattr__(self, "counts", counts)
        if self.labels is not None:
            object.__setattr__(self, "labels", tuple(self.labels))

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["projector", "count"])
        labels = self.labels or tuple(str(i) for i in range(len(self.counts)))
        for label, n in zip(labels, self.counts):
            w.writerow([label, repr(float(n))])
        return buf.getvalue()

    @classmethod
    def from_csv(cls, text: str, total_scale: Optional[float] = None) -> "CountRecord":
        rows = list(csv.reader(io.StringIO(text)))
        if not rows or [h.strip() for h in rows[0]] != ["projector", "count"]:
            raise ValueError("count CSV must start with the header 'projector,count'")
        body = [r for r in rows[1:] if r]
        labels = tuple(r[0].strip() for r in body)
        counts = [float(r[1]) for r in body]
        if total_scale is None:
            total_scale = float(sum(counts))
        return cls(counts, total_scale, labels)


def simulate_counts(rho, mset: MeasurementSet, N: float, noise: str = "none", seed: int = 0) -> CountRecord:
    """Expected (or Poisson-sampled) coincidences N <p|rho|p> per projector.

    Sampling uses numpy's PCG64 generator seeded with ``seed``.
    """
    m = check_physical(rho)
    if not N > 0:
        raise ValueError("mean total count N must be > 0")
    p = mset.projectors
    expected = N * np.clip(np.real(np.einsum("ia,ab,ib->i", p.conj(), m, p)), 0.0, None)
    noise = noise.lower()
    if noise == "none":
        counts = expected
    elif noise == "poisson":
        rng = np.random.Generator(np.random.PCG64(seed))
        counts = rng.poisson(expected).astype(float)
    else:
        raise ValueError(f"unknown noise model {noise!r}; use 'none' or 'poisson'")
    return CountRecord(counts, float(N), mset.labels)


def linear_inversion(record: CountRecord, mset: MeasurementSet) -> DensityMatrix:
    """Least-squares inversion of counts = N A vec(rho); no positivity projection."""
    a = mset.design_matrix()
    if np.linalg.matrix_rank(a, tol=1e-10) < 16:
        raise IncompleteMeasurementError("measurement set is not tomographically complete")
    if len(record.counts) != len(mset):
        raise ValueError("count record and measurement set differ in length")
    probs = record.counts / record.total_scale
    x, *_ = np.linalg.lstsq(a, probs.astype(complex), rcond=None)
    rho = x.reshape(4, 4)
    rho = 0.5 * (rho + rho.conj().T)
    tr = np.real(np.trace(rho))
    if tr != 0:
        rho = rho / tr
    min_eig = float(np.linalg.eigvalsh(rho)[0])
    residual = float(np.max(np.abs(a @ (rho.reshape(16) * tr) - probs)))
    return DensityMatrix(
        rho,
        physical=min_eig >= -NONPHYSICAL_TOL,
        meta={"min_eigenvalue": min_eig, "residual": residual},
    )


# Lower-triangular parametrization: 4 real diagonal + 6 complex sub-diagonal entries.
_TRI = np.tril_indices(4, -1)


def _params_to_t(x: np.ndarray) -> np.ndarray:
    t = np.diag(x[:4]).astype(complex)
    t[_TRI] = x[4:10] + 1j * x[10:16]
    return t


def _t_to_params(t: np.ndarray) -> np.ndarray:
    return np.concatenate([np.real(np.diag(t)), np.real(t[_TRI]), np.imag(t[_TRI])])


def _rho_from_t(t: np.ndarray) -> np.ndarray:
    g = t.conj().T @ t
    return g / np.real(np.trace(g))


def _psd_project(rho: np.ndarray) -> np.ndarray:
    w, v = np.linalg.eigh(0.5 * (rho + rho.conj().T))
    w = np.clip(w, 0.0, None)
    if w.sum() == 0:
        return np.eye(4) / 4
    return (v * w) @ v.conj().T / w.sum()


def _t_from_rho(rho: np.ndarray, floor: float = 1e-6) -> np.ndarray:
    """Triangular factor with T^dag T ~ rho (small floor keeps it invertible)."""
    reg = rho + floor * np.eye(4)
    # Cholesky in reversed index order gives reg = U U^dag with U upper
    # triangular; T = U^dag is then lower triangular with T^dag T = reg.
    j = np.eye(4)[::-1]
    upper = j @ np.linalg.cholesky(j @ reg @ j) @ j
    return upper.conj().T


@dataclass(frozen=True, eq=False)
class MLEResult:
    rho: DensityMatrix
    converged: bool
    iterations: int
    log_likelihood: float
    message: str = ""


def mle_fit(
    record: CountRecord,
    mset: MeasurementSet,
    init: str = "identity",
    max_iter: int = 100_000,
    tol: float = 1e-10,
    patience: int = 10,
) -> MLEResult:
    """Maximum-likelihood density matrix under Poisson statistics.

    rho = T^dag T / Tr(T^dag T) with T lower triangular, so the result is
    Hermitian, PSD and unit-trace by construction. The unnormalized
    T^dag T also carries the overall rate, so the objective is the plain
    Poisson log-likelihood sum_j n_j log mu_j - mu_j with mu_j = <p_j|T^dag T|p_j>
    (counts scaled to unit sum). Zero-count projectors contribute only -mu_j.

    Optimization is L-BFGS with the analytic gradient. It stops once the
    log-likelihood gain stays below ``tol`` for ``patience`` consecutive
    iterations, or after ``max_iter`` iterations; the latter is reported
    as not converged.
    """
    if len(record.counts) != len(mset):
        raise ValueError("count record and measurement set differ in length")
    if mset.rank() < 16:
        raise IncompleteMeasurementError("measurement set is not tomographically complete")
    total = float(np.sum(record.counts))
    if total <= 0:
        raise ValueError("total counts must be > 0 for maximum-likelihood reconstruction")
    n = record.counts / total
    pos = n > 0
    p = mset.projectors
    # projector outer products |p><p| used in the gradient
    pp = p[:, :, None] * p[:, None, :].conj()

    def negloglik(x):
        t = _params_to_t(x)
        tp = p @ t.T  # rows: T p_j
        mu = np.sum(np.abs(tp) ** 2, axis=1)
        if np.any(mu[pos] <= 0):
            return np.inf, np.zeros_like(x)
        f = np.sum(mu) - np.sum(n[pos] * np.log(mu[pos]))
        coef = np.ones_like(mu)
        coef[pos] -= n[pos] / mu[pos]
        # d f / d conj(T) = sum_j coef_j T p_j p_j^dag
        g = t @ np.einsum("j,jab->ab", coef, pp)
        grad = np.concatenate(
            [2 * np.real(np.diag(g)), 2 * np.real(g[_TRI]), 2 * np.imag(g[_TRI])]
        )
        return f, grad

    if init == "identity":
        x0 = _t_to_params(np.eye(4) * 0.5)
    elif init == "linear":
        guess = _psd_project(linear_inversion(record, mset).rho)
        x0 = _t_to_params(_t_from_rho(guess) * 0.5)
    else:
        raise ValueError(f"unknown initialization {init!r}")

    state = {"best": negloglik(x0)[0], "quiet": 0, "iters": 0, "stalled": False}

    def callback(intermediate_result):
        state["iters"] += 1
        f = intermediate_result.fun
        if state["best"] - f < tol:
            state["quiet"] += 1
        else:
            state["quiet"] = 0
        state["best"] = min(state["best"], f)
        if state["quiet"] >= patience:
            state["stalled"] = True
            raise StopIteration

    res = minimize(
        negloglik,
        x0,
        jac=True,
        method="L-BFGS-B",
        callback=callback,
        options={"maxiter": max_iter, "ftol": 0.0, "gtol": 1e-14, "maxcor": 30},
    )
    converged = bool(res.success or state["stalled"])
    if not converged:
        # L-BFGS may abort its line search at the optimum itself.
        converged = bool(np.max(np.abs(negloglik(res.x)[1])) < GRAD_TOL)
    rho = _rho_from_t(_params_to_t(res.x))
    rho = 0.5 * (rho + rho.conj().T)
    ll = -float(res.fun) * total
    meta = {"converged": converged, "iterations": int(res.nit), "log_likelihood": ll}
    return MLEResult(DensityMatrix(rho, True, meta), converged, int(res.nit), ll, str(res.message))


def mle_reconstruct(record: CountRecord, mset: MeasurementSet, init: str = "identity") -> DensityMatrix:
    """Physical ML reconstruction; convergence details are in ``.meta``."""
    return mle_fit(record, mset, init=init).rho


def bootstrap_fidelity(
    record: CountRecord,
    mset: MeasurementSet,
    target: BiphotonState,
    resamples: int = 50,
    seed: int = 0,
) -> tuple:
    """Mean and standard deviation of the MLE fidelity over Poisson resamplings of the counts."""
    rng = np.random.Generator(np.random.PCG64(seed))
    values = []
    for _ in range(resamples):
        counts = rng.poisson(record.counts).astype(float)
        if counts.sum() == 0:
            continue
        rho = mle_reconstruct(CountRecord(counts, record.total_scale, record.labels), mset)
        values.append(fidelity(rho, target))
    return float(np.mean(values)), float(np.std(values, ddof=1)) if len(values) > 1 else 0.0
