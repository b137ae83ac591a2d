"""Orbits of a linear operator, Birkhoff time averages and phase-portrait data.

The ergodic statements are realised on the finite-dimensional
discretisation; convergence is certified by Cauchy gaps between the time
averages at N and 2N rather than by an invariant measure.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DimensionError, DivergenceError, ConfigError
from .pwf import WeightingFunctionSpec

__all__ = [
    "OrbitRecord",
    "ErgodicReport",
    "PhasePortrait",
    "orbit",
    "birkhoff_check",
    "phase_portrait",
    "scale_to_norm",
    "ergodic_basin",
]

DIVERGENCE_CUTOFF = 1e12


@dataclass(frozen=True)
class OrbitRecord:
    iterates: np.ndarray  # (N+1, d), row j is T^j f0
    norms: np.ndarray
    time_average: np.ndarray  # mean of rows 1..N

    @property
    def steps(self) -> int:
        return self.iterates.shape[0] - 1


@dataclass(frozen=True)
class ErgodicReport:
    time_average_limit: np.ndarray
    invariance_residual: float
    time_vs_space_gap: float
    N_used: int

    def to_dict(self) -> dict:
        return {
            "time_average_limit": self.time_average_limit.tolist(),
            "invariance_residual": self.invariance_residual,
            "time_vs_space_gap": self.time_vs_space_gap,
            "N_used": self.N_used,
        }


def _check(T, f0) -> tuple[np.ndarray, np.ndarray]:
    T = np.asarray(T, dtype=float)
    f0 = np.asarray(f0, dtype=float).ravel()
    if T.ndim != 2 or T.shape[0] != T.shape[1]:
        raise DimensionError(f"operator must be square, got shape {T.shape}")
    if T.shape[1] != f0.size:
        raise DimensionError(f"operator is {T.shape} but f0 has {f0.size} components")
    return T, f0


def orbit(T, f0, N: int) -> OrbitRecord:
    """Iterates f_j = T^j f0 for j = 0..N.

    Raises :class:`DivergenceError` (carrying the partial record) once an
    iterate norm exceeds 1e12.
    """
    T, f0 = _check(T, f0)
    if N < 1:
        raise ConfigError("N must be >= 1")
    its = np.empty((N + 1, f0.size))
    its[0] = f0
    norms = np.empty(N + 1)
    norms[0] = np.linalg.norm(f0)
    for j in range(1, N + 1):
        its[j] = T @ its[j - 1]
        norms[j] = np.linalg.norm(its[j])
        if not np.isfinite(norms[j]) or norms[j] > DIVERGENCE_CUTOFF:
            part = OrbitRecord(its[: j + 1].copy(), norms[: j + 1].copy(), its[1 : j + 1].mean(axis=0))
            raise DivergenceError(f"orbit norm {norms[j]:.3e} exceeded cutoff at step {j}", record=part)
    return OrbitRecord(its, norms, its[1:].mean(axis=0))


def birkhoff_check(T, f0, N: int) -> ErgodicReport:
    """Time averages at N and 2N, their Cauchy gap and the invariance residual of the 2N average."""
    T, f0 = _check(T, f0)
    rec = orbit(T, f0, 2 * N)
    avg_n = rec.iterates[1 : N + 1].mean(axis=0)
    avg_2n = rec.time_average
    gap = float(np.linalg.norm(avg_2n - avg_n))
    resid = float(np.linalg.norm(T @ avg_2n - avg_2n))
    return ErgodicReport(avg_2n, resid, gap, 2 * N)


def scale_to_norm(T, target: float) -> np.ndarray:
    """Rescale ``T`` so that its spectral norm equals ``target``."""
    T = np.asarray(T, dtype=float)
    s = np.linalg.norm(T, 2)
    if s == 0:
        raise ConfigError("cannot rescale the zero operator")
    return T * (target / s)


def ergodic_basin(T, initial_vectors, N: int, tol: float = 1e-6) -> list[int]:
    """Indices of initial vectors whose Birkhoff invariance residual falls below ``tol``."""
    return [i for i, f in enumerate(initial_vectors) if birkhoff_check(T, f, N).invariance_residual < tol]


@dataclass(frozen=True)
class PhasePortrait:
    p: np.ndarray
    w: np.ndarray
    gap: np.ndarray
    crossings: list[tuple[float, float]]  # grid brackets where the gap changes sign

    def rows(self):
        return zip(self.p.tolist(), self.w.tolist(), self.gap.tolist())


def phase_portrait(w: WeightingFunctionSpec, grid_n: int) -> PhasePortrait:
    if grid_n < 2:
        raise ConfigError("grid_n must be >= 2")
    p = np.linspace(0.0, 1.0, int(grid_n))
    wp = np.asarray(w(p), dtype=float)
    gap = wp - p
    sgn = np.sign(gap)
    crossings = []
    # skip the endpoints, where every PWF touches the diagonal
    idx = np.flatnonzero(sgn[1:-1] != 0) + 1
    for a, b in zip(idx[:-1], idx[1:]):
        if sgn[a] != sgn[b]:
            crossings.append((float(p[a]), float(p[b])))
    return PhasePortrait(p, wp, gap, crossings)
