"""Confidence kernel over loss/gain probability grids and its matrix operators."""

from __future__ import annotations

import enum
import logging
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from ._workers import resolve_workers
from .errors import NearSingularError, NumericError, OrderingError, ConfigError
from .pwf import Family, WeightingFunctionSpec, fixed_point

__all__ = [
    "Quadrature",
    "KernelMatrix",
    "SpectrumReport",
    "confidence_kernel",
    "singular_kernel",
    "build_kernel_matrix",
    "behavioral_adjoint",
    "composite_T",
    "spectrum",
]

log = logging.getLogger(__name__)

DEFAULT_QUAD_POINTS = 1024


class Quadrature(str, enum.Enum):
    TRAPEZOID = "trapezoid"
    SIMPSON = "simpson"


class OffDomainWarning(UserWarning):
    """Kernel evaluated outside the loss x gain domain (p_l > p* or p_g <= p*)."""


def _default_quadrature(w: WeightingFunctionSpec) -> Quadrature:
    return Quadrature.TRAPEZOID if w.family is Family.TABULATED else Quadrature.SIMPSON


def _integrate_gap(w: WeightingFunctionSpec, a: float, b: float, quadrature: Quadrature, n: int) -> float:
    # Quintic smoothstep substitution p = a + (b-a)*phi(s) clusters nodes at both
    # ends; PWFs such as p**0.61 have unbounded slope at 0 and 1 which otherwise
    # caps composite rules at ~1e-6.  phi'(0) = phi'(1) = 0 keeps the rule's order.
    s = np.linspace(0.0, 1.0, n + 1)
    phi = s**3 * (10.0 - 15.0 * s + 6.0 * s * s)
    dphi = 30.0 * s * s * (1.0 - s) ** 2
    p = a + (b - a) * phi
    p[0], p[-1] = a, b
    y = (w.raw(p) - p) * dphi
    h = 1.0 / n
    if quadrature is Quadrature.SIMPSON:
        total = y[0] + y[-1] + 4.0 * y[1:-1:2].sum() + 2.0 * y[2:-1:2].sum()
        return float((b - a) * h / 3.0 * total)
    return float((b - a) * h * (0.5 * (y[0] + y[-1]) + y[1:-1].sum()))


def confidence_kernel(
    w: WeightingFunctionSpec,
    p_l: float,
    p_g: float,
    quadrature: Quadrature | str | None = None,
    quad_points: int = DEFAULT_QUAD_POINTS,
    p_star: float | None = None,
) -> float:
    """Integral of w(p) - p from p_l to p_g.

    Equivalently ``int w dp - (p_g**2 - p_l**2)/2``; the integrand is taken as
    the difference so that the identity PWF gives an exact zero.

    If ``p_star`` is supplied and the pair does not straddle it an
    :class:`OffDomainWarning` is emitted; the value is still returned.
    """
    if not (0.0 <= p_l <= 1.0 and 0.0 <= p_g <= 1.0):
        raise OrderingError(f"kernel arguments must lie in [0, 1], got ({p_l}, {p_g})")
    if p_l >= p_g:
        raise OrderingError(f"need p_l < p_g, got p_l={p_l}, p_g={p_g}")
    quadrature = _default_quadrature(w) if quadrature is None else Quadrature(quadrature)
    n = int(quad_points)
    if n < 2:
        raise ConfigError("quad_points must be >= 2")
    if quadrature is Quadrature.SIMPSON and n % 2:
        n += 1
    if p_star is not None and not (p_l <= p_star < p_g):
        warnings.warn(f"({p_l}, {p_g}) does not straddle p*={p_star}", OffDomainWarning, stacklevel=2)
    if w.family is Family.IDENTITY:
        return 0.0
    return _integrate_gap(w, float(p_l), float(p_g), quadrature, n)


def singular_kernel(w: WeightingFunctionSpec, p_l: float, p_g: float, **kw) -> float:
    """Interval average of w(p) - p; tends to w(p) - p as the interval shrinks onto p."""
    if p_g - p_l < 1e-14:
        if p_l >= p_g:
            raise OrderingError(f"need p_l < p_g, got p_l={p_l}, p_g={p_g}")
        raise NearSingularError(f"interval width {p_g - p_l:.3e} below 1e-14")
    return confidence_kernel(w, p_l, p_g, **kw) / (p_g - p_l)


@dataclass(frozen=True)
class KernelMatrix:
    entries: np.ndarray
    loss_grid: np.ndarray
    gain_grid: np.ndarray
    p_star: float
    pwf: WeightingFunctionSpec | None
    quadrature: Quadrature
    quad_points: int
    scale: float = 1.0

    @property
    def shape(self) -> tuple[int, int]:
        return self.entries.shape


def build_kernel_matrix(
    w: WeightingFunctionSpec,
    loss_n: int,
    gain_n: int,
    p_star: float | str | None = "auto",
    quadrature: Quadrature | str | None = None,
    quad_points: int = DEFAULT_QUAD_POINTS,
    scale: float = 1.0,
    workers: int | None = None,
) -> KernelMatrix:
    """Assemble K[l, g] = K(p_l, p_g) on uniform loss/gain grids.

    The loss grid spans [0, p*] inclusive; the gain grid is open at p* and
    ends at 1.  ``scale`` multiplies every entry (used to normalise the
    operator before orbit studies).  Entries are independent, so assembly is
    bitwise identical for any ``workers``.
    """
    if loss_n < 1 or gain_n < 1:
        raise ConfigError("loss_n and gain_n must be >= 1")
    if p_star is None or p_star == "auto":
        # every point is fixed under the identity; any split gives the zero kernel
        p_star = 0.5 if w.family is Family.IDENTITY else fixed_point(w)
    p_star = float(p_star)
    if not 0.0 < p_star < 1.0:
        raise ConfigError(f"p_star must lie in (0, 1), got {p_star}")
    quadrature = _default_quadrature(w) if quadrature is None else Quadrature(quadrature)
    loss = np.linspace(0.0, p_star, loss_n)
    gain = p_star + (1.0 - p_star) * np.arange(1, gain_n + 1) / gain_n
    gain[-1] = 1.0

    def row(i: int) -> np.ndarray:
        return np.array([confidence_kernel(w, loss[i], g, quadrature, quad_points) for g in gain])

    n_workers = resolve_workers(workers)
    if n_workers == 1 or loss_n == 1:
        rows = [row(i) for i in range(loss_n)]
    else:
        with ThreadPoolExecutor(max_workers=n_workers) as pool:
            rows = list(pool.map(row, range(loss_n)))
    entries = np.vstack(rows)
    if scale != 1.0:
        entries = entries * float(scale)
    return KernelMatrix(entries, loss, gain, p_star, w, quadrature, int(quad_points), float(scale))


def _mat(M) -> np.ndarray:
    return np.asarray(M.entries if isinstance(M, KernelMatrix) else M, dtype=float)


def behavioral_adjoint(M) -> np.ndarray:
    """Rotation-and-reversal adjoint, ``-M.T``."""
    return -_mat(M).T


def composite_T(K) -> np.ndarray:
    """K^T K (gain x gain, symmetric positive semidefinite)."""
    K = _mat(K)
    return K.T @ K


@dataclass(frozen=True)
class SpectrumReport:
    eigenvalues: np.ndarray | None
    singular_values: np.ndarray
    spectral_norm: float
    is_contraction: bool
    eigenvalue_product: complex | None
    symmetry_residual: float | None
    skew_residual: float | None

    def to_dict(self) -> dict:
        d = {
            "spectral_norm": self.spectral_norm,
            "is_contraction": self.is_contraction,
            "singular_values": self.singular_values.tolist(),
        }
        if self.eigenvalues is not None:
            d["eigenvalues"] = [{"re": float(z.real), "im": float(z.imag)} for z in self.eigenvalues]
            d["eigenvalue_product"] = {"re": float(self.eigenvalue_product.real), "im": float(self.eigenvalue_product.imag)}
            d["symmetry_residual"] = self.symmetry_residual
            d["skew_residual"] = self.skew_residual
        return d


def spectrum(M) -> SpectrumReport:
    """Eigenvalues (square input), singular values and spectral norm.

    The eigenvalue product is logged alongside the spectral norm; only the
    latter is used as the contraction diagnostic.
    """
    A = _mat(M)
    if not np.all(np.isfinite(A)):
        raise NumericError("matrix has non-finite entries")
    sv = np.linalg.svd(A, compute_uv=False)
    norm = float(sv[0]) if sv.size else 0.0
    eig = prod = sym = skew = None
    if A.ndim == 2 and A.shape[0] == A.shape[1]:
        eig = np.linalg.eigvals(A)
        eig = eig[np.lexsort((eig.imag, eig.real))]
        prod = complex(np.prod(eig))
        sym = float(np.max(np.abs(A - A.T))) if A.size else 0.0
        skew = float(np.max(np.abs(A + A.T))) if A.size else 0.0
        log.debug("eigenvalue product %s, spectral norm %s", prod, norm)
    return SpectrumReport(eig, sv, norm, norm < 1.0, prod, sym, skew)
