"""Frenet descriptors of parametric curves and Gauss curvature of graph surfaces.

Curves of any dimension are supported by :class:`CurveSampler`; the Frenet
quantities embed planar curves in R^3 with a zero third component.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Callable, Mapping, Sequence

import numpy as np
from scipy.interpolate import CubicSpline

from . import _fd
from .errors import ConfigError, CuspError, NumericError, SingularPointError

__all__ = [
    "CurveSampler",
    "SurfaceSampler",
    "FrenetReport",
    "SurfacePointReport",
    "spin_vector",
    "frenet",
    "gauss_curvature",
    "load_curve_csv",
]

FD_MIN, FD_MAX = 1e-8, 1e-2
GAUSS_TOL = 1e-9


@dataclass(frozen=True)
class CurveSampler:
    """Parametric curve t -> R^n with analytic or finite-difference derivatives.

    ``derivs`` holds analytic derivatives of order 1, 2, 3 (any prefix may be
    given).  When ``fd_step`` is set, or an analytic derivative of the
    requested order is missing, central differences are used; third
    derivatives always use a 1e-3 step.
    """

    func: Callable[[float], Sequence[float]]
    derivs: tuple[Callable[[float], Sequence[float]], ...] = ()
    kind: str = "custom"
    params: Mapping[str, float] = field(default_factory=dict)
    fd_step: float | None = None

    def __post_init__(self):
        if self.fd_step is not None and not (FD_MIN <= self.fd_step <= FD_MAX):
            raise ConfigError(f"finite-difference step must lie in [{FD_MIN}, {FD_MAX}], got {self.fd_step}")

    def __call__(self, t: float) -> np.ndarray:
        return np.atleast_1d(np.asarray(self.func(t), dtype=float))

    def derivative(self, t: float, order: int) -> np.ndarray:
        if order == 0:
            return self(t)
        if self.fd_step is None and order <= len(self.derivs):
            return np.atleast_1d(np.asarray(self.derivs[order - 1](t), dtype=float))
        h = self.fd_step if self.fd_step is not None else _fd.H1 if order == 1 else _fd.H2
        return _fd.derivative(self, t, order, h)

    def with_finite_differences(self, h: float) -> "CurveSampler":
        return replace(self, fd_step=float(h))

    def reparameterized(self, factor: float) -> "CurveSampler":
        """The curve s -> x(factor * s), with chain-rule derivatives."""
        c = float(factor)
        f, ds = self.func, self.derivs
        new = tuple((lambda k, d: (lambda s: (c**k) * np.asarray(d(c * s), dtype=float)))(k + 1, d) for k, d in enumerate(ds))
        return replace(self, func=lambda s: f(c * s), derivs=new, kind=f"{self.kind}*{c:g}")

    # -- named families ---------------------------------------------------

    @classmethod
    def circle(cls, r: float = 1.0) -> "CurveSampler":
        if not r > 0:
            raise ConfigError("circle radius must be positive")
        return cls(
            lambda t: (r * math.cos(t), r * math.sin(t), 0.0),
            (
                lambda t: (-r * math.sin(t), r * math.cos(t), 0.0),
                lambda t: (-r * math.cos(t), -r * math.sin(t), 0.0),
                lambda t: (r * math.sin(t), -r * math.cos(t), 0.0),
            ),
            "circle",
            {"r": r},
        )

    @classmethod
    def helix(cls, a: float = 1.0, b: float = 1.0) -> "CurveSampler":
        """(a cos t, a sin t, b t)."""
        return cls(
            lambda t: (a * math.cos(t), a * math.sin(t), b * t),
            (
                lambda t: (-a * math.sin(t), a * math.cos(t), b),
                lambda t: (-a * math.cos(t), -a * math.sin(t), 0.0),
                lambda t: (a * math.sin(t), -a * math.cos(t), 0.0),
            ),
            "helix",
            {"a": a, "b": b},
        )

    @classmethod
    def line(cls, direction: Sequence[float], origin: Sequence[float] | None = None) -> "CurveSampler":
        d = np.asarray(direction, dtype=float)
        o = np.zeros_like(d) if origin is None else np.asarray(origin, dtype=float)
        z = np.zeros_like(d)
        return cls(lambda t: o + d * t, (lambda t: d, lambda t: z, lambda t: z), "line", {})

    @classmethod
    def polynomial(cls, coefficients: Sequence[Sequence[float]]) -> "CurveSampler":
        """One ascending-power coefficient list per component."""
        polys = [np.polynomial.Polynomial(c) for c in coefficients]
        ders = tuple((lambda k: (lambda t: [p.deriv(k)(t) for p in polys]))(k) for k in (1, 2, 3))
        return cls(lambda t: [p(t) for p in polys], ders, "polynomial", {})

    @classmethod
    def tabulated(cls, t: Sequence[float], points: Sequence[Sequence[float]]) -> "CurveSampler":
        """Cubic-spline interpolant through sampled points; derivatives come from the spline."""
        t = np.asarray(t, dtype=float)
        pts = np.asarray(points, dtype=float)
        if t.ndim != 1 or pts.shape[0] != t.size or t.size < 4:
            raise ConfigError("tabulated curve needs >= 4 rows of (t, coordinates)")
        if not np.all(np.diff(t) > 0):
            raise ConfigError("tabulated curve parameter must be strictly increasing")
        cs = CubicSpline(t, pts, axis=0)
        ders = tuple((lambda k: (lambda s: cs(s, k)))(k) for k in (1, 2, 3))
        return cls(cs, ders, "tabulated", {})


def load_curve_csv(path: str | Path) -> CurveSampler:
    """Read rows of (t, x, y[, z]); a non-numeric header row is skipped."""
    rows = []
    with open(path, newline="") as fh:
        for rec in csv.reader(fh):
            if not rec or rec[0].lstrip().startswith("#"):
                continue
            try:
                rows.append([float(v) for v in rec])
            except ValueError:
                if rows:
                    raise ConfigError(f"malformed row in {path}: {rec}") from None
    if not rows:
        raise ConfigError(f"no curve rows in {path}")
    arr = np.asarray(rows)
    return CurveSampler.tabulated(arr[:, 0], arr[:, 1:])


def _as3(v: np.ndarray) -> np.ndarray:
    v = np.asarray(v, dtype=float).ravel()
    if v.size == 3:
        return v
    if v.size == 2:
        return np.array([v[0], v[1], 0.0])
    raise ConfigError(f"Frenet quantities need a 2D or 3D curve, got dimension {v.size}")


def _finite(*vs):
    for v in vs:
        if not np.all(np.isfinite(v)):
            raise NumericError("non-finite curve sample or derivative")


def spin_vector(curve: CurveSampler, t: float) -> np.ndarray:
    """(x ^ x') / (x . x)."""
    x = _as3(curve(t))
    dx = _as3(curve.derivative(t, 1))
    _finite(x, dx)
    nn = float(x @ x)
    if math.sqrt(nn) <= 1e-12:
        raise SingularPointError(f"curve passes through the origin at t={t}")
    return np.cross(x, dx) / nn


@dataclass(frozen=True)
class FrenetReport:
    spin: np.ndarray | None  # None when the curve passes through the origin
    curvature: float
    binormal: np.ndarray | None  # None when x' ^ x'' vanishes
    torsion: float | None

    @property
    def binormal_defined(self) -> bool:
        return self.binormal is not None

    def to_dict(self) -> dict:
        return {
            "spin": None if self.spin is None else self.spin.tolist(),
            "curvature": self.curvature,
            "binormal": None if self.binormal is None else self.binormal.tolist(),
            "torsion": self.torsion,
            "binormal_defined": self.binormal_defined,
        }


def frenet(curve: CurveSampler, t: float) -> FrenetReport:
    d1 = _as3(curve.derivative(t, 1))
    d2 = _as3(curve.derivative(t, 2))
    d3 = _as3(curve.derivative(t, 3))
    _finite(d1, d2, d3)
    speed = float(np.linalg.norm(d1))
    if speed <= 1e-10:
        raise CuspError(f"tangent vanishes at t={t}")
    cross = np.cross(d1, d2)
    cn = float(np.linalg.norm(cross))
    kappa = cn / speed**3
    # finite differences leave ~1e-6 noise in x''; do not read a binormal out of it
    floor = 1e-12 if curve.fd_step is None else 1e-6 * speed * speed
    if cn <= floor:
        binormal, tau = None, None
        kappa = 0.0 if curve.fd_step is not None else kappa
    else:
        binormal = cross / cn
        tau = float(cross @ d3) / cn**2
    try:
        spin = spin_vector(curve, t)
    except SingularPointError:
        spin = None
    return FrenetReport(spin, kappa, binormal, tau)


# -- surfaces ---------------------------------------------------------------


@dataclass(frozen=True)
class SurfaceSampler:
    """Graph surface z = u(x, y) with optional analytic gradient and Hessian."""

    func: Callable[[float, float], float]
    grad: Callable[[float, float], Sequence[float]] | None = None
    hess: Callable[[float, float], Sequence[Sequence[float]]] | None = None
    name: str = "custom"
    fd_step: float = 1e-4

    def __call__(self, x: float, y: float) -> float:
        return float(self.func(x, y))

    def gradient(self, x: float, y: float) -> np.ndarray:
        if self.grad is not None:
            return np.asarray(self.grad(x, y), dtype=float)
        fx = _fd.d1(lambda s: self.func(s, y), x)
        fy = _fd.d1(lambda s: self.func(x, s), y)
        return np.array([fx, fy], dtype=float)

    def hessian(self, x: float, y: float) -> np.ndarray:
        if self.hess is not None:
            return np.asarray(self.hess(x, y), dtype=float)
        h = self.fd_step
        f = self.func
        uxx = _fd.d2(lambda s: f(s, y), x, h)
        uyy = _fd.d2(lambda s: f(x, s), y, h)
        uxy = (f(x + h, y + h) - f(x + h, y - h) - f(x - h, y + h) + f(x - h, y - h)) / (4 * h * h)
        return np.array([[uxx, uxy], [uxy, uyy]], dtype=float)

    @classmethod
    def saddle(cls) -> "SurfaceSampler":
        return cls(lambda x, y: x * x - y * y, lambda x, y: (2 * x, -2 * y), lambda x, y: ((2.0, 0.0), (0.0, -2.0)), "saddle")

    @classmethod
    def paraboloid(cls) -> "SurfaceSampler":
        return cls(lambda x, y: x * x + y * y, lambda x, y: (2 * x, 2 * y), lambda x, y: ((2.0, 0.0), (0.0, 2.0)), "paraboloid")

    @classmethod
    def plane(cls, a: float = 3.0, b: float = 2.0, c: float = 0.0) -> "SurfaceSampler":
        return cls(lambda x, y: a * x + b * y + c, lambda x, y: (a, b), lambda x, y: ((0.0, 0.0), (0.0, 0.0)), "plane")

    def plus_linear(self, a: float, b: float) -> "SurfaceSampler":
        """u + a x + b y; the Hessian is unchanged."""
        f, g = self.func, self.grad
        grad = None if g is None else (lambda x, y: np.asarray(g(x, y), dtype=float) + (a, b))
        return replace(self, func=lambda x, y: f(x, y) + a * x + b * y, grad=grad, name=f"{self.name}+linear")


@dataclass(frozen=True)
class SurfacePointReport:
    gauss_curvature: float
    classification: str  # "hyperbolic" | "elliptic" | "parabolic"
    hessian_eigenvalues: tuple[float, float]
    gradient: tuple[float, float]

    @property
    def mixed_signature(self) -> bool:
        lo, hi = self.hessian_eigenvalues
        return lo < 0 < hi

    def to_dict(self) -> dict:
        return {
            "gauss_curvature": self.gauss_curvature,
            "classification": self.classification,
            "hessian_eigenvalues": list(self.hessian_eigenvalues),
            "gradient": list(self.gradient),
            "mixed_signature": self.mixed_signature,
        }


def classify(K: float, tol: float = GAUSS_TOL) -> str:
    if K < -tol:
        return "hyperbolic"
    if K > tol:
        return "elliptic"
    return "parabolic"


def gauss_curvature(u: SurfaceSampler, point: Sequence[float]) -> SurfacePointReport:
    """K = (u_xx u_yy - u_xy^2) / (1 + u_x^2 + u_y^2)^2 at ``point``."""
    x, y = (float(v) for v in point)
    g = u.gradient(x, y)
    H = u.hessian(x, y)
    if not (np.all(np.isfinite(g)) and np.all(np.isfinite(H))):
        raise NumericError(f"non-finite derivatives at ({x}, {y})")
    K = (H[0, 0] * H[1, 1] - H[0, 1] * H[1, 0]) / (1.0 + g[0] ** 2 + g[1] ** 2) ** 2
    ev = np.linalg.eigvalsh(0.5 * (H + H.T))
    return SurfacePointReport(float(K), classify(float(K)), (float(ev[0]), float(ev[1])), (float(g[0]), float(g[1])))
