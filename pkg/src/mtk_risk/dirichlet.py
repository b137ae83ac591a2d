"""Harmonic utility checks and Monte Carlo value estimates via first exit of Brownian motion.

Exit points are sampled with walk-on-spheres: from the current point jump to
a uniform point on the largest circle inside the domain, and stop once
within ``delta`` of the boundary, projecting onto it.  Only the exit
distribution is needed for E^x[phi(B_tau)], and walk-on-spheres preserves it.

Randomness is counter based (see :mod:`mtk_risk.rng`): the angle of step
``s`` on path ``i`` depends only on (seed, i, s).  Paths are summed in
blocks of 1024 and the block sums are combined pairwise in index order, so
an estimate is a deterministic function of its inputs for any worker count.
"""

from __future__ import annotations

import enum
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, Mapping, Sequence

import numpy as np

from . import rng
from ._workers import resolve_workers
from .errors import ConfigError, DomainError, MTKRiskError, NumericError

__all__ = [
    "Shape",
    "DomainSpec",
    "BoundaryData",
    "ExitEstimate",
    "ExitSample",
    "PointFailure",
    "laplacian",
    "harmonic_mode",
    "harmonic_surface",
    "sample_first_exit",
    "estimate_value",
    "estimate_value_grid",
]

BLOCK = 1024
CHUNK_BLOCKS = 8
MAX_STEPS = 100_000
DEFAULT_DELTA = 1e-6


class Shape(str, enum.Enum):
    DISK = "disk"
    RECTANGLE = "rectangle"
    ANNULUS = "annulus"


@dataclass(frozen=True)
class DomainSpec:
    shape: Shape
    center: tuple[float, float] = (0.0, 0.0)
    radius: float = 1.0
    lo: tuple[float, float] = (0.0, 0.0)
    hi: tuple[float, float] = (1.0, 1.0)
    r_in: float = 0.5
    r_out: float = 1.0
    delta: float = DEFAULT_DELTA

    def __post_init__(self):
        object.__setattr__(self, "shape", Shape(self.shape))
        if not 1e-8 <= self.delta <= 1e-2:
            raise ConfigError(f"absorption shell delta must lie in [1e-8, 1e-2], got {self.delta}")
        if self.shape is Shape.DISK and not self.radius > 0:
            raise ConfigError("disk radius must be positive")
        if self.shape is Shape.RECTANGLE and not (self.lo[0] < self.hi[0] and self.lo[1] < self.hi[1]):
            raise ConfigError("rectangle must have lo < hi in both coordinates")
        if self.shape is Shape.ANNULUS and not (0 < self.r_in < self.r_out):
            raise ConfigError("annulus needs 0 < r_in < r_out")

    @classmethod
    def disk(cls, center=(0.0, 0.0), radius: float = 1.0, delta: float = DEFAULT_DELTA) -> "DomainSpec":
        return cls(Shape.DISK, center=tuple(map(float, center)), radius=float(radius), delta=delta)

    @classmethod
    def rectangle(cls, lo=(0.0, 0.0), hi=(1.0, 1.0), delta: float = DEFAULT_DELTA) -> "DomainSpec":
        return cls(Shape.RECTANGLE, lo=tuple(map(float, lo)), hi=tuple(map(float, hi)), delta=delta)

    @classmethod
    def annulus(cls, center=(0.0, 0.0), r_in: float = 0.5, r_out: float = 1.0, delta: float = DEFAULT_DELTA) -> "DomainSpec":
        return cls(Shape.ANNULUS, center=tuple(map(float, center)), r_in=float(r_in), r_out=float(r_out), delta=delta)

    @property
    def origin(self) -> np.ndarray:
        """Point about which boundary angles are measured."""
        if self.shape is Shape.RECTANGLE:
            return 0.5 * (np.asarray(self.lo) + np.asarray(self.hi))
        return np.asarray(self.center, dtype=float)

    def distance(self, x: np.ndarray) -> np.ndarray:
        """Signed distance to the boundary, positive inside.  ``x`` has shape (m, 2)."""
        x = np.atleast_2d(x)
        if self.shape is Shape.DISK:
            return self.radius - np.hypot(*(x - self.center).T)
        if self.shape is Shape.RECTANGLE:
            lo, hi = np.asarray(self.lo), np.asarray(self.hi)
            return np.minimum((x - lo).min(axis=1), (hi - x).min(axis=1))
        rho = np.hypot(*(x - self.center).T)
        return np.minimum(rho - self.r_in, self.r_out - rho)

    def project(self, x: np.ndarray) -> np.ndarray:
        """Nearest boundary point for each row of ``x``."""
        x = np.atleast_2d(np.asarray(x, dtype=float)).copy()
        if self.shape is Shape.RECTANGLE:
            lo, hi = np.asarray(self.lo), np.asarray(self.hi)
            gaps = np.column_stack([x[:, 0] - lo[0], hi[0] - x[:, 0], x[:, 1] - lo[1], hi[1] - x[:, 1]])
            side = np.argmin(gaps, axis=1)
            rows = np.arange(len(x))
            coord = side // 2
            value = np.where(side % 2 == 0, lo[coord], hi[coord])
            x[rows, coord] = value
            other = 1 - coord
            x[rows, other] = np.clip(x[rows, other], lo[other], hi[other])
            return x
        c = np.asarray(self.center)
        v = x - c
        rho = np.hypot(*v.T)
        safe = np.where(rho > 0, rho, 1.0)
        unit = np.where((rho > 0)[:, None], v / safe[:, None], np.array([1.0, 0.0]))
        if self.shape is Shape.DISK:
            target = np.full(len(x), self.radius)
        else:
            target = np.where(rho - self.r_in < self.r_out - rho, self.r_in, self.r_out)
        return c + unit * target[:, None]

    def describe(self) -> dict:
        d = {"shape": self.shape.value, "delta": self.delta}
        if self.shape is Shape.DISK:
            d.update(center=list(self.center), radius=self.radius)
        elif self.shape is Shape.RECTANGLE:
            d.update(lo=list(self.lo), hi=list(self.hi))
        else:
            d.update(center=list(self.center), r_in=self.r_in, r_out=self.r_out)
        return d


@dataclass(frozen=True)
class BoundaryData:
    """Boundary function phi.

    family: ``constant`` (c), ``cos`` / ``sin`` (k; angle about the domain
    origin) or ``tkvalue`` (alpha_g, beta_l, lambda, axis) which applies the
    piecewise power value function to the projection ``point . axis``.
    """

    family: str
    params: Mapping[str, float] = field(default_factory=dict)
    axis: tuple[float, float] = (1.0, 0.0)

    def __post_init__(self):
        if self.family not in ("constant", "cos", "sin", "tkvalue"):
            raise ConfigError(f"unknown boundary family {self.family!r}")
        if self.family == "tkvalue":
            p = self.params
            if not (0 < p.get("alpha_g", 0.88) <= 1 and 0 < p.get("beta_l", 0.88) <= 1 and p.get("lambda", 2.25) > 0):
                raise ConfigError("tkvalue boundary needs exponents in (0, 1] and lambda > 0")

    @classmethod
    def constant(cls, c: float) -> "BoundaryData":
        return cls("constant", {"c": float(c)})

    @classmethod
    def cos_harmonic(cls, k: int = 1) -> "BoundaryData":
        return cls("cos", {"k": int(k)})

    @classmethod
    def sin_harmonic(cls, k: int = 1) -> "BoundaryData":
        return cls("sin", {"k": int(k)})

    @classmethod
    def tk_value(cls, alpha_g: float = 0.88, beta_l: float = 0.88, lam: float = 2.25, axis=(1.0, 0.0)) -> "BoundaryData":
        return cls("tkvalue", {"alpha_g": alpha_g, "beta_l": beta_l, "lambda": lam}, tuple(map(float, axis)))

    def __call__(self, points: np.ndarray, domain: DomainSpec) -> np.ndarray:
        pts = np.atleast_2d(np.asarray(points, dtype=float))
        if self.family == "constant":
            return np.full(len(pts), self.params["c"])
        if self.family in ("cos", "sin"):
            v = pts - domain.origin
            theta = np.arctan2(v[:, 1], v[:, 0])
            k = self.params["k"]
            return np.cos(k * theta) if self.family == "cos" else np.sin(k * theta)
        a = self.params.get("alpha_g", 0.88)
        b = self.params.get("beta_l", 0.88)
        lam = self.params.get("lambda", 2.25)
        s = pts @ np.asarray(self.axis)
        out = np.zeros_like(s)
        pos, neg = s > 0, s < 0
        out[pos] = s[pos] ** a
        out[neg] = -lam * (-s[neg]) ** b
        return out

    def sup_norm(self, domain: DomainSpec, samples: int = 4096) -> float:
        """sup |phi| estimated by dense sampling of the boundary."""
        t = np.linspace(0, 2 * np.pi, samples, endpoint=False)
        if domain.shape is Shape.RECTANGLE:
            lo, hi = np.asarray(domain.lo), np.asarray(domain.hi)
            u = np.linspace(0, 1, samples // 4)
            pts = np.concatenate([
                np.column_stack([lo[0] + u * (hi[0] - lo[0]), np.full_like(u, lo[1])]),
                np.column_stack([lo[0] + u * (hi[0] - lo[0]), np.full_like(u, hi[1])]),
                np.column_stack([np.full_like(u, lo[0]), lo[1] + u * (hi[1] - lo[1])]),
                np.column_stack([np.full_like(u, hi[0]), lo[1] + u * (hi[1] - lo[1])]),
            ])
        else:
            radii = [domain.radius] if domain.shape is Shape.DISK else [domain.r_in, domain.r_out]
            pts = np.concatenate([np.asarray(domain.center) + r * np.column_stack([np.cos(t), np.sin(t)]) for r in radii])
        return float(np.max(np.abs(self(pts, domain))))

    def describe(self) -> dict:
        d = {"family": self.family, "params": dict(self.params)}
        if self.family == "tkvalue":
            d["axis"] = list(self.axis)
        return d


# -- harmonic functions -------------------------------------------------------


def laplacian(u: Callable[[float, float], float], point: Sequence[float], h: float = 1e-3) -> float:
    """5-point finite-difference Laplacian."""
    if not 1e-6 <= h <= 1e-1:
        raise ConfigError(f"stencil step h must lie in [1e-6, 1e-1], got {h}")
    x, y = (float(v) for v in point)
    vals = np.array([u(x + h, y), u(x - h, y), u(x, y + h), u(x, y - h), u(x, y)], dtype=float)
    if not np.all(np.isfinite(vals)):
        raise NumericError(f"non-finite samples around ({x}, {y})")
    return float((vals[:4].sum() - 4.0 * vals[4]) / (h * h))


def harmonic_mode(n: int, r: float, theta: float, literal: bool = False) -> complex:
    """r**|n| * exp(i n theta); with ``literal`` the angular factor is exp(i theta) for every n."""
    if not 0.0 <= r <= 1.0:
        raise DomainError(f"r must lie in [0, 1], got {r}")
    ang = theta if literal else n * theta
    return r ** abs(n) * complex(math.cos(ang), math.sin(ang))


def harmonic_surface(n: int, part: str = "re", literal: bool = False) -> Callable[[float, float], float]:
    """Cartesian (x, y) -> Re or Im of the n-th mode, valid off the unit disk as well."""
    if part not in ("re", "im"):
        raise ConfigError("part must be 're' or 'im'")

    def f(x: float, y: float) -> float:
        z = complex(x, y)
        if literal:
            rho = abs(z)
            w = rho ** abs(n) * (z / rho if rho else 1.0)
        else:
            w = z**n if n >= 0 else z.conjugate() ** (-n)
        return w.real if part == "re" else w.imag

    return f


# -- walk on spheres ----------------------------------------------------------


@dataclass(frozen=True)
class ExitSample:
    exit_point: np.ndarray
    steps: int


@dataclass(frozen=True)
class ExitEstimate:
    mean: float
    std_error: float
    n_paths: int
    mean_exit_steps: float
    seed: int
    x0: tuple[float, float] = (0.0, 0.0)
    phi_min: float = math.nan
    phi_max: float = math.nan

    def to_dict(self) -> dict:
        return {
            "mean": self.mean,
            "std_error": self.std_error,
            "paths": self.n_paths,
            "mean_steps": self.mean_exit_steps,
            "seed": self.seed,
            "x0": list(self.x0),
        }


@dataclass(frozen=True)
class PointFailure:
    x0: tuple[float, float]
    status: str
    message: str

    def to_dict(self) -> dict:
        return {"x0": list(self.x0), "status": self.status, "error": self.message}


def _check_start(domain: DomainSpec, x0) -> np.ndarray:
    x = np.asarray(x0, dtype=float).ravel()
    if x.size != 2 or not np.all(np.isfinite(x)):
        raise DomainError(f"start point must be a finite 2-vector, got {x0!r}")
    if domain.distance(x[None, :])[0] <= 0:
        raise DomainError(f"start point ({x[0]}, {x[1]}) is not strictly inside the domain")
    return x


def _walk(domain: DomainSpec, x0: np.ndarray, seed: int, first: int, count: int) -> tuple[np.ndarray, np.ndarray]:
    """Exit points and step counts for paths first .. first+count-1."""
    idx = np.arange(first, first + count, dtype=np.uint64)
    pos = np.tile(x0, (count, 1))
    exits = np.empty_like(pos)
    steps = np.zeros(count, dtype=np.int64)
    active = np.arange(count)
    two_pi = 2.0 * np.pi
    for s in range(MAX_STEPS + 1):
        d = domain.distance(pos[active])
        done = d < domain.delta
        if np.any(done):
            hit = active[done]
            exits[hit] = domain.project(pos[hit])
            steps[hit] = s
            active = active[~done]
            d = d[~done]
        if active.size == 0:
            return exits, steps
        ang = two_pi * rng.uniform(seed, idx[active], s)
        pos[active, 0] += d * np.cos(ang)
        pos[active, 1] += d * np.sin(ang)
    raise NumericError(f"walk did not reach the boundary within {MAX_STEPS} steps")


def sample_first_exit(domain: DomainSpec, x0, seed: int, path_index: int = 0) -> ExitSample:
    """One exit point; the random stream is keyed by (seed, path_index)."""
    x = _check_start(domain, x0)
    pts, steps = _walk(domain, x, seed, int(path_index), 1)
    return ExitSample(pts[0], int(steps[0]))


def sample_exits(domain: DomainSpec, x0, n_paths: int, seed: int) -> tuple[np.ndarray, np.ndarray]:
    """Exit points and step counts for paths 0 .. n_paths-1."""
    x = _check_start(domain, x0)
    return _walk(domain, x, seed, 0, int(n_paths))


def _pairwise(values: list[float]) -> float:
    while len(values) > 1:
        nxt = [values[i] + values[i + 1] for i in range(0, len(values) - 1, 2)]
        if len(values) % 2:
            nxt.append(values[-1])
        values = nxt
    return values[0] if values else 0.0


def estimate_value(
    domain: DomainSpec,
    phi: BoundaryData,
    x0,
    n_paths: int,
    seed: int,
    workers: int | None = None,
) -> ExitEstimate:
    """Monte Carlo estimate of E^x0[phi(B_tau)]."""
    if n_paths < 1:
        raise ConfigError("n_paths must be >= 1")
    x = _check_start(domain, x0)
    seed = int(seed)
    rng.seed_key(seed)
    chunk = BLOCK * CHUNK_BLOCKS
    starts = list(range(0, n_paths, chunk))

    def run(first: int):
        count = min(chunk, n_paths - first)
        pts, steps = _walk(domain, x, seed, first, count)
        return phi(pts, domain), steps

    n_workers = min(resolve_workers(workers), len(starts))
    if n_workers <= 1:
        parts = [run(s) for s in starts]
    else:
        with ThreadPoolExecutor(max_workers=n_workers) as pool:
            parts = list(pool.map(run, starts))
    vals = np.concatenate([p[0] for p in parts])
    steps = np.concatenate([p[1] for p in parts]).astype(float)
    if not np.all(np.isfinite(vals)):
        raise NumericError("boundary data produced non-finite values")

    blocks = range(0, n_paths, BLOCK)
    mean = _pairwise([float(vals[b : b + BLOCK].sum()) for b in blocks]) / n_paths
    ss = _pairwise([float(((vals[b : b + BLOCK] - mean) ** 2).sum()) for b in blocks])
    mean_steps = _pairwise([float(steps[b : b + BLOCK].sum()) for b in blocks]) / n_paths
    var = ss / (n_paths - 1) if n_paths > 1 else 0.0
    se = math.sqrt(var / n_paths)
    return ExitEstimate(mean, se, int(n_paths), mean_steps, seed, (float(x[0]), float(x[1])), float(vals.min()), float(vals.max()))


def estimate_value_grid(
    domain: DomainSpec,
    phi: BoundaryData,
    grid: Sequence[Sequence[float]],
    n_paths: int,
    seed: int,
    workers: int | None = None,
) -> list[ExitEstimate | PointFailure]:
    """estimate_value at each grid point with a per-point derived seed; failures are reported in place."""
    out: list[ExitEstimate | PointFailure] = []
    for i, pt in enumerate(grid):
        try:
            out.append(estimate_value(domain, phi, pt, n_paths, rng.derive_seed(seed, i), workers))
        except MTKRiskError as exc:
            p = tuple(float(v) for v in np.asarray(pt, dtype=float).ravel()[:2])
            out.append(PointFailure(p, exc.status, str(exc)))
    return out
